//! The chain-antichain family of instance-solution problems.
//!
//! "Infinite" is rendered as "at least `min_size` elements" via
//! [`SizePolicy`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::poset::{
    classify_stability, Element, FinitePoset, PosetError, SolutionKind, SolutionSet,
    StabilityError, StableAnnotation, Tag, TypeTag,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "CAC")]
    Cac,
    #[serde(rename = "SCAC")]
    Scac,
    #[serde(rename = "OMEGA_CAC")]
    OmegaCac,
    #[serde(rename = "OMEGA_SCAC")]
    OmegaScac,
    #[serde(rename = "SCAC_SMALL")]
    ScacSmall,
    #[serde(rename = "SCAC_LARGE")]
    ScacLarge,
    #[serde(rename = "SCAC_TYPE")]
    ScacType,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 7] = [
        ProblemKind::Cac,
        ProblemKind::Scac,
        ProblemKind::OmegaCac,
        ProblemKind::OmegaScac,
        ProblemKind::ScacSmall,
        ProblemKind::ScacLarge,
        ProblemKind::ScacType,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Cac => "CAC",
            ProblemKind::Scac => "SCAC",
            ProblemKind::OmegaCac => "OMEGA_CAC",
            ProblemKind::OmegaScac => "OMEGA_SCAC",
            ProblemKind::ScacSmall => "SCAC_SMALL",
            ProblemKind::ScacLarge => "SCAC_LARGE",
            ProblemKind::ScacType => "SCAC_TYPE",
        }
    }

    pub fn requires_omega(self) -> bool {
        matches!(self, ProblemKind::OmegaCac | ProblemKind::OmegaScac)
    }

    pub fn requires_stability(self) -> bool {
        !matches!(self, ProblemKind::Cac | ProblemKind::OmegaCac)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown problem kind {s:?}"))
    }
}

/// The extra bit carried by `SCAC_TYPE` instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TypeFlag {
    S,
    L,
}

impl TypeFlag {
    pub fn of(type_tag: TypeTag) -> TypeFlag {
        match type_tag {
            TypeTag::Small => TypeFlag::S,
            TypeTag::Large => TypeFlag::L,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProblemInstance {
    pub poset: FinitePoset,
    pub annotation: Option<StableAnnotation>,
    pub type_flag: Option<TypeFlag>,
}

impl ProblemInstance {
    pub fn plain(poset: FinitePoset) -> Self {
        ProblemInstance {
            poset,
            annotation: None,
            type_flag: None,
        }
    }

    pub fn stable(poset: FinitePoset, annotation: StableAnnotation) -> Self {
        ProblemInstance {
            poset,
            annotation: Some(annotation),
            type_flag: None,
        }
    }
}

pub const DEFAULT_MIN_SIZE: usize = 3;
pub const DEFAULT_SOLVE_BOUND: usize = 20;

/// Finite stand-in for "infinite" plus the brute-force universe cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizePolicy {
    pub min_size: usize,
    #[serde(default = "default_bound")]
    pub solve_bound: usize,
}

fn default_bound() -> usize {
    DEFAULT_SOLVE_BOUND
}

impl Default for SizePolicy {
    fn default() -> Self {
        SizePolicy {
            min_size: DEFAULT_MIN_SIZE,
            solve_bound: DEFAULT_SOLVE_BOUND,
        }
    }
}

impl SizePolicy {
    pub fn new(min_size: usize) -> Result<Self, ProblemError> {
        if min_size == 0 {
            return Err(ProblemError::InvalidPolicy(min_size));
        }
        Ok(SizePolicy {
            min_size,
            ..SizePolicy::default()
        })
    }

    pub fn with_bound(self, solve_bound: usize) -> Self {
        SizePolicy {
            solve_bound: solve_bound.min(64),
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ProblemError {
    #[error("min_size must be positive, got {0}")]
    InvalidPolicy(usize),
    #[error("instance is not omega-ordered: {0} <=_P {1}")]
    NotOmegaOrdered(Element, Element),
    #[error("instance lacks a stability annotation")]
    MissingAnnotation,
    #[error("instance is not stable: {0}")]
    NotStable(StabilityError),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("solution has {size} elements, fewer than {min_size}")]
    TooSmall { size: usize, min_size: usize },
    #[error("not a chain: {0} and {1} are incomparable")]
    NotAChain(Element, Element),
    #[error("not an antichain: {0} and {1} are comparable")]
    NotAnAntichain(Element, Element),
    #[error("element {0} does not belong to the universe")]
    ForeignElement(Element),
    #[error("universe has {size} elements, above the brute-force bound {bound}")]
    TooLarge { size: usize, bound: usize },
}

impl From<PosetError> for ProblemError {
    fn from(e: PosetError) -> Self {
        match e {
            PosetError::ForeignElement(x) => ProblemError::ForeignElement(x),
            other => ProblemError::TypeMismatch(other.to_string()),
        }
    }
}

/// Checks the side conditions `kind` imposes on `inst`.
pub fn validate_instance(kind: ProblemKind, inst: &ProblemInstance) -> Result<(), ProblemError> {
    if kind.requires_omega() {
        if let Some((x, y)) = inst.poset.pairs().find(|(x, y)| x > y) {
            return Err(ProblemError::NotOmegaOrdered(x, y));
        }
    }
    if !kind.requires_stability() {
        return Ok(());
    }
    let ann = inst
        .annotation
        .as_ref()
        .ok_or(ProblemError::MissingAnnotation)?;
    classify_stability(&inst.poset, ann).map_err(ProblemError::NotStable)?;
    match kind {
        // An omega-ordered stable poset is necessarily of the small type.
        ProblemKind::OmegaScac if ann.has_tag(Tag::L) => Err(ProblemError::TypeMismatch(
            "omega-ordered stable instance carries an L tag".into(),
        )),
        ProblemKind::ScacSmall if ann.type_tag() != TypeTag::Small => {
            Err(ProblemError::TypeMismatch("expected small type".into()))
        }
        ProblemKind::ScacLarge if ann.type_tag() != TypeTag::Large => {
            Err(ProblemError::TypeMismatch("expected large type".into()))
        }
        ProblemKind::ScacType => match inst.type_flag {
            None => Err(ProblemError::TypeMismatch("missing type flag".into())),
            Some(flag) if flag != TypeFlag::of(ann.type_tag()) => Err(ProblemError::TypeMismatch(
                format!("flag {flag:?} contradicts {:?} type", ann.type_tag()),
            )),
            Some(_) => Ok(()),
        },
        _ => Ok(()),
    }
}

/// Checks a solution against the instance's poset.
///
/// Every kind shares the same solution predicate; `kind` is accepted for
/// symmetry with [`validate_instance`].
pub fn verify_solution(
    _kind: ProblemKind,
    inst: &ProblemInstance,
    sol: &SolutionSet,
    policy: &SizePolicy,
) -> Result<(), ProblemError> {
    verify_in_poset(&inst.poset, sol, policy)
}

pub fn verify_in_poset(
    p: &FinitePoset,
    sol: &SolutionSet,
    policy: &SizePolicy,
) -> Result<(), ProblemError> {
    if let Some(&x) = sol.elements.iter().find(|&&x| !p.contains(x)) {
        return Err(ProblemError::ForeignElement(x));
    }
    if sol.len() < policy.min_size {
        return Err(ProblemError::TooSmall {
            size: sol.len(),
            min_size: policy.min_size,
        });
    }
    let xs: Vec<Element> = sol.elements.iter().copied().collect();
    for (a, &x) in xs.iter().enumerate() {
        for &y in &xs[a + 1..] {
            match sol.kind {
                SolutionKind::Chain if !p.comparable(x, y) => {
                    return Err(ProblemError::NotAChain(x, y))
                }
                SolutionKind::Antichain if p.comparable(x, y) => {
                    return Err(ProblemError::NotAnAntichain(x, y))
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Accepts a bare set if it is a chain or an antichain of sufficient size.
/// On failure the antichain error is reported, since every set that fails
/// both tests fails as an antichain.
pub fn verify_unlabeled(
    p: &FinitePoset,
    elements: &BTreeSet<Element>,
    policy: &SizePolicy,
) -> Result<SolutionKind, ProblemError> {
    let chain = SolutionSet::new(SolutionKind::Chain, elements.iter().copied());
    if verify_in_poset(p, &chain, policy).is_ok() {
        return Ok(SolutionKind::Chain);
    }
    let anti = SolutionSet::new(SolutionKind::Antichain, elements.iter().copied());
    verify_in_poset(p, &anti, policy).map(|_| SolutionKind::Antichain)
}

/// Bit rows of the comparability relation (without the diagonal).
fn comparability_masks(p: &FinitePoset) -> Vec<u64> {
    let n = p.len();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && (p.le_at(i, j) || p.le_at(j, i)))
                .fold(0u64, |m, j| m | (1 << j))
        })
        .collect()
}

fn complement_masks(masks: &[u64]) -> Vec<u64> {
    let n = masks.len();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    masks
        .iter()
        .enumerate()
        .map(|(i, m)| !m & full & !(1 << i))
        .collect()
}

/// Length of the longest chain, by longest path over the strict order.
pub fn max_chain_len(p: &FinitePoset) -> usize {
    let n = p.len();
    // Sorting by down-set size is a linear extension.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (0..n).filter(|&j| p.le_at(j, i)).count());
    let mut best = vec![1usize; n];
    for (a, &i) in order.iter().enumerate() {
        for &j in &order[..a] {
            if p.le_at(j, i) && j != i {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

/// Lexicographically least maximum clique of the graph given by `adj`.
///
/// Include-first depth-first search over ascending vertices visits
/// equal-size sets in lexicographic order, so the first maximum found
/// is the least one. `cap` is a known upper bound on the clique size.
fn lex_least_max_clique(adj: &[u64], cap: usize) -> Vec<usize> {
    fn go(adj: &[u64], cur: &mut Vec<usize>, mut cand: u64, best: &mut Vec<usize>, cap: usize) {
        if cur.len() > best.len() {
            *best = cur.clone();
        }
        while cand != 0 {
            if best.len() >= cap || cur.len() + cand.count_ones() as usize <= best.len() {
                return;
            }
            let v = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            cur.push(v);
            go(adj, cur, cand & adj[v], best, cap);
            cur.pop();
        }
    }
    let n = adj.len();
    if n == 0 {
        return Vec::new();
    }
    // Branch on the least vertex of the clique; branches are independent.
    let per_min = par::map_range(n, |v| {
        let higher = if v + 1 >= 64 { 0 } else { !0u64 << (v + 1) };
        let mut best = Vec::new();
        go(adj, &mut vec![v], adj[v] & higher, &mut best, cap);
        if best.is_empty() {
            best.push(v);
        }
        best
    });
    let top = per_min.iter().map(Vec::len).max().unwrap_or(0);
    per_min.into_iter().find(|c| c.len() == top).unwrap_or_default()
}

fn check_bound(p: &FinitePoset, policy: &SizePolicy) -> Result<(), ProblemError> {
    let bound = policy.solve_bound.min(64);
    if p.len() > bound {
        return Err(ProblemError::TooLarge {
            size: p.len(),
            bound,
        });
    }
    Ok(())
}

/// Lexicographically least maximum chain.
pub fn max_chain(p: &FinitePoset) -> BTreeSet<Element> {
    let target = max_chain_len(p);
    lex_least_max_clique(&comparability_masks(p), target)
        .into_iter()
        .map(|i| p.universe()[i])
        .collect()
}

/// Lexicographically least maximum antichain.
pub fn max_antichain(p: &FinitePoset) -> BTreeSet<Element> {
    let adj = complement_masks(&comparability_masks(p));
    lex_least_max_clique(&adj, p.len())
        .into_iter()
        .map(|i| p.universe()[i])
        .collect()
}

/// Larger of the maximum chain and maximum antichain sizes.
pub fn max_feasible(p: &FinitePoset) -> usize {
    max_chain_len(p).max(max_antichain(p).len())
}

/// Oracle solver: a maximum chain if one reaches `min_size`, otherwise a
/// maximum antichain if one does, otherwise `None`. Ties are broken
/// toward the lexicographically least set.
pub fn brute_force_solve(
    _kind: ProblemKind,
    inst: &ProblemInstance,
    policy: &SizePolicy,
) -> Result<Option<SolutionSet>, ProblemError> {
    solve_poset(&inst.poset, policy)
}

pub fn solve_poset(p: &FinitePoset, policy: &SizePolicy) -> Result<Option<SolutionSet>, ProblemError> {
    check_bound(p, policy)?;
    if max_chain_len(p) >= policy.min_size {
        return Ok(Some(SolutionSet::new(SolutionKind::Chain, max_chain(p))));
    }
    let anti = max_antichain(p);
    if anti.len() >= policy.min_size {
        return Ok(Some(SolutionSet::new(SolutionKind::Antichain, anti)));
    }
    Ok(None)
}

/// Every chain and every antichain with at least `min_size` elements, in
/// ascending subset-mask order. Sets of size one are reported as chains.
pub fn enumerate_solutions(
    p: &FinitePoset,
    policy: &SizePolicy,
) -> Result<Vec<SolutionSet>, ProblemError> {
    check_bound(p, policy)?;
    let n = p.len();
    let comp = comparability_masks(p);
    let inc = complement_masks(&comp);
    let total: u64 = 1 << n;
    let mut out = Vec::new();
    for mask in 1..total {
        let size = mask.count_ones() as usize;
        if size < policy.min_size {
            continue;
        }
        let closed = |adj: &[u64]| {
            let mut rest = mask;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if (mask & !(1 << v)) & !adj[v] != 0 {
                    return false;
                }
            }
            true
        };
        let elements = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| p.universe()[i]);
        if closed(&comp) {
            out.push(SolutionSet::new(SolutionKind::Chain, elements));
        } else if closed(&inc) {
            out.push(SolutionSet::new(SolutionKind::Antichain, elements));
        }
    }
    Ok(out)
}
