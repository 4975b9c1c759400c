//! Executable forms of the reductions between chain-antichain problems.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poset::{classify_stability, Element, FinitePoset, SolutionKind, SolutionSet, TypeTag};
use crate::problems::{verify_in_poset, ProblemError, ProblemInstance, SizePolicy, TypeFlag};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ReductionError {
    #[error("solver produced no solution at stage {0}")]
    SolverFailed(u8),
    #[error("input set is not a solution: {0}")]
    NotASolution(ProblemError),
    #[error("poset is not omega-ordered: {0} <=_P {1}")]
    NotOmegaOrdered(Element, Element),
    #[error("instance is not stable: {0}")]
    NotStable(String),
    #[error("element {0} does not belong to the universe")]
    ForeignElement(Element),
}

/// `{(x, y) : x <=_P y and x <= y}`.
pub fn split_plus(p: &FinitePoset) -> FinitePoset {
    p.derive(|i, j| i <= j && p.le_at(i, j))
}

/// `{(y, x) : x <=_P y and y <= x}`, i.e. the backward comparabilities of
/// `P`, re-oriented to agree with the natural order.
pub fn split_minus(p: &FinitePoset) -> FinitePoset {
    p.derive(|i, j| i <= j && p.le_at(j, i))
}

/// Both halves of the split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPair {
    pub plus: FinitePoset,
    pub minus: FinitePoset,
}

impl SplitPair {
    pub fn of(p: &FinitePoset) -> Self {
        SplitPair {
            plus: split_plus(p),
            minus: split_minus(p),
        }
    }
}

/// Record of a two-stage solve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    pub stage1: SolutionSet,
    pub stage2: Option<SolutionSet>,
    pub result: SolutionSet,
}

/// Solves a general instance with two calls to an omega-ordered solver.
///
/// Stage one solves `split_plus(P)`; a chain there is a chain of `P`.
/// Otherwise stage two solves `split_minus(P)` restricted to the stage-one
/// antichain, whose solutions are solutions of `P` verbatim.
pub fn compose_cac_via_omega<S>(
    p: &FinitePoset,
    mut omega_solver: S,
    policy: &SizePolicy,
) -> Result<Composition, ReductionError>
where
    S: FnMut(&FinitePoset, &SizePolicy) -> Option<SolutionSet>,
{
    let plus = split_plus(p);
    let stage1 = omega_solver(&plus, policy).ok_or(ReductionError::SolverFailed(1))?;
    if stage1.kind == SolutionKind::Chain {
        return Ok(Composition {
            result: stage1.clone(),
            stage1,
            stage2: None,
        });
    }
    let restricted = split_minus(p)
        .restrict(&stage1.elements)
        .map_err(|e| match e {
            crate::PosetError::ForeignElement(x) => ReductionError::ForeignElement(x),
            other => ReductionError::NotASolution(other.into()),
        })?;
    let stage2 = omega_solver(&restricted, policy).ok_or(ReductionError::SolverFailed(2))?;
    Ok(Composition {
        result: stage2.clone(),
        stage1,
        stage2: Some(stage2),
    })
}

/// The omega-ordered order used to solve a stable instance of the given
/// type: `split_plus` for the small type, `split_minus` for the large.
pub fn build_leq_q(p: &FinitePoset, type_tag: TypeTag) -> FinitePoset {
    match type_tag {
        TypeTag::Small => split_plus(p),
        TypeTag::Large => split_minus(p),
    }
}

/// The thinning predicate for `m < n`: fails exactly when `m` and `n` are
/// incomparable in `Q` but comparable in `P`.
pub fn thinning_predicate(p: &FinitePoset, q: &FinitePoset, m: Element, n: Element) -> bool {
    !(q.incomparable(m, n) && p.comparable(m, n))
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ThinningTrace {
    /// `X_0, X_1, ...` up to the first stage with no pivot left.
    pub stages: Vec<BTreeSet<Element>>,
    pub result: BTreeSet<Element>,
}

impl ThinningTrace {
    /// Every stage is contained in its predecessor.
    pub fn is_nested(&self) -> bool {
        self.stages.windows(2).all(|w| w[1].is_subset(&w[0]))
    }

    /// `|X_0 ∩ ... ∩ X_n| >= n + 1` for every recorded stage `n`.
    pub fn stage_bound_holds(&self) -> bool {
        let mut inter: Option<BTreeSet<Element>> = None;
        for (n, stage) in self.stages.iter().enumerate() {
            let next = match inter {
                None => stage.clone(),
                Some(acc) => acc.intersection(stage).copied().collect(),
            };
            if next.len() < n + 1 {
                return false;
            }
            inter = Some(next);
        }
        true
    }

    /// The `k`-th element of `x` (ascending) belongs to the result iff it
    /// survives into stage `k` (the last stage stands in for later ones).
    pub fn rank_membership(&self, x: &BTreeSet<Element>) -> BTreeSet<Element> {
        let Some(last) = self.stages.last() else {
            return x.clone();
        };
        x.iter()
            .enumerate()
            .filter(|&(k, e)| self.stages.get(k).unwrap_or(last).contains(e))
            .map(|(_, &e)| e)
            .collect()
    }
}

/// Thins a `<=_Q` solution into a solution of the stable poset `P`.
pub fn stable_thinning(
    p: &FinitePoset,
    type_tag: TypeTag,
    x: &SolutionSet,
    policy: &SizePolicy,
) -> Result<(SolutionSet, ThinningTrace), ReductionError> {
    let q = build_leq_q(p, type_tag);
    verify_in_poset(&q, x, policy).map_err(ReductionError::NotASolution)?;
    if x.kind == SolutionKind::Chain {
        let trace = ThinningTrace {
            stages: Vec::new(),
            result: x.elements.clone(),
        };
        return Ok((x.clone(), trace));
    }
    let r = |m: Element, n: Element| thinning_predicate(p, &q, m, n);

    let xs: Vec<Element> = x.elements.iter().copied().collect();
    let mut stages = Vec::new();
    let Some(&x0) = xs.first() else {
        return Ok((x.clone(), ThinningTrace::default()));
    };
    let mut current: Vec<Element> = xs.iter().copied().filter(|&e| r(x0, e)).collect();
    stages.push(current.iter().copied().collect::<BTreeSet<_>>());
    let mut n = 0;
    while current.len() > n + 1 {
        let pivot = current[n + 1];
        let next: Vec<Element> = current
            .iter()
            .enumerate()
            .filter(|&(i, &e)| i <= n + 1 || r(pivot, e))
            .map(|(_, &e)| e)
            .collect();
        stages.push(next.iter().copied().collect());
        current = next;
        n += 1;
    }
    let result: BTreeSet<Element> = current.into_iter().collect();
    let trace = ThinningTrace {
        stages,
        result: result.clone(),
    };
    Ok((SolutionSet::new(SolutionKind::Antichain, result), trace))
}

/// Elements with no `<=_P`-successor above them in the natural order.
pub fn successor_free_set(p: &FinitePoset) -> BTreeSet<Element> {
    let n = p.len();
    (0..n)
        .filter(|&i| (i + 1..n).all(|j| !p.le_at(i, j)))
        .map(|i| p.universe()[i])
        .collect()
}

/// Greedily climbs from `start`, always to the least strictly larger
/// element in `<=_P`, until none is left.
pub fn greedy_chain(p: &FinitePoset, start: Element) -> Result<SolutionSet, ReductionError> {
    let mut i = p.index_of(start).ok_or(ReductionError::ForeignElement(start))?;
    let mut chain = vec![start];
    while let Some(j) = (0..p.len()).find(|&j| j != i && p.le_at(i, j)) {
        chain.push(p.universe()[j]);
        i = j;
    }
    Ok(SolutionSet::chain(chain))
}

/// Options for [`greedy_antichain`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyAntichainOptions {
    /// Whether the least element counts as its own successor.
    pub base_counts_itself: bool,
}

impl Default for GreedyAntichainOptions {
    fn default() -> Self {
        GreedyAntichainOptions {
            base_counts_itself: true,
        }
    }
}

/// Walks the successor-free set of an omega-ordered poset: start with the
/// least successor of the least element, then repeatedly take the least
/// successor of the element following the previous pick.
pub fn greedy_antichain(
    p: &FinitePoset,
    opts: GreedyAntichainOptions,
) -> Result<SolutionSet, ReductionError> {
    if let Some((x, y)) = p.pairs().find(|(x, y)| x > y) {
        return Err(ReductionError::NotOmegaOrdered(x, y));
    }
    let free = successor_free_set(p);
    let n = p.len();
    let is_free = |j: usize| free.contains(&p.universe()[j]);
    let mut out = Vec::new();
    if n == 0 {
        return Ok(SolutionSet::antichain(out));
    }
    let first = (0..n).find(|&j| is_free(j) && p.le_at(0, j) && (opts.base_counts_itself || j != 0));
    let Some(mut cur) = first else {
        return Ok(SolutionSet::antichain(out));
    };
    out.push(p.universe()[cur]);
    // Universe positions are ascending, so `cur + 1` is the next element.
    while cur + 1 < n {
        let base = cur + 1;
        match (base..n).find(|&j| is_free(j) && p.le_at(base, j)) {
            Some(j) => {
                out.push(p.universe()[j]);
                cur = j;
            }
            None => break,
        }
    }
    Ok(SolutionSet::antichain(out))
}

fn require_stable(inst: &ProblemInstance) -> Result<&crate::StableAnnotation, ReductionError> {
    let ann = inst
        .annotation
        .as_ref()
        .ok_or_else(|| ReductionError::NotStable("missing annotation".into()))?;
    classify_stability(&inst.poset, ann).map_err(|e| ReductionError::NotStable(e.to_string()))?;
    Ok(ann)
}

/// Identity on small-type instances; dual order with `S` and `L` swapped
/// on large-type ones.
pub fn to_small_type(inst: &ProblemInstance) -> Result<ProblemInstance, ReductionError> {
    let ann = require_stable(inst)?;
    if ann.type_tag() == TypeTag::Small {
        return Ok(inst.clone());
    }
    Ok(ProblemInstance {
        poset: inst.poset.dual_order(),
        annotation: Some(ann.flipped()),
        type_flag: inst.type_flag.map(|_| TypeFlag::S),
    })
}

/// Attaches the type flag matching the annotation.
pub fn append_type_flag(inst: &ProblemInstance) -> Result<ProblemInstance, ReductionError> {
    let ann = require_stable(inst)?;
    Ok(ProblemInstance {
        type_flag: Some(TypeFlag::of(ann.type_tag())),
        ..inst.clone()
    })
}
