//! The forcing notion of stable-poset conditions.
//!
//! A condition is a finite partial order on an initial segment `{0, ..., n-1}`
//! together with a total assignment `x ↦ (tag, t)` with `t <= n`, subject to
//! the homogeneity rule and the S, L, side and I bullets. This module
//! validates conditions, compares them, applies the mind-change transform,
//! enumerates extensions, and runs the bounded diagonal construction.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::{random_poset, random_small_annotation};
use crate::machines::OracleMachine;
use crate::par;
use crate::poset::{Behavior, Element, FinitePoset, StableAnnotation, Tag, TypeTag};

/// How the I-bullet treats `y = x`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IReading {
    /// Comparable `y` ranges over `y != x`.
    #[default]
    ExcludeSelf,
    /// `y = x` counts as comparable, forcing `t > x`.
    IncludeSelf,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ConditionError {
    #[error("universe is not an initial segment of the naturals")]
    NotInitialSegment,
    #[error("assignment covers {got} elements, expected {expected}")]
    IncompleteAssignment { expected: usize, got: usize },
    #[error("stabilization point {t} of {x} exceeds the size")]
    StabilizationOutOfRange { x: Element, t: u32 },
    #[error("homogeneity: {s} is tagged S and {l} is tagged L")]
    Homogeneity { s: Element, l: Element },
    #[error("S-bullet fails at x={x}, y={y}")]
    SBullet { x: Element, y: Element },
    #[error("L-bullet fails at x={x}, y={y}")]
    LBullet { x: Element, y: Element },
    #[error("side-bullet fails at x={x}, y={y}")]
    SideBullet { x: Element, y: Element },
    #[error("I-bullet fails at x={x}, y={y}")]
    IBullet { x: Element, y: Element },
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ForcingError {
    #[error("condition has an L tag at {0}")]
    WrongSide(Element),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Condition {
    pi: FinitePoset,
    assign: Vec<Behavior>,
}

pub fn validate_condition(pi: FinitePoset, assign: Vec<Behavior>) -> Result<Condition, ConditionError> {
    validate_condition_with(pi, assign, IReading::default())
}

pub fn validate_condition_with(
    pi: FinitePoset,
    assign: Vec<Behavior>,
    reading: IReading,
) -> Result<Condition, ConditionError> {
    check_bullets(&pi, &assign, reading)?;
    Ok(Condition { pi, assign })
}

fn check_bullets(pi: &FinitePoset, assign: &[Behavior], reading: IReading) -> Result<(), ConditionError> {
    let n = pi.len();
    if pi.universe().iter().enumerate().any(|(i, &x)| x as usize != i) {
        return Err(ConditionError::NotInitialSegment);
    }
    if assign.len() != n {
        return Err(ConditionError::IncompleteAssignment {
            expected: n,
            got: assign.len(),
        });
    }
    for (x, b) in assign.iter().enumerate() {
        if b.t as usize > n {
            return Err(ConditionError::StabilizationOutOfRange { x: x as Element, t: b.t });
        }
    }
    let first = |tag| assign.iter().position(|b| b.tag == tag);
    if let (Some(s), Some(l)) = (first(Tag::S), first(Tag::L)) {
        return Err(ConditionError::Homogeneity {
            s: s as Element,
            l: l as Element,
        });
    }
    let le = |x: usize, y: usize| pi.le_at(x, y);
    let e = |x: usize, y: usize| (x as Element, y as Element);
    for x in 0..n {
        let b = assign[x];
        for y in 0..n {
            let bad = match b.tag {
                Tag::S => le(y, x) && (y as u32 >= b.t || assign[y].tag != Tag::S),
                _ => false,
            };
            if bad {
                let (x, y) = e(x, y);
                return Err(ConditionError::SBullet { x, y });
            }
        }
    }
    for x in 0..n {
        let b = assign[x];
        for y in 0..n {
            if b.tag == Tag::L && le(x, y) && (y as u32 >= b.t || assign[y].tag != Tag::L) {
                let (x, y) = e(x, y);
                return Err(ConditionError::LBullet { x, y });
            }
        }
    }
    for x in 0..n {
        let b = assign[x];
        for y in 0..n {
            if b.tag != Tag::I && !le(x, y) && !le(y, x) && y as u32 >= b.t {
                let (x, y) = e(x, y);
                return Err(ConditionError::SideBullet { x, y });
            }
        }
    }
    for x in 0..n {
        let b = assign[x];
        for y in 0..n {
            let counts = y != x || reading == IReading::IncludeSelf;
            if b.tag == Tag::I && counts && (le(x, y) || le(y, x)) && y as u32 >= b.t {
                let (x, y) = e(x, y);
                return Err(ConditionError::IBullet { x, y });
            }
        }
    }
    Ok(())
}

impl Condition {
    pub fn empty() -> Condition {
        Condition {
            pi: FinitePoset::empty(),
            assign: Vec::new(),
        }
    }

    pub fn pi(&self) -> &FinitePoset {
        &self.pi
    }

    /// The valuation of a condition is its order part.
    pub fn valuation(&self) -> &FinitePoset {
        &self.pi
    }

    pub fn assign(&self) -> &[Behavior] {
        &self.assign
    }

    pub fn size(&self) -> usize {
        self.pi.len()
    }

    /// `Small` if some tag is S, `Large` if some tag is L, else `None`.
    pub fn side(&self) -> Option<TypeTag> {
        self.assign.iter().find_map(|b| match b.tag {
            Tag::S => Some(TypeTag::Small),
            Tag::L => Some(TypeTag::Large),
            Tag::I => None,
        })
    }

    pub fn annotation(&self, default_side: TypeTag) -> StableAnnotation {
        let behaviors = self
            .assign
            .iter()
            .enumerate()
            .map(|(x, &b)| (x as Element, b))
            .collect();
        StableAnnotation::new(behaviors, self.side().unwrap_or(default_side))
            .expect("valid conditions are homogeneous")
    }
}

/// `q` extends `p`: the order agrees on `p`'s elements and the assignment
/// is unchanged there.
pub fn extends(q: &Condition, p: &Condition) -> bool {
    let n = p.size();
    q.size() >= n
        && (0..n).all(|i| (0..n).all(|j| q.pi.le_at(i, j) == p.pi.le_at(i, j)))
        && q.assign[..n] == p.assign[..]
}

pub fn is_parallel(p: &Condition, q: &Condition) -> bool {
    p.pi == q.pi
}

/// `(S,t) ↦ (I,|π|)` and `(I,t) ↦ (L,|π|)`.
pub fn mind_change(p: &Condition) -> Result<Condition, ForcingError> {
    let n = p.size() as u32;
    let assign = p
        .assign
        .iter()
        .enumerate()
        .map(|(x, b)| match b.tag {
            Tag::S => Ok(Behavior::new(Tag::I, n)),
            Tag::I => Ok(Behavior::new(Tag::L, n)),
            Tag::L => Err(ForcingError::WrongSide(x as Element)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Condition {
        pi: p.pi.clone(),
        assign,
    })
}

/// A random valid condition of the given size and side.
pub fn random_condition<R: Rng>(rng: &mut R, size: u32, side: TypeTag) -> Condition {
    let density = rng.gen_range(0.05..0.6);
    let base = random_poset(rng, size, density);
    let ann = random_small_annotation(rng, &base);
    let (pi, ann) = match side {
        TypeTag::Small => (base, ann),
        TypeTag::Large => (base.dual_order(), ann.flipped()),
    };
    let assign = ann.behaviors().values().copied().collect();
    validate_condition(pi, assign).expect("sampled assignments satisfy the bullets")
}

/// Relation matrix grown one element at a time.
#[derive(Clone)]
struct Grow {
    n: usize,
    le: Vec<bool>,
}

impl Grow {
    fn le(&self, i: usize, j: usize) -> bool {
        self.le[i * self.n + j]
    }

    fn poset(&self) -> FinitePoset {
        let universe: Vec<Element> = (0..self.n as Element).collect();
        FinitePoset::validate(
            &universe,
            (0..self.n).flat_map(|i| {
                (0..self.n)
                    .filter(move |&j| self.le(i, j))
                    .map(move |j| (i as Element, j as Element))
            }),
        )
        .expect("grown relations are partial orders")
    }
}

/// Visits, in canonical order, every partial order on `0..target` that
/// extends `p`'s order and keeps `p`'s assignment valid. Each new element
/// lies above every old side-tagged element (below, for the large side)
/// and is incomparable with every old isolated element; among new elements
/// the down-set and up-set are chosen freely, in ascending mask order.
pub fn visit_extension_orders(
    p: &Condition,
    target: usize,
    side: TypeTag,
    f: &mut dyn FnMut(&FinitePoset) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let b = p.size();
    if target < b || p.side().is_some_and(|s| s != side) {
        return ControlFlow::Continue(());
    }
    let mut g = Grow {
        n: target,
        le: vec![false; target * target],
    };
    for i in 0..target {
        g.le[i * target + i] = true;
    }
    for i in 0..b {
        for j in 0..b {
            g.le[i * target + j] = p.pi.le_at(i, j);
        }
    }
    let tagged: Vec<usize> = (0..b).filter(|&x| p.assign[x].tag != Tag::I).collect();
    grow(&mut g, b, b, &tagged, side, f)
}

fn grow(
    g: &mut Grow,
    b: usize,
    v: usize,
    tagged: &[usize],
    side: TypeTag,
    f: &mut dyn FnMut(&FinitePoset) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if v == g.n {
        return f(&g.poset());
    }
    let k = v - b;
    let new = |m: u32| (0..k).filter(move |i| m >> i & 1 == 1).map(move |i| b + i);
    // Down- and up-sets among the old elements are forced.
    let (old_down, old_up): (&[usize], &[usize]) = match side {
        TypeTag::Small => (tagged, &[]),
        TypeTag::Large => (&[], tagged),
    };
    for dm in 0u32..1 << k {
        let down: Vec<usize> = old_down.iter().copied().chain(new(dm)).collect();
        // Down-closed among the elements placed so far.
        let closed = down
            .iter()
            .all(|&d| (0..v).all(|y| !g.le(y, d) || down.contains(&y)));
        if !closed {
            continue;
        }
        for um in 0u32..1 << k {
            if um & dm != 0 {
                continue;
            }
            let up: Vec<usize> = old_up.iter().copied().chain(new(um)).collect();
            let ok = up
                .iter()
                .all(|&u| (0..v).all(|y| !g.le(u, y) || up.contains(&y)))
                && down.iter().all(|&d| up.iter().all(|&u| g.le(d, u)));
            if !ok {
                continue;
            }
            let n = g.n;
            for &d in &down {
                g.le[d * n + v] = true;
            }
            for &u in &up {
                g.le[v * n + u] = true;
            }
            let flow = grow(g, b, v + 1, tagged, side, f);
            for &d in &down {
                g.le[d * n + v] = false;
            }
            for &u in &up {
                g.le[v * n + u] = false;
            }
            flow?;
        }
    }
    ControlFlow::Continue(())
}

/// Least admissible stabilization point for `tag` at `x`.
fn least_t(pi: &FinitePoset, x: usize, tag: Tag, reading: IReading) -> u32 {
    (0..pi.len())
        .filter(|&y| match tag {
            Tag::S => pi.le_at(y, x) || !pi.comparable(x as Element, y as Element),
            Tag::L => pi.le_at(x, y) || !pi.comparable(x as Element, y as Element),
            Tag::I => (y != x || reading == IReading::IncludeSelf) && pi.comparable(x as Element, y as Element),
        })
        .map(|y| y as u32 + 1)
        .max()
        .unwrap_or(0)
}

/// Tag vectors for the new elements, side tag before I, in lexicographic
/// order; keeps those satisfying the tag half of the S/L bullets.
fn tag_vectors(pi: &FinitePoset, p: &Condition, side: TypeTag) -> Vec<Vec<Tag>> {
    let b = p.size();
    let k = pi.len() - b;
    let st = side.side_tag();
    let mut out = Vec::new();
    for code in 0u32..1 << k {
        // Bit set means I; the side tag sorts first.
        let tags: Vec<Tag> = p
            .assign
            .iter()
            .map(|a| a.tag)
            .chain((0..k).rev().map(|i| if code >> i & 1 == 1 { Tag::I } else { st }))
            .collect();
        let closed = (0..pi.len()).all(|x| {
            tags[x] != st
                || (0..pi.len()).all(|y| {
                    let related = match side {
                        TypeTag::Small => pi.le_at(y, x),
                        TypeTag::Large => pi.le_at(x, y),
                    };
                    !related || tags[y] == st
                })
        });
        if closed {
            out.push(tags[b..].to_vec());
        }
    }
    out
}

fn conditions_on_order(p: &Condition, pi: &FinitePoset, side: TypeTag) -> Vec<Condition> {
    let b = p.size();
    let n = pi.len() as u32;
    let mut out = Vec::new();
    for tags in tag_vectors(pi, p, side) {
        let lows: Vec<u32> = tags
            .iter()
            .enumerate()
            .map(|(i, &t)| least_t(pi, b + i, t, IReading::default()))
            .collect();
        // Odometer over t in lows[i]..=n.
        let mut ts = lows.clone();
        loop {
            let assign: Vec<Behavior> = p
                .assign
                .iter()
                .copied()
                .chain(tags.iter().zip(&ts).map(|(&g, &t)| Behavior::new(g, t)))
                .collect();
            out.push(validate_condition(pi.clone(), assign).expect("points at or above the least"));
            let Some(i) = (0..ts.len()).rev().find(|&i| ts[i] < n) else {
                break;
            };
            ts[i] += 1;
            ts[i + 1..].copy_from_slice(&lows[i + 1..]);
        }
    }
    out
}


/// Every valid condition extending `p` with `target` elements whose tags lie
/// on `side`, in canonical order: orders as visited by
/// [`visit_extension_orders`], then tag vectors, then stabilization points
/// in odometer order.
pub fn enumerate_extensions(p: &Condition, target: usize, side: TypeTag) -> Vec<Condition> {
    let mut orders = Vec::new();
    let _ = visit_extension_orders(p, target, side, &mut |pi| {
        orders.push(pi.clone());
        ControlFlow::Continue(())
    });
    par::map(&orders, |pi| conditions_on_order(p, pi, side))
        .into_iter()
        .flatten()
        .collect()
}

/// A machine paired with a fixed oracle: selects `x` when it outputs 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    pub machine: OracleMachine,
    pub oracle: BTreeSet<u64>,
}

impl Selector {
    pub fn new(machine: OracleMachine, oracle: impl IntoIterator<Item = u64>) -> Self {
        Selector {
            machine,
            oracle: oracle.into_iter().collect(),
        }
    }

    pub fn selects(&self, x: Element) -> bool {
        self.machine.evaluate(&self.oracle, x as u64).is_one()
    }

    pub fn label(&self) -> String {
        format!("{}^{:?}", self.machine.name(), self.oracle)
    }
}

/// Least `(x, y, z)` of selected elements with `x | y` and `y < z`.
pub fn requirement_witness(pi: &FinitePoset, sel: &dyn Fn(Element) -> bool) -> Option<(Element, Element, Element)> {
    let picked: Vec<Element> = pi.universe().iter().copied().filter(|&x| sel(x)).collect();
    for &x in &picked {
        for &y in &picked {
            if !pi.incomparable(x, y) {
                continue;
            }
            for &z in &picked {
                if pi.lt(y, z) {
                    return Some((x, y, z));
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalConfig {
    pub stages: usize,
    pub side: TypeTag,
    /// Orders examined per stage before giving up.
    pub budget: usize,
}

impl Default for DiagonalConfig {
    fn default() -> Self {
        DiagonalConfig {
            stages: 12,
            side: TypeTag::Small,
            budget: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum StageOutcome {
    Satisfied { witness: (Element, Element, Element) },
    Extended { witness: (Element, Element, Element), size: usize },
    /// Fewer than three elements below the target size are selected.
    Hopeless { selected: usize },
    NotFound { orders: usize },
    BudgetExhausted { orders: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageLog {
    pub stage: usize,
    pub requirement: usize,
    pub visit: usize,
    pub size_before: usize,
    pub target_size: usize,
    #[serde(flatten)]
    pub outcome: StageOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalRun {
    pub condition: Condition,
    pub poset: FinitePoset,
    pub annotation: StableAnnotation,
    pub log: Vec<StageLog>,
}

/// Round-robin diagonal construction: stage `k` serves requirement
/// `e = k mod |selectors|` on its visit `m = k / |selectors| + 1`.
pub fn build_diagonal_poset(p0: &Condition, selectors: &[Selector], config: &DiagonalConfig) -> DiagonalRun {
    let mut p = p0.clone();
    let mut log = Vec::new();
    if !selectors.is_empty() {
        for stage in 0..config.stages {
            let e = stage % selectors.len();
            let m = stage / selectors.len() + 1;
            let sel = &selectors[e];
            let target = p.size() + m;
            let outcome = diagonal_stage(&mut p, sel, target, config);
            log.push(StageLog {
                stage,
                requirement: e,
                visit: m,
                size_before: target - m,
                target_size: target,
                outcome,
            });
        }
    }
    DiagonalRun {
        poset: p.pi.clone(),
        annotation: p.annotation(config.side),
        condition: p,
        log,
    }
}

fn diagonal_stage(p: &mut Condition, sel: &Selector, target: usize, config: &DiagonalConfig) -> StageOutcome {
    let selects = |x: Element| sel.selects(x);
    if let Some(witness) = requirement_witness(&p.pi, &selects) {
        return StageOutcome::Satisfied { witness };
    }
    let selected = (0..target as Element).filter(|&x| selects(x)).count();
    let selected_new = (p.size() as Element..target as Element).filter(|&x| selects(x)).count();
    if selected < 3 || selected_new == 0 {
        return StageOutcome::Hopeless { selected };
    }
    let mut orders = 0;
    let mut found = None;
    let flow = visit_extension_orders(p, target, config.side, &mut |pi| {
        orders += 1;
        if let Some(w) = requirement_witness(pi, &selects) {
            found = Some((pi.clone(), w));
            return ControlFlow::Break(());
        }
        if orders >= config.budget {
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    match (found, flow) {
        (Some((pi, witness)), _) => {
            *p = least_condition_on(p, &pi, config.side);
            StageOutcome::Extended {
                witness,
                size: pi.len(),
            }
        }
        (None, ControlFlow::Break(())) => StageOutcome::BudgetExhausted { orders },
        (None, ControlFlow::Continue(())) => StageOutcome::NotFound { orders },
    }
}

/// First tag vector on `pi` with least stabilization points. Later
/// elements sit at or beyond `|π|`, so larger points never help a later
/// extension.
fn least_condition_on(p: &Condition, pi: &FinitePoset, side: TypeTag) -> Condition {
    let b = p.size();
    let tags = tag_vectors(pi, p, side)
        .into_iter()
        .next()
        .expect("the all-I vector is always admissible");
    let assign = p
        .assign
        .iter()
        .copied()
        .chain(
            tags.iter()
                .enumerate()
                .map(|(i, &g)| Behavior::new(g, least_t(pi, b + i, g, IReading::default()))),
        )
        .collect();
    validate_condition(pi.clone(), assign).expect("least points satisfy the bullets")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementCheck {
    pub requirement: usize,
    pub selected: usize,
    pub witness: Option<(Element, Element, Element)>,
}

impl RequirementCheck {
    /// Met, or vacuous because fewer than three elements are selected.
    pub fn holds(&self) -> bool {
        self.selected < 3 || self.witness.is_some()
    }
}

/// The requirement predicate for every selector on a final poset.
pub fn check_requirements(poset: &FinitePoset, selectors: &[Selector]) -> Vec<RequirementCheck> {
    selectors
        .iter()
        .enumerate()
        .map(|(requirement, s)| {
            let sel = |x: Element| s.selects(x);
            RequirementCheck {
                requirement,
                selected: poset.universe().iter().filter(|&&x| sel(x)).count(),
                witness: requirement_witness(poset, &sel),
            }
        })
        .collect()
}

/// Outcome of Lachlan's disjunction on a finite family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LachlanChoice<K> {
    C,
    A,
    /// A pair violating the hypothesis.
    Counterexample(K, K),
    /// One machine was reported with two different values.
    Inconsistent(K),
}

/// `((c, a), (C-outcome, A-outcome))` for one pair of machines.
pub type PairOutcome<K> = ((K, K), (bool, bool));

/// Given `(Ψ₀, Ψ₁) ↦ (P(Ψ₀^C), P(Ψ₁^A))`, decides which side succeeds for
/// every machine. The hypothesis is checked on the full product of the
/// machines named, with values read off the given pairs.
pub fn lachlan_select<K: Ord + Clone>(outcomes: &[PairOutcome<K>]) -> LachlanChoice<K> {
    use std::collections::BTreeMap;
    let mut on_c: BTreeMap<K, bool> = BTreeMap::new();
    let mut on_a: BTreeMap<K, bool> = BTreeMap::new();
    for ((k0, k1), (c, a)) in outcomes {
        if *on_c.entry(k0.clone()).or_insert(*c) != *c {
            return LachlanChoice::Inconsistent(k0.clone());
        }
        if *on_a.entry(k1.clone()).or_insert(*a) != *a {
            return LachlanChoice::Inconsistent(k1.clone());
        }
    }
    for (k0, &c) in &on_c {
        for (k1, &a) in &on_a {
            if !c && !a {
                return LachlanChoice::Counterexample(k0.clone(), k1.clone());
            }
        }
    }
    if on_c.values().all(|&c| c) {
        LachlanChoice::C
    } else {
        debug_assert!(on_a.values().all(|&a| a));
        LachlanChoice::A
    }
}
