//! Finite partial orders over natural numbers.
//!
//! A [`FinitePoset`] stores the full (reflexive, transitive) relation as a
//! dense boolean matrix indexed by universe position. Validation rejects
//! malformed relations instead of closing them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Elements of a universe are plain naturals.
pub type Element = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum PosetError {
    #[error("universe is not strictly ascending at {0}")]
    UnsortedUniverse(Element),
    #[error("element {0} does not belong to the universe")]
    ForeignElement(Element),
    #[error("reflexivity fails at {0}")]
    ReflexivityViolation(Element),
    #[error("antisymmetry fails for ({0}, {1})")]
    AntisymmetryViolation(Element, Element),
    #[error("transitivity fails for {0} <= {1} <= {2}")]
    TransitivityViolation(Element, Element, Element),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinitePoset {
    universe: Vec<Element>,
    /// Row-major; `le[i * n + j]` iff `universe[i] <=_P universe[j]`.
    le: Vec<bool>,
}

impl fmt::Debug for FinitePoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strict: Vec<_> = self.pairs().filter(|(x, y)| x != y).collect();
        f.debug_struct("FinitePoset")
            .field("universe", &self.universe)
            .field("strict", &strict)
            .finish()
    }
}

fn check_universe(universe: &[Element]) -> Result<(), PosetError> {
    for w in universe.windows(2) {
        if w[0] >= w[1] {
            return Err(PosetError::UnsortedUniverse(w[1]));
        }
    }
    Ok(())
}

impl FinitePoset {
    /// Checks the three order axioms on `relation` exactly as given.
    ///
    /// Violations are reported for the least witness: the least `x` for
    /// reflexivity, the least pair `x < y` for antisymmetry and the
    /// lexicographically least triple for transitivity.
    pub fn validate<I>(universe: &[Element], relation: I) -> Result<Self, PosetError>
    where
        I: IntoIterator<Item = (Element, Element)>,
    {
        check_universe(universe)?;
        let n = universe.len();
        let mut le = vec![false; n * n];
        let mut foreign: Option<Element> = None;
        for (x, y) in relation {
            let (i, j) = match (position(universe, x), position(universe, y)) {
                (Some(i), Some(j)) => (i, j),
                (None, _) => {
                    foreign = Some(foreign.map_or(x, |f| f.min(x)));
                    continue;
                }
                (_, None) => {
                    foreign = Some(foreign.map_or(y, |f| f.min(y)));
                    continue;
                }
            };
            le[i * n + j] = true;
        }
        if let Some(x) = foreign {
            return Err(PosetError::ForeignElement(x));
        }
        let p = FinitePoset {
            universe: universe.to_vec(),
            le,
        };
        p.check_axioms()?;
        Ok(p)
    }

    /// Reflexive-transitive closure of `relation`, then validation.
    ///
    /// Antisymmetry can still fail if the input contains a cycle.
    pub fn closure_of<I>(universe: &[Element], relation: I) -> Result<Self, PosetError>
    where
        I: IntoIterator<Item = (Element, Element)>,
    {
        check_universe(universe)?;
        let n = universe.len();
        let mut le = vec![false; n * n];
        for i in 0..n {
            le[i * n + i] = true;
        }
        for (x, y) in relation {
            let i = position(universe, x).ok_or(PosetError::ForeignElement(x))?;
            let j = position(universe, y).ok_or(PosetError::ForeignElement(y))?;
            le[i * n + j] = true;
        }
        // Warshall
        for k in 0..n {
            for i in 0..n {
                if le[i * n + k] {
                    for j in 0..n {
                        if le[k * n + j] {
                            le[i * n + j] = true;
                        }
                    }
                }
            }
        }
        let p = FinitePoset {
            universe: universe.to_vec(),
            le,
        };
        p.check_axioms()?;
        Ok(p)
    }

    /// The discrete order (only reflexive pairs).
    pub fn discrete(universe: &[Element]) -> Result<Self, PosetError> {
        Self::closure_of(universe, std::iter::empty())
    }

    /// The natural-number order restricted to `universe`.
    pub fn natural_chain(universe: &[Element]) -> Result<Self, PosetError> {
        check_universe(universe)?;
        let n = universe.len();
        let le = (0..n * n).map(|k| k / n <= k % n).collect();
        Ok(FinitePoset {
            universe: universe.to_vec(),
            le,
        })
    }

    pub fn empty() -> Self {
        FinitePoset {
            universe: Vec::new(),
            le: Vec::new(),
        }
    }

    fn check_axioms(&self) -> Result<(), PosetError> {
        let n = self.len();
        for i in 0..n {
            if !self.le[i * n + i] {
                return Err(PosetError::ReflexivityViolation(self.universe[i]));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.le[i * n + j] && self.le[j * n + i] {
                    return Err(PosetError::AntisymmetryViolation(
                        self.universe[i],
                        self.universe[j],
                    ));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !self.le[i * n + j] {
                    continue;
                }
                for k in 0..n {
                    if self.le[j * n + k] && !self.le[i * n + k] {
                        return Err(PosetError::TransitivityViolation(
                            self.universe[i],
                            self.universe[j],
                            self.universe[k],
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds a poset from a matrix known to satisfy the axioms.
    pub(crate) fn from_matrix_unchecked(universe: Vec<Element>, le: Vec<bool>) -> Self {
        debug_assert_eq!(universe.len() * universe.len(), le.len());
        let p = FinitePoset { universe, le };
        debug_assert!(p.check_axioms().is_ok(), "{:?}", p.check_axioms());
        p
    }

    pub fn universe(&self) -> &[Element] {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    pub fn contains(&self, x: Element) -> bool {
        self.index_of(x).is_some()
    }

    pub fn index_of(&self, x: Element) -> Option<usize> {
        position(&self.universe, x)
    }

    /// `x <=_P y`. False when either element is outside the universe.
    pub fn le(&self, x: Element, y: Element) -> bool {
        match (self.index_of(x), self.index_of(y)) {
            (Some(i), Some(j)) => self.le[i * self.len() + j],
            _ => false,
        }
    }

    /// `x <=_P y` by universe positions.
    pub fn le_at(&self, i: usize, j: usize) -> bool {
        self.le[i * self.len() + j]
    }

    /// `x <_P y`.
    pub fn lt(&self, x: Element, y: Element) -> bool {
        x != y && self.le(x, y)
    }

    pub fn comparable(&self, x: Element, y: Element) -> bool {
        self.le(x, y) || self.le(y, x)
    }

    /// `x |_P y`.
    pub fn incomparable(&self, x: Element, y: Element) -> bool {
        !self.comparable(x, y)
    }

    /// All pairs of the relation in ascending lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (Element, Element)> + '_ {
        let n = self.len();
        (0..n * n)
            .filter(move |&k| self.le[k])
            .map(move |k| (self.universe[k / n], self.universe[k % n]))
    }

    /// Pairs `x <_P y` with nothing strictly between them.
    pub fn covering_pairs(&self) -> Vec<(Element, Element)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || !self.le_at(i, j) {
                    continue;
                }
                let between = (0..n).any(|k| k != i && k != j && self.le_at(i, k) && self.le_at(k, j));
                if !between {
                    out.push((self.universe[i], self.universe[j]));
                }
            }
        }
        out
    }

    fn check_subset<'a, I>(&self, xs: I) -> Result<Vec<usize>, PosetError>
    where
        I: IntoIterator<Item = &'a Element>,
    {
        xs.into_iter()
            .map(|&x| self.index_of(x).ok_or(PosetError::ForeignElement(x)))
            .collect()
    }

    /// True iff every pair in `xs` is comparable.
    pub fn is_chain(&self, xs: &BTreeSet<Element>) -> Result<bool, PosetError> {
        let idx = self.check_subset(xs)?;
        Ok(all_pairs(&idx, |i, j| self.le_at(i, j) || self.le_at(j, i)))
    }

    /// True iff every pair of distinct elements in `xs` is incomparable.
    pub fn is_antichain(&self, xs: &BTreeSet<Element>) -> Result<bool, PosetError> {
        let idx = self.check_subset(xs)?;
        Ok(all_pairs(&idx, |i, j| !self.le_at(i, j) && !self.le_at(j, i)))
    }

    /// True iff `x <=_P y` implies `x <= y`.
    pub fn is_omega_ordered(&self) -> bool {
        self.pairs().all(|(x, y)| x <= y)
    }

    /// The order with every comparability reversed.
    pub fn dual_order(&self) -> FinitePoset {
        let n = self.len();
        let le = (0..n * n).map(|k| self.le[(k % n) * n + k / n]).collect();
        FinitePoset::from_matrix_unchecked(self.universe.clone(), le)
    }

    /// The suborder on `xs`.
    pub fn restrict(&self, xs: &BTreeSet<Element>) -> Result<FinitePoset, PosetError> {
        let idx = self.check_subset(xs)?;
        let m = idx.len();
        let mut le = vec![false; m * m];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                le[a * m + b] = self.le_at(i, j);
            }
        }
        Ok(FinitePoset::from_matrix_unchecked(
            xs.iter().copied().collect(),
            le,
        ))
    }

    /// Builds a new poset on the same universe from a predicate over
    /// universe positions. The caller guarantees the predicate is an order.
    pub(crate) fn derive<F>(&self, f: F) -> FinitePoset
    where
        F: Fn(usize, usize) -> bool,
    {
        let n = self.len();
        let le = (0..n * n).map(|k| f(k / n, k % n)).collect();
        FinitePoset::from_matrix_unchecked(self.universe.clone(), le)
    }

    /// Graphviz rendering of the Hasse diagram.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph {name} {{\n  rankdir=BT;\n");
        for x in &self.universe {
            s.push_str(&format!("  n{x} [label=\"{x}\"];\n"));
        }
        for (x, y) in self.covering_pairs() {
            s.push_str(&format!("  n{x} -> n{y};\n"));
        }
        s.push_str("}\n");
        s
    }
}

fn position(universe: &[Element], x: Element) -> Option<usize> {
    universe.binary_search(&x).ok()
}

fn all_pairs<F: Fn(usize, usize) -> bool>(idx: &[usize], f: F) -> bool {
    idx.iter()
        .enumerate()
        .all(|(a, &i)| idx[a + 1..].iter().all(|&j| f(i, j)))
}

/// Limit behavior of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tag {
    /// Below everything past the stabilization point.
    S,
    /// Above everything past the stabilization point.
    L,
    /// Incomparable to everything past the stabilization point.
    I,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::S => "S",
            Tag::L => "L",
            Tag::I => "I",
        }
    }

    /// Swaps `S` and `L`, fixing `I`.
    pub fn flipped(self) -> Tag {
        match self {
            Tag::S => Tag::L,
            Tag::L => Tag::S,
            Tag::I => Tag::I,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeTag {
    Small,
    Large,
}

impl TypeTag {
    /// The tag an element of this type may carry besides `I`.
    pub fn side_tag(self) -> Tag {
        match self {
            TypeTag::Small => Tag::S,
            TypeTag::Large => Tag::L,
        }
    }

    pub fn flipped(self) -> TypeTag {
        match self {
            TypeTag::Small => TypeTag::Large,
            TypeTag::Large => TypeTag::Small,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Behavior {
    pub tag: Tag,
    /// Stabilization point.
    pub t: u32,
}

impl Behavior {
    pub fn new(tag: Tag, t: u32) -> Self {
        Behavior { tag, t }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum StabilityError {
    #[error("no behavior annotated for element {0}")]
    AnnotationIncomplete(Element),
    #[error("annotated element {0} is not in the universe")]
    ForeignElement(Element),
    #[error("element {0} carries a tag forbidden by the type tag")]
    TypeTagConflict(Element),
    #[error("behavior of {0} is violated by {1}")]
    BehaviorViolation(Element, Element),
}

/// Per-element limit behavior with stabilization points, plus a type tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StableAnnotation {
    behaviors: BTreeMap<Element, Behavior>,
    type_tag: TypeTag,
}

impl StableAnnotation {
    pub fn new(
        behaviors: BTreeMap<Element, Behavior>,
        type_tag: TypeTag,
    ) -> Result<Self, StabilityError> {
        let forbidden = type_tag.flipped().side_tag();
        if let Some((&x, _)) = behaviors.iter().find(|(_, b)| b.tag == forbidden) {
            return Err(StabilityError::TypeTagConflict(x));
        }
        Ok(StableAnnotation {
            behaviors,
            type_tag,
        })
    }

    pub fn behaviors(&self) -> &BTreeMap<Element, Behavior> {
        &self.behaviors
    }

    pub fn get(&self, x: Element) -> Option<Behavior> {
        self.behaviors.get(&x).copied()
    }

    pub fn type_tag(&self) -> TypeTag {
        self.type_tag
    }

    pub fn has_tag(&self, tag: Tag) -> bool {
        self.behaviors.values().any(|b| b.tag == tag)
    }

    /// `L` and `S` swapped, type flipped, `I` and stabilization points kept.
    pub fn flipped(&self) -> StableAnnotation {
        StableAnnotation {
            behaviors: self
                .behaviors
                .iter()
                .map(|(&x, b)| (x, Behavior::new(b.tag.flipped(), b.t)))
                .collect(),
            type_tag: self.type_tag.flipped(),
        }
    }
}

/// Checks that every element behaves as annotated from its stabilization
/// point on.
///
/// `S` requires `x <=_P y` and `L` requires `y <=_P x` for every universe
/// element `y >= t`. `I` requires `x |_P y` for every such `y` other than
/// `x` itself. The least violating pair `(x, y)` is reported.
pub fn classify_stability(p: &FinitePoset, ann: &StableAnnotation) -> Result<(), StabilityError> {
    if let Some(&x) = ann.behaviors.keys().find(|&&x| !p.contains(x)) {
        return Err(StabilityError::ForeignElement(x));
    }
    if let Some(&x) = p.universe().iter().find(|&&x| !ann.behaviors.contains_key(&x)) {
        return Err(StabilityError::AnnotationIncomplete(x));
    }
    let forbidden = ann.type_tag.flipped().side_tag();
    for (i, &x) in p.universe().iter().enumerate() {
        let b = ann.behaviors[&x];
        if b.tag == forbidden {
            return Err(StabilityError::TypeTagConflict(x));
        }
        for (j, &y) in p.universe().iter().enumerate() {
            if y < b.t {
                continue;
            }
            let ok = match b.tag {
                Tag::S => p.le_at(i, j),
                Tag::L => p.le_at(j, i),
                Tag::I => i == j || (!p.le_at(i, j) && !p.le_at(j, i)),
            };
            if !ok {
                return Err(StabilityError::BehaviorViolation(x, y));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    Chain,
    Antichain,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SolutionSet {
    pub kind: SolutionKind,
    pub elements: BTreeSet<Element>,
}

impl SolutionSet {
    pub fn new<I: IntoIterator<Item = Element>>(kind: SolutionKind, elements: I) -> Self {
        SolutionSet {
            kind,
            elements: elements.into_iter().collect(),
        }
    }

    pub fn chain<I: IntoIterator<Item = Element>>(elements: I) -> Self {
        Self::new(SolutionKind::Chain, elements)
    }

    pub fn antichain<I: IntoIterator<Item = Element>>(elements: I) -> Self {
        Self::new(SolutionKind::Antichain, elements)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}
