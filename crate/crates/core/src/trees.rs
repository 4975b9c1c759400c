//! Extension trees `T(E, I, Δ, n)`, labelings, and labeled subtrees.
//!
//! A node is a strictly increasing sequence over `I`. The empty sequence is
//! always present; a nonempty `α` is present when no `F ⊆ range(α#)` and no
//! `w` in `[n, w_max)` give `Δ^{E ∪ F}(w) = 1`. A node is terminal when such a
//! witness exists for `F ⊆ range(α)`; terminal nodes have no children.
//! "Infinitely many" in the labeling rules is read as "at least κ".

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machines::OracleMachine;
use crate::par;

pub type Alpha = Vec<u64>;

/// Widest `I` accepted; witnesses are tabulated per subset of `I`.
pub const MAX_WIDTH: usize = 16;
pub const DEFAULT_KAPPA: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum TreeError {
    #[error("|I| = {0} exceeds the supported width {MAX_WIDTH}")]
    TooWide(usize),
    #[error("kappa must be positive")]
    ZeroKappa,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub e: BTreeSet<u64>,
    pub i: BTreeSet<u64>,
    pub n: u64,
    pub w_max: u64,
}

/// A witness `(F, w)`: `Δ^{E ∪ F}(w) = 1` with `w >= n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Witness {
    pub f: BTreeSet<u64>,
    pub w: u64,
}

impl Witness {
    /// Least `w` first, then smaller `F`, then lexicographically least.
    fn key(&self) -> (u64, usize, Vec<u64>) {
        (self.w, self.f.len(), self.f.iter().copied().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionTree {
    params: TreeParams,
    delta: OracleMachine,
    /// Node to its least witness, if terminal.
    nodes: BTreeMap<Alpha, Option<Witness>>,
}

fn oracle(e: &BTreeSet<u64>, f: &BTreeSet<u64>) -> BTreeSet<u64> {
    e.union(f).copied().collect()
}

/// Least witness with `F ⊆ s`, searching directly.
fn least_witness(params: &TreeParams, delta: &OracleMachine, s: &[u64]) -> Option<Witness> {
    let k = s.len();
    let mut best: Option<Witness> = None;
    for mask in 0u32..1 << k {
        let f: BTreeSet<u64> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| s[b]).collect();
        let o = oracle(&params.e, &f);
        if let Some(w) = (params.n..params.w_max).find(|&w| delta.evaluate(&o, w).is_one()) {
            let cand = Witness { f, w };
            if best.as_ref().is_none_or(|b| cand.key() < b.key()) {
                best = Some(cand);
            }
        }
    }
    best
}

pub fn build_extension_tree(
    e: BTreeSet<u64>,
    i: BTreeSet<u64>,
    delta: OracleMachine,
    n: u64,
    w_max: u64,
) -> Result<ExtensionTree, TreeError> {
    if i.len() > MAX_WIDTH {
        return Err(TreeError::TooWide(i.len()));
    }
    let params = TreeParams { e, i, n, w_max };
    let items: Vec<u64> = params.i.iter().copied().collect();
    let k = items.len();
    // Least witness whose F is exactly each subset, then closed downward.
    let own: Vec<Option<Witness>> = par::map_range(1 << k, |mask| {
        let f: BTreeSet<u64> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| items[b]).collect();
        let o = oracle(&params.e, &f);
        (params.n..params.w_max)
            .find(|&w| delta.evaluate(&o, w).is_one())
            .map(|w| Witness { f, w })
    });
    let mut best = own;
    for mask in 0..1usize << k {
        for b in 0..k {
            if mask >> b & 1 == 1 {
                let sub = best[mask & !(1 << b)].clone();
                if let Some(s) = sub {
                    if best[mask].as_ref().is_none_or(|c| s.key() < c.key()) {
                        best[mask] = Some(s);
                    }
                }
            }
        }
    }
    let mut nodes = BTreeMap::new();
    let mut stack = vec![(Vec::new(), 0usize, 0usize)];
    while let Some((alpha, mask, next)) = stack.pop() {
        let witness = best[mask].clone();
        let terminal = witness.is_some();
        nodes.insert(alpha.clone(), witness);
        if !terminal {
            for b in next..k {
                let mut child = alpha.clone();
                child.push(items[b]);
                stack.push((child, mask | 1 << b, b + 1));
            }
        }
    }
    Ok(ExtensionTree { params, delta, nodes })
}

impl ExtensionTree {
    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn delta(&self) -> &OracleMachine {
        &self.delta
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, alpha: &[u64]) -> bool {
        self.nodes.contains_key(alpha)
    }

    /// Nodes in lexicographic (depth-first) order.
    pub fn nodes(&self) -> impl Iterator<Item = &Alpha> {
        self.nodes.keys()
    }

    pub fn is_terminal(&self, alpha: &[u64]) -> bool {
        matches!(self.nodes.get(alpha), Some(Some(_)))
    }

    pub fn witness(&self, alpha: &[u64]) -> Option<&Witness> {
        self.nodes.get(alpha).and_then(Option::as_ref)
    }

    /// `{x : α*x ∈ T}`, ascending.
    pub fn row_below(&self, alpha: &[u64]) -> Vec<u64> {
        self.children(alpha).map(|c| *c.last().expect("child")).collect()
    }

    fn children<'a>(&'a self, alpha: &'a [u64]) -> impl Iterator<Item = &'a Alpha> + 'a {
        let lo = alpha.last().map_or(0, |&m| m + 1);
        self.params.i.range(lo..).filter_map(move |&x| {
            let mut c = alpha.to_vec();
            c.push(x);
            self.nodes.get_key_value(&c).map(|(k, _)| k)
        })
    }

    /// Every witness `(F, w)` of `α`, least first.
    pub fn witnesses(&self, alpha: &[u64]) -> Vec<Witness> {
        let k = alpha.len();
        let mut out = Vec::new();
        for mask in 0u32..1 << k {
            let f: BTreeSet<u64> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| alpha[b]).collect();
            let o = oracle(&self.params.e, &f);
            for w in self.params.n..self.params.w_max {
                if self.delta.evaluate(&o, w).is_one() {
                    out.push(Witness { f: f.clone(), w });
                }
            }
        }
        out.sort_by_key(Witness::key);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Finite(u64),
    Infinity,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Finite(w) => write!(f, "{w}"),
            Label::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    pub kappa: usize,
    pub labels: BTreeMap<Alpha, Label>,
}

impl Labeling {
    pub fn get(&self, alpha: &[u64]) -> Label {
        self.labels[alpha]
    }
}

fn internal_label(kappa: usize, child_labels: impl Iterator<Item = Label>) -> Label {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for l in child_labels {
        if let Label::Finite(w) = l {
            *counts.entry(w).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .find(|&(_, c)| c >= kappa)
        .map_or(Label::Infinity, |(w, _)| Label::Finite(w))
}

pub fn label_tree(t: &ExtensionTree, kappa: usize) -> Result<Labeling, TreeError> {
    if kappa == 0 {
        return Err(TreeError::ZeroKappa);
    }
    let mut labels = BTreeMap::new();
    // Reverse lexicographic order visits children before parents.
    for (alpha, witness) in t.nodes.iter().rev() {
        let l = match witness {
            Some(wit) => Label::Finite(wit.w),
            None => internal_label(kappa, t.children(alpha).map(|c| labels[c])),
        };
        labels.insert(alpha.clone(), l);
    }
    Ok(Labeling { kappa, labels })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSubtree {
    pub nodes: BTreeSet<Alpha>,
}

pub fn labeled_subtree(t: &ExtensionTree, lb: &Labeling) -> LabeledSubtree {
    let mut nodes = BTreeSet::new();
    let mut stack = vec![Vec::new()];
    while let Some(alpha) = stack.pop() {
        let children: Vec<&Alpha> = t.children(&alpha).collect();
        let placed: Vec<&Alpha> = match lb.get(&alpha) {
            Label::Finite(w) => children
                .into_iter()
                .filter(|c| lb.get(c) == Label::Finite(w))
                .collect(),
            Label::Infinity => {
                let inf: Vec<&Alpha> = children
                    .iter()
                    .copied()
                    .filter(|c| lb.get(c) == Label::Infinity)
                    .collect();
                if inf.len() >= lb.kappa {
                    inf
                } else {
                    let mut seen = BTreeSet::new();
                    children
                        .into_iter()
                        .filter(|c| matches!(lb.get(c), Label::Finite(w) if seen.insert(w)))
                        .collect()
                }
            }
        };
        stack.extend(placed.into_iter().cloned());
        nodes.insert(alpha);
    }
    LabeledSubtree { nodes }
}

/// Checks that `lb` restricted to `nodes` obeys the labeling rules there.
pub fn is_labeling_on(t: &ExtensionTree, nodes: &BTreeSet<Alpha>, lb: &Labeling) -> bool {
    nodes.iter().all(|alpha| {
        let expect = match t.witness(alpha) {
            Some(w) => Label::Finite(w.w),
            None => internal_label(
                lb.kappa,
                t.children(alpha).filter(|c| nodes.contains(*c)).map(|c| lb.get(c)),
            ),
        };
        lb.get(alpha) == expect
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "kebab-case")]
pub enum ItemStatus {
    Pass,
    Fail(String),
    NotApplicable(String),
}

impl ItemStatus {
    pub fn ok(&self) -> bool {
        !matches!(self, ItemStatus::Fail(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub item1: ItemStatus,
    /// Maximal nodes without a witness are labeled infinity.
    pub item1_surrogate: ItemStatus,
    pub item2: ItemStatus,
    pub item3: ItemStatus,
    pub item4: ItemStatus,
}

impl LemmaReport {
    pub fn all_ok(&self) -> bool {
        [&self.item1_surrogate, &self.item2, &self.item3, &self.item4]
            .iter()
            .all(|s| s.ok())
    }
}

/// Every `F ⊆ s` and `w` in range give `≃ 0`, by direct evaluation.
fn quiet(t: &ExtensionTree, s: &[u64]) -> bool {
    let p = &t.params;
    (0u32..1 << s.len()).all(|mask| {
        let f: BTreeSet<u64> = (0..s.len()).filter(|b| mask >> b & 1 == 1).map(|b| s[b]).collect();
        let o = oracle(&p.e, &f);
        (p.n..p.w_max).all(|w| t.delta.evaluate(&o, w).is_zero_or_diverge())
    })
}

/// Brute-force check of the tree lemma, items 2-4, with item 1 replaced by
/// its finite surrogate. A leaf with some `x ∈ I` above its range must be
/// terminal; a leaf with none is terminal exactly when it has a witness.
pub fn check_tree_lemma(t: &ExtensionTree, lb: &Labeling) -> LemmaReport {
    let p = &t.params;
    let above = |alpha: &[u64]| -> Vec<u64> {
        let lo = alpha.last().map_or(0, |&m| m + 1);
        p.i.range(lo..).copied().collect()
    };
    let is_leaf = |alpha: &Alpha| t.children(alpha).next().is_none();
    let mut item2 = ItemStatus::Pass;
    let mut item3 = ItemStatus::Pass;
    let mut surrogate = ItemStatus::Pass;
    for alpha in t.nodes() {
        let ups = above(alpha);
        let leaf = is_leaf(alpha);
        if leaf {
            let found = least_witness(p, &t.delta, alpha);
            let frontier = ups.is_empty();
            match found {
                None if !frontier => {
                    if item3.ok() {
                        item3 = ItemStatus::Fail(format!("terminal {alpha:?} has no witness"));
                    }
                }
                // A frontier leaf without a witness is the finite stand-in for a path.
                None => {
                    if lb.get(alpha) != Label::Infinity && surrogate.ok() {
                        surrogate = ItemStatus::Fail(format!("quiet maximal {alpha:?} has a finite label"));
                    }
                }
                Some(w) => {
                    if lb.get(alpha) != Label::Finite(w.w) && item3.ok() {
                        item3 = ItemStatus::Fail(format!("terminal {alpha:?} mislabeled"));
                    }
                }
            }
        } else {
            // Membership rule for each α*x, evaluated from scratch.
            let rule = quiet(t, alpha);
            for x in ups {
                let mut child = alpha.clone();
                child.push(x);
                if !(rule && t.contains(&child)) && item2.ok() {
                    item2 = ItemStatus::Fail(format!("{child:?} missing below non-terminal {alpha:?}"));
                }
            }
        }
    }
    let item4 = if p.i.is_empty() {
        ItemStatus::NotApplicable("I is empty, so T = {λ} regardless of Δ".into())
    } else {
        let fires = (p.n..p.w_max).any(|w| t.delta.evaluate(&p.e, w).is_one());
        let only_root = t.len() == 1;
        if fires == only_root {
            ItemStatus::Pass
        } else {
            ItemStatus::Fail(format!("Δ^E fires: {fires}, T = {{λ}}: {only_root}"))
        }
    };
    LemmaReport {
        item1: ItemStatus::NotApplicable("finite trees have no infinite paths".into()),
        item1_surrogate: surrogate,
        item2,
        item3,
        item4,
    }
}

/// Depth-first search of `T^L` for the least terminal node with a witness
/// satisfying `pred`; returns the least such witness.
pub fn find_terminal_with_label(
    t: &ExtensionTree,
    tl: &LabeledSubtree,
    pred: &dyn Fn(&BTreeSet<u64>, u64) -> bool,
) -> Option<(Alpha, Witness)> {
    tl.nodes
        .iter()
        .filter(|a| t.is_terminal(a))
        .find_map(|a| {
            t.witnesses(a)
                .into_iter()
                .find(|w| pred(&w.f, w.w))
                .map(|w| (a.clone(), w))
        })
}

fn alpha_name(alpha: &[u64]) -> String {
    if alpha.is_empty() {
        "λ".to_owned()
    } else {
        let parts: Vec<String> = alpha.iter().map(u64::to_string).collect();
        format!("<{}>", parts.join(","))
    }
}

/// DOT rendering; nodes show their label, `T^L` members are drawn bold.
pub fn tree_to_dot(t: &ExtensionTree, lb: &Labeling, tl: Option<&LabeledSubtree>) -> String {
    let ids: BTreeMap<&Alpha, usize> = t.nodes().enumerate().map(|(i, a)| (a, i)).collect();
    let mut out = String::from("digraph extension_tree {\n");
    for (a, &i) in &ids {
        let bold = tl.is_some_and(|s| s.nodes.contains(*a));
        let style = if bold { ", style=bold" } else { "" };
        let shape = if t.is_terminal(a) { "box" } else { "ellipse" };
        out += &format!(
            "  n{i} [label=\"{} : {}\", shape={shape}{style}];\n",
            alpha_name(a),
            lb.get(a)
        );
    }
    for (a, &i) in &ids {
        for c in t.children(a) {
            out += &format!("  n{i} -> n{};\n", ids[c]);
        }
    }
    out.push_str("}\n");
    out
}
