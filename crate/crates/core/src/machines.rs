//! Finite oracle machines: use-bounded, deterministic 0-1 partial functions
//! of a finite oracle set.
//!
//! A machine sees only `oracle ∩ [0, use_bound)` and converges on inputs
//! `w < domain`. Built-ins are closed-form rules; file machines are explicit
//! tables, where an absent entry means divergence.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coding::{decode_instance, encode_instance, split_two, CodeSet};
use crate::problems::ProblemInstance;
use crate::reductions::{split_minus, split_plus};

pub const DEFAULT_USE_BOUND: u64 = 64;

/// Largest use bound for which [`OracleMachine::tabulate`] is allowed.
pub const TABULATE_LIMIT: u64 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Output {
    Zero,
    One,
    Diverge,
}

impl Output {
    pub fn of(b: bool) -> Output {
        if b {
            Output::One
        } else {
            Output::Zero
        }
    }

    pub fn is_one(self) -> bool {
        self == Output::One
    }

    /// `≃ 0`: zero or divergence.
    pub fn is_zero_or_diverge(self) -> bool {
        self != Output::One
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("unknown machine spec {0:?}")]
    UnknownSpec(String),
    #[error("use-consistency violation: {0}")]
    UseConsistencyViolation(String),
    #[error("invalid machine file: {0}")]
    InvalidFile(String),
}

/// Instance-to-instance maps readable off an encoded instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Identity,
    SplitPlus,
    SplitMinus,
    Dual,
}

impl Transform {
    pub fn apply(self, inst: &ProblemInstance) -> ProblemInstance {
        match self {
            Transform::Identity => inst.clone(),
            Transform::SplitPlus => ProblemInstance::plain(split_plus(&inst.poset)),
            Transform::SplitMinus => ProblemInstance::plain(split_minus(&inst.poset)),
            Transform::Dual => ProblemInstance::plain(inst.poset.dual_order()),
        }
    }
}

/// Side of a two-join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// Output `b` everywhere.
    Constant(bool),
    /// Output 1 exactly at `w0`.
    ConstantAt(u64),
    /// `w ∈ oracle`.
    Membership,
    /// `w` is in the given side of the oracle read as a two-join.
    Projection(Side),
    /// `|oracle|` is odd.
    Parity,
    /// `|oracle| >= k`.
    Threshold(usize),
    /// `w` is in the encoding of the transformed instance the oracle encodes;
    /// diverges when the oracle is not an instance code.
    Transform(Transform),
    /// Explicit table keyed by `(w, restricted oracle)`.
    Table(BTreeMap<(u64, Vec<u64>), bool>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMachine {
    name: String,
    use_bound: u64,
    domain: u64,
    rule: Rule,
}

impl OracleMachine {
    pub fn new(name: impl Into<String>, use_bound: u64, domain: u64, rule: Rule) -> Self {
        OracleMachine {
            name: name.into(),
            use_bound,
            domain,
            rule,
        }
    }

    pub fn constant(b: bool) -> Self {
        let name = if b { "constant-1" } else { "constant-0" };
        Self::new(name, DEFAULT_USE_BOUND, DEFAULT_USE_BOUND, Rule::Constant(b))
    }

    pub fn constant_at(w0: u64) -> Self {
        let domain = DEFAULT_USE_BOUND.max(w0 + 1);
        Self::new(format!("constant-at-{w0}"), DEFAULT_USE_BOUND, domain, Rule::ConstantAt(w0))
    }

    pub fn membership() -> Self {
        Self::membership_with(DEFAULT_USE_BOUND)
    }

    pub fn membership_with(use_bound: u64) -> Self {
        Self::new("membership", use_bound, use_bound, Rule::Membership)
    }

    pub fn parity() -> Self {
        Self::new("parity", DEFAULT_USE_BOUND, DEFAULT_USE_BOUND, Rule::Parity)
    }

    pub fn threshold(k: usize) -> Self {
        Self::new(format!("threshold-{k}"), DEFAULT_USE_BOUND, DEFAULT_USE_BOUND, Rule::Threshold(k))
    }

    pub fn projection(side: Side, use_bound: u64) -> Self {
        let name = match side {
            Side::Left => "left",
            Side::Right => "right",
        };
        Self::new(name, use_bound, use_bound / 2, Rule::Projection(side))
    }

    pub fn transform(t: Transform, use_bound: u64) -> Self {
        let name = serde_json::to_value(t)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        Self::new(format!("encode-{name}"), use_bound, use_bound, Rule::Transform(t))
    }

    /// Table machine. Keys must be use-consistent: oracle members below
    /// `use_bound` and no conflicting duplicate keys.
    pub fn table<I>(name: impl Into<String>, use_bound: u64, entries: I) -> Result<Self, MachineError>
    where
        I: IntoIterator<Item = (u64, Vec<u64>, bool)>,
    {
        let mut table = BTreeMap::new();
        let mut domain = 0;
        for (w, mut oracle, out) in entries {
            if let Some(&m) = oracle.iter().find(|&&m| m >= use_bound) {
                return Err(MachineError::UseConsistencyViolation(format!(
                    "entry for w={w} reads {m} at or above use bound {use_bound}"
                )));
            }
            oracle.sort_unstable();
            oracle.dedup();
            if let Some(prev) = table.insert((w, oracle.clone()), out) {
                if prev != out {
                    return Err(MachineError::UseConsistencyViolation(format!(
                        "conflicting outputs for w={w}, oracle {oracle:?}"
                    )));
                }
            }
            domain = domain.max(w + 1);
        }
        Ok(Self::new(name, use_bound, domain, Rule::Table(table)))
    }

    pub fn empty_table() -> Self {
        Self::new("empty", DEFAULT_USE_BOUND, 0, Rule::Table(BTreeMap::new()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn use_bound(&self) -> u64 {
        self.use_bound
    }

    /// Inputs at or above the domain diverge.
    pub fn domain(&self) -> u64 {
        self.domain
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    fn restrict(&self, oracle: &BTreeSet<u64>) -> CodeSet {
        oracle.range(..self.use_bound).copied().collect()
    }

    pub fn evaluate(&self, oracle: &BTreeSet<u64>, w: u64) -> Output {
        if w >= self.domain {
            return Output::Diverge;
        }
        let a = self.restrict(oracle);
        match &self.rule {
            Rule::Constant(b) => Output::of(*b),
            Rule::ConstantAt(w0) => Output::of(w == *w0),
            Rule::Membership => Output::of(a.contains(&w)),
            Rule::Projection(side) => {
                let code = match side {
                    Side::Left => 2 * w,
                    Side::Right => 2 * w + 1,
                };
                Output::of(a.contains(&code))
            }
            Rule::Parity => Output::of(a.len() % 2 == 1),
            Rule::Threshold(k) => Output::of(a.len() >= *k),
            Rule::Transform(t) => match decode_instance(&a) {
                Ok(inst) => Output::of(encode_instance(&t.apply(&inst)).contains(&w)),
                Err(_) => Output::Diverge,
            },
            Rule::Table(table) => {
                let key = (w, a.into_iter().collect::<Vec<_>>());
                table.get(&key).map_or(Output::Diverge, |&b| Output::of(b))
            }
        }
    }

    /// `{w < domain : evaluate(oracle, w) = 1}`, or the least divergent input.
    pub fn output_set(&self, oracle: &BTreeSet<u64>) -> Result<CodeSet, u64> {
        match &self.rule {
            // Decode once instead of once per input.
            Rule::Transform(t) => {
                let a = self.restrict(oracle);
                match decode_instance(&a) {
                    Ok(inst) => Ok(encode_instance(&t.apply(&inst))
                        .into_iter()
                        .take_while(|&c| c < self.domain)
                        .collect()),
                    Err(_) if self.domain == 0 => Ok(CodeSet::new()),
                    Err(_) => Err(0),
                }
            }
            Rule::Projection(side) => {
                let (l, r) = split_two(&self.restrict(oracle));
                let s = match side {
                    Side::Left => l,
                    Side::Right => r,
                };
                Ok(s.into_iter().filter(|&w| w < self.domain).collect())
            }
            Rule::Membership => Ok(self.restrict(oracle).range(..self.domain).copied().collect()),
            _ => {
                let mut out = CodeSet::new();
                for w in 0..self.domain {
                    match self.evaluate(oracle, w) {
                        Output::One => {
                            out.insert(w);
                        }
                        Output::Zero => {}
                        Output::Diverge => return Err(w),
                    }
                }
                Ok(out)
            }
        }
    }

    /// Explicit table over every oracle below the use bound and every
    /// convergent input. Only for small use bounds.
    pub fn tabulate(&self) -> Result<OracleMachine, MachineError> {
        if self.use_bound > TABULATE_LIMIT {
            return Err(MachineError::InvalidFile(format!(
                "use bound {} too large to tabulate",
                self.use_bound
            )));
        }
        let mut entries = Vec::new();
        for mask in 0u64..1 << self.use_bound {
            let oracle: BTreeSet<u64> = (0..self.use_bound).filter(|b| mask >> b & 1 == 1).collect();
            for w in 0..self.domain {
                match self.evaluate(&oracle, w) {
                    Output::Diverge => {}
                    o => entries.push((w, oracle.iter().copied().collect(), o.is_one())),
                }
            }
        }
        OracleMachine::table(self.name.clone(), self.use_bound, entries)
    }
}

/// Serialized table machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineFile {
    #[serde(default)]
    pub name: Option<String>,
    pub use_bound: u64,
    pub entries: Vec<(u64, Vec<u64>, u8)>,
}

impl MachineFile {
    pub fn into_machine(self) -> Result<OracleMachine, MachineError> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for (w, oracle, out) in self.entries {
            if oracle.windows(2).any(|p| p[0] >= p[1]) {
                return Err(MachineError::InvalidFile(format!(
                    "oracle list for w={w} is not strictly ascending"
                )));
            }
            let b = match out {
                0 => false,
                1 => true,
                _ => return Err(MachineError::InvalidFile(format!("output {out} is not 0 or 1"))),
            };
            entries.push((w, oracle, b));
        }
        OracleMachine::table(self.name.unwrap_or_else(|| "table".into()), self.use_bound, entries)
    }

    pub fn from_machine(m: &OracleMachine) -> Option<MachineFile> {
        match m.rule() {
            Rule::Table(t) => Some(MachineFile {
                name: Some(m.name().to_owned()),
                use_bound: m.use_bound(),
                entries: t
                    .iter()
                    .map(|((w, o), &b)| (*w, o.clone(), b as u8))
                    .collect(),
            }),
            _ => None,
        }
    }
}

/// One built-in machine by name.
pub fn builtin(name: &str) -> Result<OracleMachine, MachineError> {
    let unknown = || MachineError::UnknownSpec(name.to_owned());
    let number = |s: &str| s.parse::<u64>().map_err(|_| unknown());
    match name {
        "constant-1" => Ok(OracleMachine::constant(true)),
        "constant-0" => Ok(OracleMachine::constant(false)),
        "membership" => Ok(OracleMachine::membership()),
        "parity" | "parity-of-element-count" => Ok(OracleMachine::parity()),
        "empty" => Ok(OracleMachine::empty_table()),
        _ => {
            if let Some(k) = name.strip_prefix("threshold-") {
                Ok(OracleMachine::threshold(number(k)? as usize))
            } else if let Some(w) = name.strip_prefix("constant-at-") {
                Ok(OracleMachine::constant_at(number(w)?))
            } else if let Some(u) = name.strip_prefix("membership-u") {
                Ok(OracleMachine::membership_with(number(u)?))
            } else {
                Err(unknown())
            }
        }
    }
}

/// A comma-separated list of built-in names, in order.
pub fn machine_family(spec: &str) -> Result<Vec<OracleMachine>, MachineError> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(builtin)
        .collect()
}

/// Checks use-consistency of `m` on every oracle below `u` padded with each
/// pattern of junk in `[u, u + pad)`. Returns the first offending input.
pub fn check_use_consistency(m: &OracleMachine, pad: u64) -> Option<(u64, BTreeSet<u64>, BTreeSet<u64>)> {
    let u = m.use_bound();
    assert!(u <= TABULATE_LIMIT, "exhaustive check needs a small use bound");
    for mask in 0u64..1 << u {
        let a: BTreeSet<u64> = (0..u).filter(|b| mask >> b & 1 == 1).collect();
        for junk in 0u64..1 << pad {
            let mut b = a.clone();
            b.extend((0..pad).filter(|j| junk >> j & 1 == 1).map(|j| u + j));
            for w in 0..m.domain().max(u) + 1 {
                if m.evaluate(&a, w) != m.evaluate(&b, w) {
                    return Some((w, a, b));
                }
            }
        }
    }
    None
}
