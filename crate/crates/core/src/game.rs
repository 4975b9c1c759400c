//! Reduction games `G(Q -> P)` at bounded depth, and witness checkers for the
//! four machine-based reduction disciplines.
//!
//! Player I opens with a P-instance `X_0`. On every round Player II sees the
//! n-fold join of Player I's moves so far and answers `V ⊕ Y`: with `V = {1}`
//! it claims `Y` solves `X_0`; with `V = ∅` it poses `Y` as a Q-instance,
//! which Player I must solve on the next move.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coding::{
    decode_elements, decode_instance, encode_elements, encode_instance, encode_poset,
    n_fold_join, split_n_fold, split_two, two_join, CodeSet,
};
use crate::machines::OracleMachine;
use crate::poset::Element;
use crate::problems::{
    enumerate_solutions, solve_poset, validate_instance, verify_unlabeled, ProblemError,
    ProblemInstance, ProblemKind, SizePolicy,
};
use crate::reductions::{split_minus, split_plus};

pub const DEFAULT_MAX_ROUNDS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum GameError {
    #[error("max_rounds must be at least 1")]
    NoRounds,
    #[error("malformed Player II move at round {round}: {detail}")]
    MalformedMove { round: usize, detail: String },
    #[error("Player I opened with an invalid instance: {0}")]
    InvalidOpening(ProblemError),
    #[error("Player I answered round {round} with a non-solution: {reason}")]
    IllegalAdversaryMove { round: usize, reason: ProblemError },
    #[error("machine {machine} diverged on input {input} (instance {instance})")]
    MachineDiverged {
        machine: String,
        instance: usize,
        input: u64,
    },
}

/// Player II: maps the join of Player I's moves to `V ⊕ Y`, or no move.
pub trait Strategy {
    fn respond(&self, join: &CodeSet) -> Option<CodeSet>;
}

impl<F: Fn(&CodeSet) -> Option<CodeSet>> Strategy for F {
    fn respond(&self, join: &CodeSet) -> Option<CodeSet> {
        self(join)
    }
}

/// Player I.
pub trait Adversary {
    fn open(&mut self) -> ProblemInstance;
    /// A solution to the Q-instance `q`, or `None` if none is available.
    fn answer(&mut self, q: &ProblemInstance, policy: &SizePolicy) -> Option<BTreeSet<Element>>;
}

/// Opens with a fixed instance and answers with the brute-force solver.
#[derive(Debug, Clone)]
pub struct BruteForceAdversary {
    instance: ProblemInstance,
}

impl BruteForceAdversary {
    pub fn new(instance: ProblemInstance) -> Self {
        BruteForceAdversary { instance }
    }
}

impl Adversary for BruteForceAdversary {
    fn open(&mut self) -> ProblemInstance {
        self.instance.clone()
    }

    fn answer(&mut self, q: &ProblemInstance, policy: &SizePolicy) -> Option<BTreeSet<Element>> {
        solve_poset(&q.poset, policy).ok().flatten().map(|s| s.elements)
    }
}

/// A Player II move, decoded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondMove {
    /// `V = {1}`: `y` is claimed to solve `X_0`.
    pub claim: bool,
    pub y: CodeSet,
}

impl SecondMove {
    pub fn encode(&self) -> CodeSet {
        let v: CodeSet = if self.claim { [1].into() } else { CodeSet::new() };
        two_join(&v, &self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub round: usize,
    pub player_one: CodeSet,
    pub player_two: Option<SecondMove>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    #[serde(rename = "II-wins")]
    IIWins { round: usize },
    #[serde(rename = "I-wins")]
    IWins { round: usize, reason: String },
    #[serde(rename = "exhausted")]
    Exhausted { reason: String },
}

impl Verdict {
    pub fn ii_wins(&self) -> bool {
        matches!(self, Verdict::IIWins { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub p_kind: ProblemKind,
    pub q_kind: ProblemKind,
    pub policy: SizePolicy,
    pub rounds: Vec<Round>,
    pub verdict: Verdict,
}

impl GameTranscript {
    /// The final claimed solution when Player II won.
    pub fn winning_set(&self) -> Option<&CodeSet> {
        match self.verdict {
            Verdict::IIWins { round } => self.rounds[round - 1]
                .player_two
                .as_ref()
                .map(|m| &m.y),
            _ => None,
        }
    }
}

fn decode_second(round: usize, z: &CodeSet) -> Result<SecondMove, GameError> {
    let (v, y) = split_two(z);
    let claim = if v.is_empty() {
        false
    } else if v.len() == 1 && v.contains(&1) {
        true
    } else {
        return Err(GameError::MalformedMove {
            round,
            detail: format!("V must be empty or {{1}}, got {v:?}"),
        });
    };
    Ok(SecondMove { claim, y })
}

pub fn play_reduction_game(
    p_kind: ProblemKind,
    q_kind: ProblemKind,
    adversary: &mut dyn Adversary,
    strategy: &dyn Strategy,
    max_rounds: usize,
    policy: &SizePolicy,
) -> Result<GameTranscript, GameError> {
    if max_rounds == 0 {
        return Err(GameError::NoRounds);
    }
    let x0 = adversary.open();
    validate_instance(p_kind, &x0).map_err(GameError::InvalidOpening)?;
    let mut moves = vec![encode_instance(&x0)];
    let mut rounds = Vec::new();
    let finish = |rounds, verdict| GameTranscript {
        p_kind,
        q_kind,
        policy: *policy,
        rounds,
        verdict,
    };
    for round in 1..=max_rounds {
        let join = n_fold_join(&moves).expect("nonempty");
        let player_one = moves.last().cloned().expect("nonempty");
        let Some(raw) = strategy.respond(&join) else {
            rounds.push(Round {
                round,
                player_one,
                player_two: None,
            });
            let reason = "Player II made no move".to_owned();
            return Ok(finish(rounds, Verdict::IWins { round, reason }));
        };
        let second = decode_second(round, &raw)?;
        rounds.push(Round {
            round,
            player_one,
            player_two: Some(second.clone()),
        });
        if second.claim {
            let verdict = match decode_elements(&second.y) {
                Err(e) => Verdict::IWins {
                    round,
                    reason: format!("claimed solution does not decode: {e}"),
                },
                Ok(ys) => match verify_unlabeled(&x0.poset, &ys, policy) {
                    Ok(_) => Verdict::IIWins { round },
                    Err(e) => Verdict::IWins {
                        round,
                        reason: format!("claimed solution rejected: {e}"),
                    },
                },
            };
            return Ok(finish(rounds, verdict));
        }
        let q = match decode_instance(&second.y) {
            Ok(q) => q,
            Err(e) => {
                let reason = format!("Q-instance does not decode: {e}");
                return Ok(finish(rounds, Verdict::IWins { round, reason }));
            }
        };
        if let Err(e) = validate_instance(q_kind, &q) {
            let reason = format!("invalid {q_kind} instance: {e}");
            return Ok(finish(rounds, Verdict::IWins { round, reason }));
        }
        if round == max_rounds {
            break;
        }
        let Some(answer) = adversary.answer(&q, policy) else {
            let reason = format!("Player I has no solution to the round-{round} instance");
            return Ok(finish(rounds, Verdict::Exhausted { reason }));
        };
        if let Err(reason) = verify_unlabeled(&q.poset, &answer, policy) {
            return Err(GameError::IllegalAdversaryMove { round, reason });
        }
        moves.push(encode_elements(&answer));
    }
    let reason = format!("no Player II win within {max_rounds} rounds");
    Ok(finish(rounds, Verdict::Exhausted { reason }))
}

/// The two-stage strategy for `G(ω-CAC -> CAC)`: pose `≤₊`; if Player I's
/// answer is a `≤₊`-chain, claim it; otherwise pose `≤₋` restricted to the
/// answer and claim Player I's second answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacViaOmega {
    pub policy: SizePolicy,
}

pub fn cac_via_omega_strategy(policy: SizePolicy) -> CacViaOmega {
    CacViaOmega { policy }
}

impl Strategy for CacViaOmega {
    fn respond(&self, join: &CodeSet) -> Option<CodeSet> {
        let moves = split_n_fold(join).ok()?;
        let p = decode_instance(&moves[0]).ok()?.poset;
        let claim = |y: &CodeSet| SecondMove { claim: true, y: y.clone() }.encode();
        let pose = |y: CodeSet| SecondMove { claim: false, y }.encode();
        match moves.len() {
            1 => {
                if p.len() <= 1 && p.len() >= self.policy.min_size {
                    Some(claim(&encode_elements(&p.universe().iter().copied().collect())))
                } else {
                    Some(pose(encode_poset(&split_plus(&p))))
                }
            }
            2 => {
                let x = decode_elements(&moves[1]).ok()?;
                let plus = split_plus(&p);
                if plus.is_chain(&x).ok()? {
                    Some(claim(&moves[1]))
                } else {
                    let minus = split_minus(&p).restrict(&x).ok()?;
                    Some(pose(encode_poset(&minus)))
                }
            }
            3 => Some(claim(&moves[2])),
            _ => None,
        }
    }
}

/// Strategy given by an explicit table from joins to moves.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableStrategy {
    pub moves: Vec<(CodeSet, CodeSet)>,
}

impl Strategy for TableStrategy {
    fn respond(&self, join: &CodeSet) -> Option<CodeSet> {
        self.moves
            .iter()
            .find(|(k, _)| k == join)
            .map(|(_, v)| v.clone())
    }
}

/// Which oracle the backward machine reads, and whether machines may
/// depend on the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discipline {
    StrongWeihrauch,
    Weihrauch,
    StrongComputable,
    Computable,
}

impl Discipline {
    fn backward_sees_instance(self) -> bool {
        matches!(self, Discipline::Weihrauch | Discipline::Computable)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "failure", rename_all = "kebab-case")]
pub enum WitnessFailure {
    InvalidForwardInstance { instance: usize, reason: String },
    BackwardNotSolution {
        instance: usize,
        q_solution: BTreeSet<Element>,
        output: CodeSet,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub discipline: Discipline,
    pub instances: usize,
    pub q_solutions_checked: usize,
    pub failures: Vec<WitnessFailure>,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn run(m: &OracleMachine, oracle: &CodeSet, instance: usize) -> Result<CodeSet, GameError> {
    m.output_set(oracle).map_err(|input| GameError::MachineDiverged {
        machine: m.name().to_owned(),
        instance,
        input,
    })
}

/// Shared checker: `machines_for` picks (forward, backward) per instance.
pub fn check_reduction_witness(
    discipline: Discipline,
    p_kind: ProblemKind,
    q_kind: ProblemKind,
    machines_for: &dyn Fn(&ProblemInstance) -> (OracleMachine, OracleMachine),
    corpus: &[ProblemInstance],
    policy: &SizePolicy,
) -> Result<WitnessReport, GameError> {
    let mut report = WitnessReport {
        discipline,
        instances: corpus.len(),
        q_solutions_checked: 0,
        failures: Vec::new(),
    };
    for (idx, xp) in corpus.iter().enumerate() {
        validate_instance(p_kind, xp).map_err(GameError::InvalidOpening)?;
        let (forward, backward) = machines_for(xp);
        let code = encode_instance(xp);
        let out = run(&forward, &code, idx)?;
        let xq = match decode_instance(&out)
            .map_err(|e| e.to_string())
            .and_then(|q| validate_instance(q_kind, &q).map(|_| q).map_err(|e| e.to_string()))
        {
            Ok(q) => q,
            Err(reason) => {
                report
                    .failures
                    .push(WitnessFailure::InvalidForwardInstance { instance: idx, reason });
                continue;
            }
        };
        let sols = enumerate_solutions(&xq.poset, policy).map_err(GameError::InvalidOpening)?;
        for sol in sols {
            report.q_solutions_checked += 1;
            let yq = encode_elements(&sol.elements);
            let oracle = if discipline.backward_sees_instance() {
                two_join(&code, &yq)
            } else {
                yq
            };
            let output = run(&backward, &oracle, idx)?;
            let verdict = decode_elements(&output)
                .map_err(|e| e.to_string())
                .and_then(|ys| {
                    verify_unlabeled(&xp.poset, &ys, policy).map_err(|e| e.to_string())
                });
            if let Err(reason) = verdict {
                report.failures.push(WitnessFailure::BackwardNotSolution {
                    instance: idx,
                    q_solution: sol.elements,
                    output,
                    reason,
                });
            }
        }
    }
    Ok(report)
}

pub fn check_sw_reduction_witness(
    p_kind: ProblemKind,
    q_kind: ProblemKind,
    forward: &OracleMachine,
    backward: &OracleMachine,
    corpus: &[ProblemInstance],
    policy: &SizePolicy,
) -> Result<WitnessReport, GameError> {
    let pick = |_: &ProblemInstance| (forward.clone(), backward.clone());
    check_reduction_witness(Discipline::StrongWeihrauch, p_kind, q_kind, &pick, corpus, policy)
}

/// Like [`check_sw_reduction_witness`], but the backward machine reads
/// `X_P ⊕ Y_Q`.
pub fn check_w_reduction_witness(
    p_kind: ProblemKind,
    q_kind: ProblemKind,
    forward: &OracleMachine,
    backward: &OracleMachine,
    corpus: &[ProblemInstance],
    policy: &SizePolicy,
) -> Result<WitnessReport, GameError> {
    let pick = |_: &ProblemInstance| (forward.clone(), backward.clone());
    check_reduction_witness(Discipline::Weihrauch, p_kind, q_kind, &pick, corpus, policy)
}

/// Machines may be chosen per instance; the backward machine reads `Y_Q`.
pub fn check_sc_reduction_witness(
    p_kind: ProblemKind,
    q_kind: ProblemKind,
    choose: &dyn Fn(&ProblemInstance) -> (OracleMachine, OracleMachine),
    corpus: &[ProblemInstance],
    policy: &SizePolicy,
) -> Result<WitnessReport, GameError> {
    check_reduction_witness(Discipline::StrongComputable, p_kind, q_kind, choose, corpus, policy)
}

/// Machines may be chosen per instance; the backward machine reads
/// `X_P ⊕ Y_Q`.
pub fn check_c_reduction_witness(
    p_kind: ProblemKind,
    q_kind: ProblemKind,
    choose: &dyn Fn(&ProblemInstance) -> (OracleMachine, OracleMachine),
    corpus: &[ProblemInstance],
    policy: &SizePolicy,
) -> Result<WitnessReport, GameError> {
    check_reduction_witness(Discipline::Computable, p_kind, q_kind, choose, corpus, policy)
}
