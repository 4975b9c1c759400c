//! Seeded random instances.
//!
//! General posets come from a random DAG over a shuffled labeling, closed
//! transitively; omega-ordered posets keep the identity labeling. Stable
//! annotations are sampled like forcing conditions: a random down-set (or
//! up-set) carries the side tag, everything else is isolated, and each
//! stabilization point is the least one the order allows, optionally
//! pushed later.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::machines::OracleMachine;
use crate::poset::{Behavior, Element, FinitePoset, StableAnnotation, Tag, TypeTag};
use crate::problems::{ProblemInstance, ProblemKind, TypeFlag};

pub type GenRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("unsatisfiable generation request: {0}")]
    UnsatisfiableSpec(String),
}

/// Random poset on `0..size`: each pair of a random linear order becomes
/// a comparability with probability `density`, then the relation is closed.
pub fn random_poset<R: Rng>(rng: &mut R, size: u32, density: f64) -> FinitePoset {
    let mut labels: Vec<Element> = (0..size).collect();
    labels.shuffle(rng);
    let universe: Vec<Element> = (0..size).collect();
    let mut edges = Vec::new();
    for a in 0..labels.len() {
        for b in a + 1..labels.len() {
            if rng.gen_bool(density) {
                edges.push((labels[a], labels[b]));
            }
        }
    }
    FinitePoset::closure_of(&universe, edges).expect("closure of a DAG is a poset")
}

/// Random omega-ordered poset on `0..size`.
pub fn random_omega_poset<R: Rng>(rng: &mut R, size: u32, density: f64) -> FinitePoset {
    let universe: Vec<Element> = (0..size).collect();
    let mut edges = Vec::new();
    for a in 0..size {
        for b in a + 1..size {
            if rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    FinitePoset::closure_of(&universe, edges).expect("closure of a DAG is a poset")
}

pub fn random_density<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(0.05..0.6)
}

/// Least stabilization point compatible with `tag` for the element at
/// position `i`: one past every universe element that still violates
/// the tag's behavior.
pub fn least_stabilization(p: &FinitePoset, i: usize, tag: Tag) -> u32 {
    let u = p.universe();
    (0..p.len())
        .filter(|&j| {
            let ok = match tag {
                Tag::S => p.le_at(i, j) && i != j,
                Tag::L => p.le_at(j, i) && i != j,
                Tag::I => i == j || (!p.le_at(i, j) && !p.le_at(j, i)),
            };
            !ok
        })
        .map(|j| u[j] + 1)
        .max()
        .unwrap_or(0)
}

/// Samples a small-type annotation shaped like a forcing condition: the
/// `S` elements form a down-set, and every `t` lies in `0..=|universe|`.
pub fn random_small_annotation<R: Rng>(rng: &mut R, p: &FinitePoset) -> StableAnnotation {
    let n = p.len();
    // Random down-set: pick seeds, then close downward.
    let mut small = vec![false; n];
    for i in 0..n {
        if rng.gen_bool(0.4) {
            for j in 0..n {
                if p.le_at(j, i) {
                    small[j] = true;
                }
            }
        }
    }
    let cap = p.universe().last().map_or(0, |&m| m + 1);
    let behaviors: BTreeMap<Element, Behavior> = (0..n)
        .map(|i| {
            let tag = if small[i] { Tag::S } else { Tag::I };
            let least = least_stabilization(p, i, tag);
            let t = if rng.gen_bool(0.25) {
                rng.gen_range(least..=cap.max(least))
            } else {
                least
            };
            (p.universe()[i], Behavior::new(tag, t))
        })
        .collect();
    StableAnnotation::new(behaviors, TypeTag::Small).expect("no L tags")
}

/// A stable instance of the requested type. Large-type instances are
/// duals of small-type ones.
pub fn random_stable<R: Rng>(rng: &mut R, size: u32, type_tag: TypeTag, omega: bool) -> ProblemInstance {
    let density = random_density(rng);
    let p = if omega {
        random_omega_poset(rng, size, density)
    } else {
        random_poset(rng, size, density)
    };
    let ann = random_small_annotation(rng, &p);
    match type_tag {
        TypeTag::Small => ProblemInstance::stable(p, ann),
        TypeTag::Large => ProblemInstance::stable(p.dual_order(), ann.flipped()),
    }
}

/// Random table machine over `w < domain` and every oracle below
/// `use_bound`: each entry is 1 with probability `p_one`, otherwise 0 or
/// absent (divergent) with equal odds.
pub fn random_table_machine<R: Rng>(rng: &mut R, use_bound: u64, domain: u64, p_one: f64) -> OracleMachine {
    let mut entries = Vec::new();
    for mask in 0u64..1 << use_bound {
        let oracle: Vec<u64> = (0..use_bound).filter(|b| mask >> b & 1 == 1).collect();
        for w in 0..domain {
            if rng.gen_bool(p_one) {
                entries.push((w, oracle.clone(), true));
            } else if rng.gen_bool(0.5) {
                entries.push((w, oracle.clone(), false));
            }
        }
    }
    OracleMachine::table("random", use_bound, entries).expect("entries lie below the use bound")
}

/// Generation options beyond kind and size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenOptions {
    pub type_tag: Option<TypeTag>,
}

/// A random valid instance of `kind`.
pub fn gen_instance<R: Rng>(
    rng: &mut R,
    kind: ProblemKind,
    size: u32,
    opts: GenOptions,
) -> Result<ProblemInstance, GenError> {
    let pick_type = |rng: &mut R| {
        opts.type_tag.unwrap_or(if rng.gen_bool(0.5) {
            TypeTag::Small
        } else {
            TypeTag::Large
        })
    };
    let inst = match kind {
        ProblemKind::Cac => {
            let d = random_density(rng);
            ProblemInstance::plain(random_poset(rng, size, d))
        }
        ProblemKind::OmegaCac => {
            let d = random_density(rng);
            ProblemInstance::plain(random_omega_poset(rng, size, d))
        }
        ProblemKind::Scac => {
            let t = pick_type(rng);
            random_stable(rng, size, t, false)
        }
        ProblemKind::OmegaScac => {
            if opts.type_tag == Some(TypeTag::Large) {
                return Err(GenError::UnsatisfiableSpec(
                    "omega-ordered stable instances are of the small type".into(),
                ));
            }
            random_stable(rng, size, TypeTag::Small, true)
        }
        ProblemKind::ScacSmall | ProblemKind::ScacLarge => {
            let want = if kind == ProblemKind::ScacSmall {
                TypeTag::Small
            } else {
                TypeTag::Large
            };
            if opts.type_tag.is_some_and(|t| t != want) {
                return Err(GenError::UnsatisfiableSpec(format!(
                    "{kind} requires the {want:?} type"
                )));
            }
            random_stable(rng, size, want, false)
        }
        ProblemKind::ScacType => {
            let t = pick_type(rng);
            let mut inst = random_stable(rng, size, t, false);
            inst.type_flag = Some(TypeFlag::of(t));
            inst
        }
    };
    Ok(inst)
}
