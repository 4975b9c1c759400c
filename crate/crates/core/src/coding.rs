//! Set encodings: Cantor pairing, joins, and instances as sets of naturals.
//!
//! Instances travel through games and oracle machines as finite sets of
//! `u64` codes, split by residue mod 4:
//!
//! | code          | meaning                                             |
//! |---------------|-----------------------------------------------------|
//! | `4x`          | `x` is in the universe                              |
//! | `4<x,y>+1`    | `x <=_P y` (reflexive pairs included)               |
//! | `4<x,<g,t>>+2`| `x` annotated with tag `g` (S=0, L=1, I=2) at `t`   |
//! | `4c+3`        | metadata: 0 small type, 1 large type, 2 flag S, 3 flag L |
//!
//! where `<i,k>` is the Cantor pairing `(i+k)(i+k+1)/2 + k`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::poset::{Behavior, Element, FinitePoset, PosetError, StableAnnotation, Tag, TypeTag};
use crate::problems::{ProblemInstance, TypeFlag};

pub type CodeSet = BTreeSet<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodingError {
    #[error("join of an empty sequence")]
    EmptySequence,
    #[error("malformed join: {0}")]
    MalformedJoin(String),
    #[error("malformed instance code {0}")]
    MalformedCode(u64),
    #[error("encoded relation is not a poset: {0}")]
    InvalidPoset(PosetError),
    #[error("encoded annotation is inconsistent: {0}")]
    InvalidAnnotation(String),
}

/// Cantor pairing.
pub fn pair(i: u64, k: u64) -> u64 {
    let s = i + k;
    s * (s + 1) / 2 + k
}

/// Inverse of [`pair`].
pub fn unpair(z: u64) -> (u64, u64) {
    // w = floor((sqrt(8z + 1) - 1) / 2), corrected for float rounding.
    let mut w = ((((8 * z + 1) as f64).sqrt() - 1.0) / 2.0) as u64;
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let k = z - w * (w + 1) / 2;
    (w - k, k)
}

/// `A ⊕ B = {2a} ∪ {2b + 1}`.
pub fn two_join(a: &CodeSet, b: &CodeSet) -> CodeSet {
    a.iter()
        .map(|&x| 2 * x)
        .chain(b.iter().map(|&y| 2 * y + 1))
        .collect()
}

/// Inverse of [`two_join`].
pub fn split_two(z: &CodeSet) -> (CodeSet, CodeSet) {
    let left = z.iter().filter(|&&c| c % 2 == 0).map(|&c| c / 2).collect();
    let right = z.iter().filter(|&&c| c % 2 == 1).map(|&c| c / 2).collect();
    (left, right)
}

/// `{n} ⊕ {<i,k> : i <= n, k ∈ X_i}` for `X_0, ..., X_n`.
pub fn n_fold_join(sets: &[CodeSet]) -> Result<CodeSet, CodingError> {
    let n = sets.len().checked_sub(1).ok_or(CodingError::EmptySequence)? as u64;
    let tagged: CodeSet = sets
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.iter().map(move |&k| pair(i as u64, k)))
        .collect();
    Ok(two_join(&[n].into_iter().collect(), &tagged))
}

/// The one-fold join, written `X_0` by convention.
pub fn join_one(x0: &CodeSet) -> CodeSet {
    n_fold_join(std::slice::from_ref(x0)).expect("nonempty")
}

/// The two-fold join, written `X_0 ⊕ X_1` by convention.
pub fn join_two(x0: &CodeSet, x1: &CodeSet) -> CodeSet {
    n_fold_join(&[x0.clone(), x1.clone()]).expect("nonempty")
}

/// Inverse of [`n_fold_join`].
pub fn split_n_fold(z: &CodeSet) -> Result<Vec<CodeSet>, CodingError> {
    let (index, tagged) = split_two(z);
    let mut it = index.iter();
    let n = match (it.next(), it.next()) {
        (Some(&n), None) => n,
        _ => {
            return Err(CodingError::MalformedJoin(format!(
                "expected exactly one index, found {}",
                index.len()
            )))
        }
    };
    let mut out = vec![CodeSet::new(); n as usize + 1];
    for c in tagged {
        let (i, k) = unpair(c);
        if i > n {
            return Err(CodingError::MalformedJoin(format!("component {i} beyond index {n}")));
        }
        out[i as usize].insert(k);
    }
    Ok(out)
}

fn tag_code(tag: Tag) -> u64 {
    match tag {
        Tag::S => 0,
        Tag::L => 1,
        Tag::I => 2,
    }
}

fn element(c: u64, code: u64) -> Result<Element, CodingError> {
    Element::try_from(c).map_err(|_| CodingError::MalformedCode(code))
}

/// Encodes an instance as a set of codes (see the module table).
pub fn encode_instance(inst: &ProblemInstance) -> CodeSet {
    let p = &inst.poset;
    let mut out: CodeSet = p.universe().iter().map(|&x| 4 * x as u64).collect();
    out.extend(p.pairs().map(|(x, y)| 4 * pair(x as u64, y as u64) + 1));
    if let Some(ann) = &inst.annotation {
        for (&x, b) in ann.behaviors() {
            out.insert(4 * pair(x as u64, pair(tag_code(b.tag), b.t as u64)) + 2);
        }
        let meta = match ann.type_tag() {
            TypeTag::Small => 0,
            TypeTag::Large => 1,
        };
        out.insert(4 * meta + 3);
    }
    if let Some(flag) = inst.type_flag {
        let meta = match flag {
            TypeFlag::S => 2,
            TypeFlag::L => 3,
        };
        out.insert(4 * meta + 3);
    }
    out
}

/// Encodes a bare poset (no annotation).
pub fn encode_poset(p: &FinitePoset) -> CodeSet {
    encode_instance(&ProblemInstance::plain(p.clone()))
}

/// Inverse of [`encode_instance`]. The relation is validated, not closed.
pub fn decode_instance(z: &CodeSet) -> Result<ProblemInstance, CodingError> {
    let mut universe = Vec::new();
    let mut pairs = Vec::new();
    let mut behaviors = BTreeMap::new();
    let mut type_tag = None;
    let mut type_flag = None;
    for &code in z {
        let body = code / 4;
        match code % 4 {
            0 => universe.push(element(body, code)?),
            1 => {
                let (x, y) = unpair(body);
                pairs.push((element(x, code)?, element(y, code)?));
            }
            2 => {
                let (x, rest) = unpair(body);
                let (g, t) = unpair(rest);
                let tag = match g {
                    0 => Tag::S,
                    1 => Tag::L,
                    2 => Tag::I,
                    _ => return Err(CodingError::MalformedCode(code)),
                };
                let t = u32::try_from(t).map_err(|_| CodingError::MalformedCode(code))?;
                if behaviors
                    .insert(element(x, code)?, Behavior::new(tag, t))
                    .is_some()
                {
                    return Err(CodingError::InvalidAnnotation(format!(
                        "element {x} annotated twice"
                    )));
                }
            }
            _ => match body {
                0 | 1 => {
                    let t = if body == 0 { TypeTag::Small } else { TypeTag::Large };
                    if type_tag.replace(t).is_some() {
                        return Err(CodingError::InvalidAnnotation("two type tags".into()));
                    }
                }
                2 | 3 => {
                    let f = if body == 2 { TypeFlag::S } else { TypeFlag::L };
                    if type_flag.replace(f).is_some() {
                        return Err(CodingError::InvalidAnnotation("two type flags".into()));
                    }
                }
                _ => return Err(CodingError::MalformedCode(code)),
            },
        }
    }
    // Codes ascend, so universe members arrive in ascending order.
    let poset = FinitePoset::validate(&universe, pairs).map_err(CodingError::InvalidPoset)?;
    let annotation = match (type_tag, behaviors.is_empty()) {
        (None, true) => None,
        (None, false) => {
            return Err(CodingError::InvalidAnnotation(
                "behaviors without a type tag".into(),
            ))
        }
        (Some(t), _) => Some(
            StableAnnotation::new(behaviors, t)
                .map_err(|e| CodingError::InvalidAnnotation(e.to_string()))?,
        ),
    };
    Ok(ProblemInstance {
        poset,
        annotation,
        type_flag,
    })
}

/// Solutions are exchanged as their plain element sets.
pub fn encode_elements(xs: &BTreeSet<Element>) -> CodeSet {
    xs.iter().map(|&x| x as u64).collect()
}

pub fn decode_elements(z: &CodeSet) -> Result<BTreeSet<Element>, CodingError> {
    z.iter().map(|&c| element(c, c)).collect()
}
