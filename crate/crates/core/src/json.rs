//! JSON documents for every artifact the library reads or writes.
//!
//! Relations are lists of `[x, y]` pairs meaning `x <= y`. Reflexive pairs
//! may be omitted on input and are always written on output, with
//! `"normalized": true` marking a relation listed in full.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forcing::{validate_condition, Condition, ConditionError, Selector};
use crate::machines::{builtin, MachineError, MachineFile, OracleMachine};
use crate::poset::{Behavior, Element, FinitePoset, PosetError, SolutionKind, SolutionSet, StabilityError, StableAnnotation, Tag, TypeTag};
use crate::problems::{ProblemError, ProblemInstance, SizePolicy, TypeFlag};
use crate::trees::{Alpha, ExtensionTree, Label, LabeledSubtree, Labeling, LemmaReport, TreeParams, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Annotation(#[from] StabilityError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("{0}")]
    Invalid(String),
}

impl From<serde_json::Error> for DocError {
    fn from(e: serde_json::Error) -> Self {
        DocError::Json(e.to_string())
    }
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, DocError> {
    Ok(serde_json::from_str(text)?)
}

pub fn render<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetDoc {
    pub universe: Vec<Element>,
    pub relation: Vec<(Element, Element)>,
    #[serde(default)]
    pub normalized: bool,
}

impl PosetDoc {
    pub fn from_poset(p: &FinitePoset) -> Self {
        PosetDoc {
            universe: p.universe().to_vec(),
            relation: p.pairs().collect(),
            normalized: true,
        }
    }

    /// Validates the listed relation plus reflexive pairs; no closure.
    pub fn to_poset(&self) -> Result<FinitePoset, DocError> {
        let mut universe = self.universe.clone();
        universe.sort_unstable();
        if universe.windows(2).any(|w| w[0] == w[1]) {
            return Err(DocError::Invalid("universe lists an element twice".into()));
        }
        let refl = universe.iter().map(|&x| (x, x));
        let pairs: BTreeSet<(Element, Element)> = self.relation.iter().copied().chain(refl).collect();
        Ok(FinitePoset::validate(&universe, pairs)?)
    }
}

pub type AnnotationEntry = (Element, Tag, u32);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyDoc {
    pub min_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDoc {
    #[serde(flatten)]
    pub poset: PosetDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<Vec<AnnotationEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_tag: Option<TypeTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_flag: Option<TypeFlag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyDoc>,
}

fn entries(ann: &StableAnnotation) -> Vec<AnnotationEntry> {
    ann.behaviors().iter().map(|(&x, b)| (x, b.tag, b.t)).collect()
}

impl InstanceDoc {
    pub fn from_instance(inst: &ProblemInstance, policy: Option<&SizePolicy>) -> Self {
        InstanceDoc {
            poset: PosetDoc::from_poset(&inst.poset),
            annotation: inst.annotation.as_ref().map(entries),
            type_tag: inst.annotation.as_ref().map(StableAnnotation::type_tag),
            type_flag: inst.type_flag,
            policy: policy.map(|p| PolicyDoc { min_size: p.min_size }),
        }
    }

    pub fn to_instance(&self) -> Result<ProblemInstance, DocError> {
        let poset = self.poset.to_poset()?;
        let annotation = match (&self.annotation, self.type_tag) {
            (None, None) => None,
            (Some(_), None) => return Err(DocError::Invalid("annotation without type_tag".into())),
            (entries, Some(t)) => {
                let mut behaviors = BTreeMap::new();
                for &(x, tag, st) in entries.iter().flatten() {
                    if behaviors.insert(x, Behavior::new(tag, st)).is_some() {
                        return Err(DocError::Invalid(format!("element {x} annotated twice")));
                    }
                }
                Some(StableAnnotation::new(behaviors, t)?)
            }
        };
        Ok(ProblemInstance {
            poset,
            annotation,
            type_flag: self.type_flag,
        })
    }

    pub fn policy(&self) -> Result<Option<SizePolicy>, DocError> {
        self.policy
            .as_ref()
            .map(|p| SizePolicy::new(p.min_size).map_err(DocError::from))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub kind: SolutionKind,
    pub elements: BTreeSet<Element>,
}

impl SolutionDoc {
    pub fn from_solution(s: &SolutionSet) -> Self {
        SolutionDoc {
            kind: s.kind,
            elements: s.elements.clone(),
        }
    }

    pub fn to_solution(&self) -> SolutionSet {
        SolutionSet::new(self.kind, self.elements.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionDoc {
    pub pi: PosetDoc,
    pub assign: Vec<AnnotationEntry>,
}

impl ConditionDoc {
    pub fn from_condition(c: &Condition) -> Self {
        ConditionDoc {
            pi: PosetDoc::from_poset(c.pi()),
            assign: c
                .assign()
                .iter()
                .enumerate()
                .map(|(x, b)| (x as Element, b.tag, b.t))
                .collect(),
        }
    }

    pub fn to_condition(&self) -> Result<Condition, DocError> {
        let pi = self.pi.to_poset()?;
        let mut assign = vec![None; pi.len()];
        for &(x, tag, t) in &self.assign {
            match assign.get_mut(x as usize) {
                Some(slot @ None) => *slot = Some(Behavior::new(tag, t)),
                Some(Some(_)) => return Err(DocError::Invalid(format!("element {x} assigned twice"))),
                None => return Err(DocError::Invalid(format!("element {x} outside the order"))),
            }
        }
        let got = assign.iter().flatten().count();
        if got != pi.len() {
            return Err(ConditionError::IncompleteAssignment {
                expected: pi.len(),
                got,
            }
            .into());
        }
        Ok(validate_condition(pi, assign.into_iter().flatten().collect())?)
    }
}

/// A machine given by built-in name or as an explicit table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MachineSpec {
    Builtin(String),
    Table(MachineFile),
}

impl MachineSpec {
    pub fn to_machine(&self) -> Result<OracleMachine, DocError> {
        Ok(match self {
            MachineSpec::Builtin(name) => builtin(name)?,
            MachineSpec::Table(f) => f.clone().into_machine()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectorDoc {
    pub machine: MachineSpec,
    #[serde(default)]
    pub oracle: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectorsDoc {
    pub selectors: Vec<SelectorDoc>,
}

impl SelectorsDoc {
    pub fn to_selectors(&self) -> Result<Vec<Selector>, DocError> {
        self.selectors
            .iter()
            .map(|s| Ok(Selector::new(s.machine.to_machine()?, s.oracle.iter().copied())))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNodeDoc {
    pub alpha: Alpha,
    pub label: Label,
    pub terminal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub in_labeled_subtree: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub params: TreeParams,
    pub machine: String,
    pub kappa: usize,
    pub nodes: Vec<TreeNodeDoc>,
    pub lemma: LemmaReport,
}

impl TreeDoc {
    pub fn new(t: &ExtensionTree, lb: &Labeling, tl: &LabeledSubtree, lemma: LemmaReport) -> Self {
        TreeDoc {
            params: t.params().clone(),
            machine: t.delta().name().to_owned(),
            kappa: lb.kappa,
            nodes: t
                .nodes()
                .map(|a| TreeNodeDoc {
                    alpha: a.clone(),
                    label: lb.get(a),
                    terminal: t.is_terminal(a),
                    witness: t.witness(a).cloned(),
                    in_labeled_subtree: tl.nodes.contains(a),
                })
                .collect(),
            lemma,
        }
    }

    pub fn labeling(&self) -> Labeling {
        Labeling {
            kappa: self.kappa,
            labels: self.nodes.iter().map(|n| (n.alpha.clone(), n.label)).collect(),
        }
    }
}
