//! Executable combinatorics of the chain-antichain principle.
//!
//! The crate models finite partial orders and the chain-antichain family of
//! instance-solution problems, the explicit reductions between them,
//! reduction games, the stable-poset forcing notion, and extension trees
//! with labelings. Every "infinite" quantifier is truncated to a finite,
//! configurable bound.

pub mod coding;
pub mod forcing;
pub mod game;
pub mod gen;
pub mod json;
pub mod machines;
pub mod par;
pub mod poset;
pub mod problems;
pub mod reductions;
pub mod trees;

pub use poset::{
    classify_stability, Behavior, Element, FinitePoset, PosetError, SolutionKind, SolutionSet,
    StabilityError, StableAnnotation, Tag, TypeTag,
};
pub use problems::{ProblemError, ProblemInstance, ProblemKind, SizePolicy, TypeFlag};
pub use reductions::ReductionError;
