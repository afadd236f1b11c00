//! Grounding: quantifier enumeration, NNF, ground actions with conditional
//! effect sub-actions, derived-predicate confirm actions, and the
//! proposition dependency cache.

mod forest;
mod nnf;
mod task;

pub use forest::{Counters, SatForest};
pub use nnf::{enumerate_quantifiers, for_each_binding, substitute, to_nnf, Lit, Nnf};
pub use task::{ground_task, ActionKind, GroundAction, GroundError, GroundOptions, GroundTask, DEFAULT_MAX_ACTIONS};

pub type PropId = usize;
pub type ActionId = usize;
pub type ObjId = usize;
