//! Big-step semantics as rule oracles, partial evaluation trees over them,
//! and the constructions and audits built on top.

pub mod bigstep;
pub mod constructions;
pub mod inference;
pub mod pet;
pub mod soundness;

pub use bigstep::{Activation, Continuation, Judgment, LanguageSemantics, RuleName, StartStep};
pub use pet::{Outcome, Pet, Strategy};
