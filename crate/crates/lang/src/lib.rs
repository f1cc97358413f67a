//! Object languages for the big-step framework: a typed λ-calculus and two
//! Featherweight Java variants.

pub mod lambda;
pub mod fj;
