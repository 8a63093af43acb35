//! Numerical laboratory for weakly self-avoiding walk on `Z^d`.
//!
//! The crate computes two-point functions, the decay quantity `φ_β(S)` and
//! related observables with certified enclosures, checks the inequalities
//! relating them on finite instances, and provides simple random walk
//! oracles and a Monte Carlo cross-check.

pub mod cli;
pub mod enumerate;
pub mod error;
pub mod lattice;
pub mod mcsampler;
pub mod observables;
pub mod srw;
pub mod verifier;
pub mod walks;

pub use error::{Error, Result};
