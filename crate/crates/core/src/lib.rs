//! Desk-scale laboratory for Bell-type gedanken experiments.
//!
//! * [`seqcore`]: ±1 sequences, correlation estimators and the finite identities behind
//!   the three- and four-axis Bell inequalities.
//! * [`models`]: outcome samplers (singlet pairs, sequential collapse, a local hidden
//!   variable model, a non-local toy).
//! * [`inequality`]: quantum correlations, the locality-derived table and the canonical
//!   falsifying scenarios.
//! * [`feasibility`]: joint-distribution feasibility of target correlations with witnesses
//!   and separating certificates.
//! * [`protocol`]: the block-threshold protocol that reads one of two ±1 sources per
//!   time step and still detects their isochronous correlation.

pub mod error;
pub mod feasibility;
pub mod inequality;
pub mod models;
pub mod protocol;
pub mod rng;
pub mod seqcore;

pub use error::{Error, Result};
pub use rng::RngStream;
