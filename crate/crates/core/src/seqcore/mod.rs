//! Dichotomic sequences, measurement axes, and exact finite-length correlation identities.

mod angle;
mod identities;
mod sequence;
mod suite;

pub use angle::{canonicalize, Angle};
pub use identities::{
    bell3_finite, chsh_finite, correlation, prob_equal, running_mean, sica3_residual, Bell3, Chsh,
    CorrelationEstimate, RunningMean,
};
pub use sequence::{read_csv, write_csv, Block, Dichotomic, DichotomicSequence};
pub use suite::{run_identity_suite, Counterexample, IdentityKind, IdentityReport, IdentitySuiteConfig};
