mod feasible;
mod identities;
mod inequalities;
mod lhv;
mod nocorr;
mod protocol;
mod singlet;

use bell_lab::seqcore::{correlation, CorrelationEstimate, DichotomicSequence};

use crate::report::{Check, Report};
use crate::{CliError, Command, ExperimentConfig};

pub use feasible::target_from_args;

/// z-score used by every statistical check.
pub const Z: f64 = 4.5;

pub fn dispatch(exp: &ExperimentConfig, cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Identities(a) => identities::run(exp, a),
        Command::Singlet(a) => singlet::run(exp, a),
        Command::V3 => inequalities::run_v3(exp),
        Command::V4 => inequalities::run_v4(exp),
        Command::Nocorr(a) => nocorr::run(exp, a),
        Command::Protocol(a) => protocol::run(exp, a),
        Command::Feasible(a) => feasible::run(exp, a),
        Command::Lhv(a) => lhv::run(exp, a),
    }
}

pub(crate) fn sample_count(exp: &ExperimentConfig, default: u64) -> Result<usize, CliError> {
    let n = exp.n.unwrap_or(default);
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    usize::try_from(n).map_err(|_| CliError::Usage(format!("--n {n} too large")))
}

pub(crate) fn corr(x: &DichotomicSequence, y: &DichotomicSequence) -> Result<CorrelationEstimate, CliError> {
    Ok(correlation(x, y)?)
}

/// `|estimate − expected| ≤ Z/√n`.
pub(crate) fn within_unit_se(name: &str, claim: &str, est: &CorrelationEstimate, expected: f64) -> Check {
    let tol = Z / (est.n as f64).sqrt();
    let dev = (est.value - expected).abs();
    Check::new(
        name,
        claim,
        dev <= tol,
        format!("estimate {:.6}, expected {:.6}, |diff| {:.2e} <= {:.2e}", est.value, expected, dev, tol),
    )
}

pub(crate) fn write_batch_csv(batch: &bell_lab::models::Batch) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    batch.write_csv(&mut buf)?;
    Ok(buf)
}

/// Target whose pairs and first moments are the empirical values of `seqs`,
/// so that the empirical joint distribution itself is a witness.
pub(crate) fn empirical_target(
    labels: &[&str],
    seqs: &[&DichotomicSequence],
    pairs: &[(usize, usize)],
) -> Result<bell_lab::feasibility::CorrelationTarget, CliError> {
    use bell_lab::feasibility::{CorrelationTarget, Moments};
    let mut values = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        values.push((i, j, corr(seqs[i], seqs[j])?.value));
    }
    let means = seqs
        .iter()
        .map(|s| s.values().map(i64::from).sum::<i64>() as f64 / s.len() as f64)
        .collect();
    Ok(CorrelationTarget::new(seqs.len(), &values)
        .with_labels(labels)
        .with_moments(Moments::Values(means)))
}
