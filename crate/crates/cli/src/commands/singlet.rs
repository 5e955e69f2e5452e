use std::f64::consts::PI;

use serde_json::json;

use bell_lab::inequality::qm_correlation;
use bell_lab::models::singlet_batch;
use bell_lab::seqcore::{running_mean, Angle};
use bell_lab::RngStream;

use super::{corr, sample_count, write_batch_csv, Z};
use crate::report::{Check, CsvDoc, Report, Table};
use crate::{CliError, ExperimentConfig, SingletArgs};

const CLAIM: &str = "singlet outcomes along two axes correlate as -cos(theta_e - theta_p)";

/// Rows kept in the running-mean table.
const TRAJECTORY_POINTS: usize = 1000;

struct Point {
    delta: f64,
    theta_e: Angle,
    estimate: f64,
    expected: f64,
    std_err: f64,
    tol: f64,
    passed: bool,
}

fn point_check(theta_e: Angle, theta_p: Angle, value: f64, n: usize) -> Point {
    let expected = qm_correlation(theta_e, theta_p);
    let tol = Z * ((1.0 - expected * expected).max(0.0) / n as f64).sqrt();
    Point {
        delta: theta_e.minus(theta_p),
        theta_e,
        estimate: value,
        expected,
        std_err: tol / Z,
        tol,
        passed: (value - expected).abs() <= tol,
    }
}

pub fn run(exp: &ExperimentConfig, a: &SingletArgs) -> Result<Report, CliError> {
    let n = sample_count(exp, 1_000_000)?;
    let config = json!({
        "n": n,
        "theta_e_rad": a.theta_e.radians(),
        "theta_p_rad": a.theta_p.radians(),
        "grid": a.grid,
        "grid_points": a.grid_points,
    });
    let mut report = Report::new("singlet", CLAIM, exp.seed, config);
    if a.grid {
        if a.grid_points == 0 {
            return Err(CliError::Usage("--grid-points must be at least 1".into()));
        }
        run_grid(exp, a, n, &mut report)?;
    } else {
        run_single(exp, a, n, &mut report)?;
    }
    Ok(report)
}

fn run_single(exp: &ExperimentConfig, a: &SingletArgs, n: usize, report: &mut Report) -> Result<(), CliError> {
    let batch = singlet_batch(a.theta_e, a.theta_p, n, RngStream::new(exp.seed, 0))?;
    let c = corr(&batch.e, &batch.p)?;
    let pt = point_check(a.theta_e, a.theta_p, c.value, n);
    report.check(Check::new(
        "malus_correlation",
        CLAIM,
        pt.passed,
        format!("estimate {:.6}, expected {:.6}, tolerance {:.2e}", pt.estimate, pt.expected, pt.tol),
    ));
    if a.theta_e == a.theta_p {
        report.check(Check::new(
            "equal_axes_anticorrelate",
            "equal axes give perfectly opposite outcomes",
            c.sum == -(n as i64),
            format!("correlation {}", c.value),
        ));
    }
    report.results = json!({
        "delta_theta_rad": pt.delta,
        "correlation": c,
        "expected": pt.expected,
        "prob_equal": c.prob_equal(),
    });

    let rm = running_mean(&batch.e, &batch.p)?;
    let stride = (n / TRAJECTORY_POINTS).max(1);
    let mut t = Table::new(
        "running_mean.csv",
        "running mean of e*p over the first k pairs, every stride-th k",
        &["k", "mean"],
    );
    for (i, m) in rm.trajectory.iter().enumerate() {
        let k = i + 1;
        if k % stride == 0 || k == n {
            t.push([k.to_string(), m.to_string()]);
        }
    }
    report.table(t);
    report.raw(
        CsvDoc {
            file: "samples.csv".into(),
            description: "one row per pair; angles in radians".into(),
            columns: ["pair_index", "theta_p", "theta_e", "p", "e", "model", "seed"]
                .map(String::from)
                .to_vec(),
        },
        write_batch_csv(&batch)?,
    );
    Ok(())
}

fn run_grid(exp: &ExperimentConfig, a: &SingletArgs, n: usize, report: &mut Report) -> Result<(), CliError> {
    let mut t = Table::new(
        "curve.csv",
        "empirical and predicted correlation against the angle difference (radians)",
        &["delta_theta", "theta_e", "theta_p", "n", "correlation", "expected", "std_err", "tolerance"],
    );
    let mut points = Vec::new();
    let mut all = true;
    for k in 0..a.grid_points {
        let shift = 2.0 * PI * k as f64 / a.grid_points as f64;
        let theta_e = a.theta_p.rotate(shift);
        let batch = singlet_batch(theta_e, a.theta_p, n, RngStream::new(exp.seed, k as u64))?;
        let c = corr(&batch.e, &batch.p)?;
        let pt = point_check(theta_e, a.theta_p, c.value, n);
        if k == 0 {
            report.check(Check::new(
                "zero_difference_exact",
                "equal axes give perfectly opposite outcomes",
                c.sum == -(n as i64),
                format!("correlation {}", c.value),
            ));
        }
        all &= pt.passed;
        t.push([
            pt.delta.to_string(),
            pt.theta_e.radians().to_string(),
            a.theta_p.radians().to_string(),
            n.to_string(),
            pt.estimate.to_string(),
            pt.expected.to_string(),
            pt.std_err.to_string(),
            pt.tol.to_string(),
        ]);
        points.push(json!({
            "k": k,
            "delta_theta_rad": pt.delta,
            "correlation": pt.estimate,
            "expected": pt.expected,
            "tolerance": pt.tol,
            "passed": pt.passed,
        }));
    }
    let failed = points.iter().filter(|p| p["passed"] == false).count();
    report.check(Check::new(
        "malus_grid",
        CLAIM,
        all,
        format!("{} of {} grid points within {Z} standard errors", points.len() - failed, points.len()),
    ));
    report.results = json!({ "points": points });
    report.table(t);
    Ok(())
}
