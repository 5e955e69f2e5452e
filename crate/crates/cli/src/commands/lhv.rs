use std::f64::consts::PI;

use rand::Rng;
use serde_json::json;

use bell_lab::feasibility::joint_feasible;
use bell_lab::inequality::{v3_evaluate, v4_evaluate, Labeled, Provenance, V3Scenario, V4Scenario};
use bell_lab::models::{lhv_batch, lhv_expected_correlation, Axis};
use bell_lab::seqcore::{bell3_finite, chsh_finite, Angle};
use bell_lab::RngStream;

use super::{corr, empirical_target, sample_count, within_unit_se};
use crate::report::{Check, Report, Table};
use crate::{CliError, ExperimentConfig, LhvArgs};

const CLAIM: &str = "data from a local realist model satisfy every Bell inequality";

fn measured(v: f64) -> Option<Labeled> {
    Some(Labeled::new(v, Provenance::EmpiricallyEstimated))
}

pub fn run(exp: &ExperimentConfig, a: &LhvArgs) -> Result<Report, CliError> {
    let n = sample_count(exp, 100_000)?;
    if a.batches == 0 {
        return Err(CliError::Usage("--batches must be at least 1".into()));
    }
    let mut report = Report::new("lhv", CLAIM, exp.seed, json!({ "n": n, "batches": a.batches }));
    let mut table = Table::new(
        "batches.csv",
        "per batch: axes (radians), correlations and inequality values",
        &[
            "batch", "theta_e", "theta_e_prime", "theta_p", "theta_p_prime", "c_ep", "c_ee_prime",
            "c_pe_prime", "v3_lhs", "v3_rhs", "s_value", "v3_feasible", "v4_feasible",
        ],
    );
    let mut batches = Vec::new();
    let (mut v3_ok, mut v4_ok, mut model_ok) = (0u64, 0u64, true);
    for b in 0..a.batches {
        let mut axis_rng = RngStream::new(exp.seed, 2 * b).rng();
        let mut draw = || Angle::from_radians(axis_rng.random_range(-PI..PI));
        let (te, te2, tp, tp2) = (draw(), draw(), draw(), draw());
        let batch = lhv_batch(te, tp, &[Axis::alice(te2), Axis::bob(tp2)], n, RngStream::new(exp.seed, 2 * b + 1))?;
        let (e, p) = (&batch.e, &batch.p);
        let (e2, p2) = (&batch.extra[0].1, &batch.extra[1].1);

        let c_ep = corr(e, p)?;
        let sawtooth = within_unit_se("sawtooth", "", &c_ep, lhv_expected_correlation(te, tp));
        model_ok &= sawtooth.passed;

        let (c_ee2, c_pe2) = (corr(e, e2)?, corr(p, e2)?);
        let v3 = v3_evaluate(&V3Scenario {
            theta_p: tp,
            theta_e: te,
            theta_e_prime: te2,
            c_ep: measured(c_ep.value),
            c_ee_prime: measured(c_ee2.value),
            c_pe_prime: measured(c_pe2.value),
        })?;
        let id3 = bell3_finite(e, p, e2)?;
        let f3 = joint_feasible(&empirical_target(&["P", "E", "E'"], &[p, e, e2], &[(0, 1), (0, 2), (1, 2)])?)?;

        let cells = [(0usize, 2usize), (0, 3), (1, 2), (1, 3)];
        let seqs = [e, e2, p, p2];
        let c4 = cells
            .iter()
            .map(|&(i, j)| corr(seqs[i], seqs[j]).map(|c| c.value))
            .collect::<Result<Vec<_>, _>>()?;
        let v4 = v4_evaluate(&V4Scenario {
            theta_e: te,
            theta_e_prime: te2,
            theta_p: tp,
            theta_p_prime: tp2,
            c_ep: measured(c4[0]),
            c_ep_prime: measured(c4[1]),
            c_e_prime_p: measured(c4[2]),
            c_e_prime_p_prime: measured(c4[3]),
        })?;
        let id4 = chsh_finite(e2, e, p, p2)?;
        let f4 = joint_feasible(&empirical_target(&["E", "E'", "P", "P'"], &seqs, &cells)?)?;

        v3_ok += (!v3.violated && id3.holds && f3.feasible) as u64;
        v4_ok += (!v4.violated && id4.holds && f4.feasible) as u64;
        table.push([
            b.to_string(),
            te.radians().to_string(),
            te2.radians().to_string(),
            tp.radians().to_string(),
            tp2.radians().to_string(),
            c_ep.value.to_string(),
            c_ee2.value.to_string(),
            c_pe2.value.to_string(),
            v3.lhs.to_string(),
            v3.rhs.to_string(),
            v4.s_value.to_string(),
            f3.feasible.to_string(),
            f4.feasible.to_string(),
        ]);
        batches.push(json!({
            "batch": b,
            "axes_rad": { "e": te.radians(), "e_prime": te2.radians(), "p": tp.radians(), "p_prime": tp2.radians() },
            "v3": v3,
            "v4": v4,
            "v3_verdict": f3.verdict(),
            "v4_verdict": f4.verdict(),
            "sawtooth": sawtooth.detail,
        }));
    }
    report.check(Check::new(
        "v3_never_violated",
        CLAIM,
        v3_ok == a.batches,
        format!("{v3_ok} of {} batches satisfy the three-axis inequality and are feasible", a.batches),
    ));
    report.check(Check::new(
        "v4_never_violated",
        CLAIM,
        v4_ok == a.batches,
        format!("{v4_ok} of {} batches satisfy the CHSH bound and are feasible", a.batches),
    ));
    report.check(Check::new(
        "sawtooth_correlation",
        "the circle model correlates as the sawtooth -(1 - 2|delta|/pi)",
        model_ok,
        "measured <E,P> of every batch within tolerance".to_string(),
    ));
    report.results = json!({ "batches": batches });
    report.table(table);
    Ok(report)
}
