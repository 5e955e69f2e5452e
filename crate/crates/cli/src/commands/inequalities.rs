use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde_json::json;

use bell_lab::feasibility::{joint_feasible, CorrelationTarget, FeasibilityResult};
use bell_lab::inequality::{
    qm_correlation, v3_canonical, v3_evaluate, v4_canonical, v4_evaluate, Labeled, Provenance,
    V3Scenario, V4Scenario,
};
use bell_lab::models::{lhv_batch, sequential_collapse_batch, singlet_batch, Axis, OrderTag};
use bell_lab::seqcore::{bell3_finite, chsh_finite};
use bell_lab::RngStream;

use super::{corr, empirical_target, sample_count, Z};
use crate::report::{Check, Report, Table};
use crate::{CliError, ExperimentConfig};

const V3_CLAIM: &str =
    "quantum and locality-derived correlations violate the three-axis inequality (sqrt(2) <= 1)";
const V4_CLAIM: &str = "quantum correlations reach 2*sqrt(2) against the CHSH bound 2";
const EXACT: f64 = 1e-12;
const LP_TOL: f64 = 1e-9;

fn measured(value: f64) -> Option<Labeled> {
    Some(Labeled::new(value, Provenance::EmpiricallyEstimated))
}

fn provenance_name(p: Provenance) -> String {
    serde_json::to_value(p)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

fn certificate_json(r: &FeasibilityResult) -> serde_json::Value {
    json!({
        "verdict": r.verdict(),
        "boundary": r.boundary,
        "certificate": r.certificate,
    })
}

pub fn run_v3(exp: &ExperimentConfig) -> Result<Report, CliError> {
    let n = sample_count(exp, 1_000_000)?;
    let scenario = v3_canonical();
    let mut report = Report::new(
        "v3",
        V3_CLAIM,
        exp.seed,
        json!({
            "n": n,
            "theta_p_rad": scenario.theta_p.radians(),
            "theta_e_rad": scenario.theta_e.radians(),
            "theta_e_prime_rad": scenario.theta_e_prime.radians(),
        }),
    );
    let ev = v3_evaluate(&scenario)?;
    report.check(Check::new(
        "analytic_violation",
        V3_CLAIM,
        ev.violated && (ev.combined_lhs - SQRT_2).abs() <= EXACT && ev.combined_rhs == 1.0,
        format!("{:.8} <= {} is false", ev.combined_lhs, ev.combined_rhs),
    ));
    report.check(Check::new(
        "analytic_terms",
        "|<E,P> - <E,E'>| = sqrt(2)/2 against 1 - <P,E'> = 1 - sqrt(2)/2",
        (ev.lhs - FRAC_1_SQRT_2).abs() <= EXACT && (ev.rhs - (1.0 - FRAC_1_SQRT_2)).abs() <= EXACT,
        format!("lhs {:.12}, rhs {:.12}", ev.lhs, ev.rhs),
    ));

    // P, E, E'
    let value = |c: Option<Labeled>| c.map(|l| l.value).unwrap_or(f64::NAN);
    let target = CorrelationTarget::new(
        3,
        &[
            (0, 1, value(scenario.c_ep)),
            (0, 2, value(scenario.c_pe_prime)),
            (1, 2, value(scenario.c_ee_prime)),
        ],
    )
    .with_labels(&["P", "E", "E'"]);
    let feas = joint_feasible(&target)?;
    let cert_value = feas.certificate.as_ref().map(|c| c.value_at_target);
    report.check(Check::new(
        "target_infeasible",
        "no joint distribution carries the assembled correlation triple",
        !feas.feasible && cert_value.is_some_and(|v| (v - (1.0 - SQRT_2)).abs() <= LP_TOL),
        format!(
            "{}; {}",
            feas.verdict(),
            feas.certificate.as_ref().map(|c| format!("{} evaluates to {:.10}", c.inequality, c.value_at_target)).unwrap_or_default()
        ),
    ));

    let mut table = Table::new(
        "correlations.csv",
        "correlations entering the three-axis inequality by source",
        &["source", "pair", "value", "provenance", "std_err"],
    );
    for (pair, c) in [("P,E", scenario.c_ep), ("P,E'", scenario.c_pe_prime), ("E,E'", scenario.c_ee_prime)] {
        let c = c.expect("canonical scenario is populated");
        table.push(["analytic", pair, &c.value.to_string(), &provenance_name(c.provenance), "0"]);
    }

    // sequential measurements: P, then E, then E'
    let seq = sequential_collapse_batch(
        scenario.theta_p,
        scenario.theta_e,
        scenario.theta_e_prime,
        OrderTag::PFirst,
        n,
        RngStream::new(exp.seed, 0),
    )?;
    let seq_e_prime = seq.e_prime.as_ref().expect("triple batch");
    // circle model: E and P measured, E' read from the same hidden variable
    let lhv = lhv_batch(
        scenario.theta_e,
        scenario.theta_p,
        &[Axis::alice(scenario.theta_e_prime)],
        n,
        RngStream::new(exp.seed, 1),
    )?;
    let lhv_e_prime = &lhv.extra[0].1;

    let mut empirical = Vec::new();
    for (source, p, e, e_prime) in [
        ("sequential_collapse", &seq.p, &seq.e, seq_e_prime),
        ("lhv_circle", &lhv.p, &lhv.e, lhv_e_prime),
    ] {
        let (ep, pep, eep) = (corr(e, p)?, corr(p, e_prime)?, corr(e, e_prime)?);
        let sc = V3Scenario {
            c_ep: measured(ep.value),
            c_ee_prime: measured(eep.value),
            c_pe_prime: measured(pep.value),
            ..scenario
        };
        let ev = v3_evaluate(&sc)?;
        let identity = bell3_finite(e, p, e_prime)?;
        let t = empirical_target(&["P", "E", "E'"], &[p, e, e_prime], &[(0, 1), (0, 2), (1, 2)])?;
        let f = joint_feasible(&t)?;
        report.check(Check::new(
            &format!("{source}_satisfies_v3"),
            "correlations of one jointly sampled batch obey the three-axis inequality",
            !ev.violated && identity.holds && f.feasible,
            format!("lhs {:.6} <= rhs {:.6}; {}", ev.lhs, ev.rhs, f.verdict()),
        ));
        for (pair, c) in [("P,E", ep), ("P,E'", pep), ("E,E'", eep)] {
            table.push([source, pair, &c.value.to_string(), "empirically_estimated", &c.std_err.to_string()]);
        }
        empirical.push(json!({
            "source": source,
            "correlations": { "p_e": ep, "p_e_prime": pep, "e_e_prime": eep },
            "evaluation": ev,
            "verdict": f.verdict(),
        }));
    }

    report.results = json!({
        "analytic": {
            "scenario": scenario,
            "lhs": ev.combined_lhs,
            "rhs": ev.combined_rhs,
            "inequality": "|<E,P> - <E,E'>| + <P,E'> <= 1",
            "violated": ev.violated,
            "evaluation": ev,
        },
        "feasibility": certificate_json(&feas),
        "verdict": feas.verdict(),
        "empirical": empirical,
    });
    report.table(table);
    Ok(report)
}

pub fn run_v4(exp: &ExperimentConfig) -> Result<Report, CliError> {
    let n = sample_count(exp, 1_000_000)?;
    let sc = v4_canonical();
    let mut report = Report::new(
        "v4",
        V4_CLAIM,
        exp.seed,
        json!({
            "n": n,
            "theta_e_rad": sc.theta_e.radians(),
            "theta_e_prime_rad": sc.theta_e_prime.radians(),
            "theta_p_rad": sc.theta_p.radians(),
            "theta_p_prime_rad": sc.theta_p_prime.radians(),
        }),
    );
    let ev = v4_evaluate(&sc)?;
    report.check(Check::new(
        "analytic_violation",
        V4_CLAIM,
        ev.violated && (ev.s_value - 2.0 * SQRT_2).abs() <= EXACT,
        format!("{:.12} <= {} is false", ev.s_value, ev.bound),
    ));

    // E, E', P, P'
    let settings = [sc.theta_e, sc.theta_e_prime, sc.theta_p, sc.theta_p_prime];
    let cells = [(0usize, 2usize), (0, 3), (1, 2), (1, 3)];
    let value = |c: Option<Labeled>| c.map(|l| l.value).unwrap_or(f64::NAN);
    let analytic = [sc.c_ep, sc.c_ep_prime, sc.c_e_prime_p, sc.c_e_prime_p_prime].map(value);
    let pairs: Vec<_> = cells.iter().zip(analytic).map(|(&(i, j), v)| (i, j, v)).collect();
    let target = CorrelationTarget::new(4, &pairs).with_labels(&["E", "E'", "P", "P'"]);
    let feas = joint_feasible(&target)?;
    let slack = feas.certificate.as_ref().map(|c| c.violation);
    report.check(Check::new(
        "target_infeasible",
        "no joint distribution carries the four CHSH correlations",
        !feas.feasible && slack.is_some_and(|s| (s - (2.0 * SQRT_2 - 2.0)).abs() <= LP_TOL),
        format!(
            "{}; certificate slack {:.10}",
            feas.verdict(),
            slack.unwrap_or(f64::NAN)
        ),
    ));

    let mut table = Table::new(
        "correlations.csv",
        "CHSH correlations by source",
        &["source", "pair", "value", "std_err"],
    );
    let names = ["E,P", "E,P'", "E',P", "E',P'"];
    for (name, v) in names.iter().zip(analytic) {
        table.push(["analytic", name, &v.to_string(), "0"]);
    }

    // four separate singlet experiments, one per setting pair
    let mut singlet = Vec::new();
    for (k, &(i, j)) in cells.iter().enumerate() {
        let b = singlet_batch(settings[i], settings[j], n, RngStream::new(exp.seed, k as u64))?;
        let c = corr(&b.e, &b.p)?;
        table.push(["singlet", names[k], &c.value.to_string(), &c.std_err.to_string()]);
        singlet.push(c);
    }
    let s_hat = (singlet[0].value + singlet[1].value).abs() + (singlet[2].value - singlet[3].value).abs();
    let var: f64 = cells
        .iter()
        .map(|&(i, j)| {
            let q = qm_correlation(settings[i], settings[j]);
            (1.0 - q * q) / n as f64
        })
        .sum();
    let tol = Z * var.sqrt();
    report.check(Check::new(
        "singlet_estimate",
        "separately measured singlet pairs reproduce the quantum CHSH value",
        (s_hat - 2.0 * SQRT_2).abs() <= tol,
        format!("S = {s_hat:.6}, |S - 2sqrt(2)| <= {tol:.2e}"),
    ));

    // circle model: E and P measured, E' and P' read from the same hidden variable
    let lhv = lhv_batch(
        sc.theta_e,
        sc.theta_p,
        &[Axis::alice(sc.theta_e_prime), Axis::bob(sc.theta_p_prime)],
        n,
        RngStream::new(exp.seed, 4),
    )?;
    let seqs = [&lhv.e, &lhv.extra[0].1, &lhv.p, &lhv.extra[1].1];
    let mut lhv_corr = Vec::new();
    for (k, &(i, j)) in cells.iter().enumerate() {
        let c = corr(seqs[i], seqs[j])?;
        table.push(["lhv_circle", names[k], &c.value.to_string(), &c.std_err.to_string()]);
        lhv_corr.push(c);
    }
    let lhv_sc = V4Scenario {
        c_ep: measured(lhv_corr[0].value),
        c_ep_prime: measured(lhv_corr[1].value),
        c_e_prime_p: measured(lhv_corr[2].value),
        c_e_prime_p_prime: measured(lhv_corr[3].value),
        ..sc
    };
    let lhv_ev = v4_evaluate(&lhv_sc)?;
    // w = E', x = E, y = P, z = P'
    let identity = chsh_finite(seqs[1], seqs[0], seqs[2], seqs[3])?;
    let lhv_t = empirical_target(&["E", "E'", "P", "P'"], &seqs, &cells)?;
    let lhv_f = joint_feasible(&lhv_t)?;
    report.check(Check::new(
        "lhv_circle_satisfies_v4",
        "correlations of one jointly sampled batch obey the CHSH bound",
        !lhv_ev.violated && identity.holds && lhv_f.feasible,
        format!("S = {:.6} <= 2; {}", lhv_ev.s_value, lhv_f.verdict()),
    ));

    report.results = json!({
        "analytic": { "scenario": sc, "evaluation": ev },
        "feasibility": certificate_json(&feas),
        "verdict": feas.verdict(),
        "singlet": { "correlations": singlet, "s_value": s_hat, "tolerance": tol },
        "lhv_circle": { "correlations": lhv_corr, "evaluation": lhv_ev, "verdict": lhv_f.verdict() },
    });
    report.table(table);
    Ok(report)
}
