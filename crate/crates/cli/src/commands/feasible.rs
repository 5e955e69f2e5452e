use serde_json::json;

use bell_lab::feasibility::{
    atom_signs, facets_n3, joint_feasible, joint_feasible_exact, CorrelationTarget, Moments,
};

use crate::report::{Check, Report, Table};
use crate::{CliError, ExperimentConfig, FeasibleArgs};

const CLAIM: &str =
    "pairwise correlations come from a joint distribution iff they lie in the correlation polytope";

pub fn target_from_args(a: &FeasibleArgs) -> Result<CorrelationTarget, CliError> {
    if let Some(path) = &a.target {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read target {}: {e}", path.display())))?;
        return serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad target {}: {e}", path.display())));
    }
    match a.triple.as_deref() {
        Some(&[c01, c02, c12]) => Ok(CorrelationTarget::triple(c01, c02, c12)),
        _ => Err(CliError::Usage("--triple needs three values c01,c02,c12".into())),
    }
}

pub fn run(exp: &ExperimentConfig, a: &FeasibleArgs) -> Result<Report, CliError> {
    let target = target_from_args(a)?;
    target.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let mut report = Report::new(
        "feasible",
        CLAIM,
        exp.seed,
        serde_json::to_value(&target).unwrap_or_default(),
    );
    let r = joint_feasible(&target)?;
    let exact = joint_feasible_exact(&target)?;
    report.check(Check::new(
        "exact_agrees",
        "floating-point and exact rational solves reach the same verdict",
        exact.feasible == r.feasible && exact.boundary == r.boundary,
        format!("float {}, exact {}", r.verdict(), if exact.feasible { "FEASIBLE" } else { "INFEASIBLE" }),
    ));
    let facets = if target.n == 3 && !matches!(target.moments, Moments::Values(_)) {
        let f = facets_n3(&target)?;
        let all = f.iter().all(|c| c.satisfied);
        report.check(Check::new(
            "facets_agree",
            "the LP verdict matches the closed-form facets",
            all == r.feasible,
            format!("{} of 4 facets satisfied", f.iter().filter(|c| c.satisfied).count()),
        ));
        Some(f)
    } else {
        None
    };

    let summary = match (&r.certificate, r.feasible) {
        (_, true) if r.witness_is_uniform() => "FEASIBLE, witness = uniform".to_string(),
        (_, true) if r.boundary => "FEASIBLE (boundary)".to_string(),
        (_, true) => "FEASIBLE".to_string(),
        (Some(c), false) => format!("INFEASIBLE, violated: {} ({:.10})", c.inequality, c.value_at_target),
        (None, false) => "INFEASIBLE".to_string(),
    };
    report.results = json!({
        "summary": summary,
        "verdict": r.verdict(),
        "result": r,
        "exact_certificate_value": exact.certificate_value.map(|v| v.to_string()),
        "facets": facets,
    });

    if let Some(w) = &r.witness {
        let labels: Vec<String> = (0..target.n)
            .map(|i| target.labels.as_ref().map_or_else(|| format!("x{i}"), |l| l[i].clone()))
            .collect();
        let mut cols: Vec<&str> = vec!["atom"];
        cols.extend(labels.iter().map(String::as_str));
        cols.push("probability");
        let mut t = Table::new("witness.csv", "joint distribution over sign assignments", &cols);
        for (k, (signs, p)) in atom_signs(target.n).iter().zip(w).enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(signs.iter().map(|s| s.to_string()));
            row.push(p.to_string());
            t.push(row);
        }
        report.table(t);
    }
    Ok(report)
}
