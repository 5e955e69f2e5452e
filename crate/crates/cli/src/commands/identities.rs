use serde_json::json;

use bell_lab::seqcore::{run_identity_suite, IdentitySuiteConfig};

use super::sample_count;
use crate::report::{Check, Report, Table};
use crate::{CliError, ExperimentConfig, IdentitiesArgs};

const CLAIM: &str = "finite-length Bell identities hold for every ±1 sequence";

pub fn run(exp: &ExperimentConfig, a: &IdentitiesArgs) -> Result<Report, CliError> {
    let n_random = match exp.n {
        Some(0) => 0,
        _ => sample_count(exp, 100_000)?,
    };
    if a.random_len == 0 {
        return Err(CliError::Usage("--random-len must be at least 1".into()));
    }
    if a.max_exhaustive_len > 4 {
        return Err(CliError::Usage("--max-exhaustive-len is limited to 4".into()));
    }
    let cfg = IdentitySuiteConfig {
        n_random,
        random_len: a.random_len,
        max_exhaustive_len: a.max_exhaustive_len,
        seed: exp.seed,
        inject_corruption: a.inject_corruption,
    };
    let r = run_identity_suite(&cfg);
    let mut report = Report::new("identities", CLAIM, exp.seed, serde_json::to_value(&cfg).unwrap_or_default());
    let detail = match &r.first_counterexample {
        None => "0 violations".to_string(),
        Some(c) => format!(
            "{} violations; first: {:?} in {} case {}",
            r.violations, c.identity, c.regime, c.case_index
        ),
    };
    report.check(Check::new("identities_hold", CLAIM, r.violations == 0, detail));
    report.results = json!({
        "summary": if r.violations == 0 { "0 violations".to_string() } else { format!("{} violations", r.violations) },
        "suite": r,
    });
    let mut t = Table::new("identities.csv", "case counts per regime", &["regime", "arity", "cases"]);
    t.push(["exhaustive", "3", &r.exhaustive_triples.to_string()]);
    t.push(["exhaustive", "4", &r.exhaustive_quadruples.to_string()]);
    t.push(["random", "3", &r.random_triples.to_string()]);
    t.push(["random", "4", &r.random_quadruples.to_string()]);
    report.table(t);
    Ok(report)
}
