use serde_json::json;

use bell_lab::feasibility::{joint_feasible, CorrelationTarget};
use bell_lab::inequality::qm_correlation;
use bell_lab::models::{nonlocal_toy_batch, sequential_collapse_batch, OrderTag};
use bell_lab::seqcore::running_mean;
use bell_lab::RngStream;

use super::{corr, empirical_target, sample_count, within_unit_se, write_batch_csv};
use crate::report::{Check, CsvDoc, Report, Table};
use crate::{CliError, ExperimentConfig, NocorrArgs, NocorrModel, OrderArg};

const CLAIM: &str = "successive measurements along orthogonal axes on one side are uncorrelated";
const TRAJECTORY_POINTS: usize = 1000;

/// Expected (⟨P,E⟩, ⟨E,E′⟩, ⟨P,E′⟩) of the sampler.
fn expected(a: &NocorrArgs) -> (f64, f64, f64) {
    let pe = qm_correlation(a.theta_p, a.theta_e);
    let ee = (a.theta_e.radians() - a.theta_e_prime.radians()).cos();
    let pe2 = pe * ee;
    match a.model {
        NocorrModel::Sequential => (pe, ee, pe2),
        NocorrModel::Toy => {
            let c = a.coupling;
            let s = if a.theta_p.radians().cos() + 0.5 >= 0.0 { 1.0 } else { -1.0 };
            (pe, (1.0 - c) * ee + c * s, (1.0 - c) * pe2 + c * s * pe)
        }
    }
}

pub fn run(exp: &ExperimentConfig, a: &NocorrArgs) -> Result<Report, CliError> {
    let n = sample_count(exp, 1_000_000)?;
    if a.model == NocorrModel::Toy && a.order == OrderArg::EFirst {
        return Err(CliError::Usage("the toy model only supports --order p-first".into()));
    }
    let config = json!({
        "n": n,
        "theta_p_rad": a.theta_p.radians(),
        "theta_e_rad": a.theta_e.radians(),
        "theta_e_prime_rad": a.theta_e_prime.radians(),
        "model": format!("{:?}", a.model).to_lowercase(),
        "coupling": a.coupling,
        "order": match a.order { OrderArg::PFirst => "p_first", OrderArg::EFirst => "e_first" },
    });
    let mut report = Report::new("nocorr", CLAIM, exp.seed, config);
    let stream = RngStream::new(exp.seed, 0);
    let batch = match a.model {
        NocorrModel::Sequential => {
            let order = match a.order {
                OrderArg::PFirst => OrderTag::PFirst,
                OrderArg::EFirst => OrderTag::EFirst,
            };
            sequential_collapse_batch(a.theta_p, a.theta_e, a.theta_e_prime, order, n, stream)?
        }
        NocorrModel::Toy => {
            nonlocal_toy_batch(a.theta_e, a.theta_e_prime, a.theta_p, a.coupling, n, stream)?
        }
    };
    let e_prime = batch.e_prime.as_ref().expect("triple batch");
    let (pe, ee, pe2) = (corr(&batch.p, &batch.e)?, corr(&batch.e, e_prime)?, corr(&batch.p, e_prime)?);
    let (x_pe, x_ee, x_pe2) = expected(a);

    report.check(within_unit_se("e_e_prime", CLAIM, &ee, x_ee));
    report.check(within_unit_se("p_e", "first measurement follows -cos(theta_p - theta_e)", &pe, x_pe));
    report.check(within_unit_se(
        "p_e_prime",
        "the realized <P,E'> is the product of the two links of the measurement chain",
        &pe2,
        x_pe2,
    ));

    let t = empirical_target(&["P", "E", "E'"], &[&batch.p, &batch.e, e_prime], &[(0, 1), (0, 2), (1, 2)])?;
    let sampled = joint_feasible(&t)?;
    report.check(Check::new(
        "sampled_triple_feasible",
        "the sampled triple comes from a joint distribution",
        sampled.feasible,
        sampled.verdict(),
    ));
    // the triple a reader of both counterfactual values would assemble
    let counterfactual = CorrelationTarget::new(
        3,
        &[
            (0, 1, x_pe),
            (0, 2, qm_correlation(a.theta_p, a.theta_e_prime)),
            (1, 2, x_ee),
        ],
    )
    .with_labels(&["P", "E", "E'"]);
    let cf = joint_feasible(&counterfactual)?;

    report.results = json!({
        "correlations": { "p_e": pe, "e_e_prime": ee, "p_e_prime": pe2 },
        "expected": { "p_e": x_pe, "e_e_prime": x_ee, "p_e_prime": x_pe2 },
        "sampled_verdict": sampled.verdict(),
        "counterfactual_target": counterfactual,
        "counterfactual_verdict": cf.verdict(),
        "counterfactual_certificate": cf.certificate,
    });

    let rm = running_mean(&batch.e, e_prime)?;
    let stride = (n / TRAJECTORY_POINTS).max(1);
    let mut table = Table::new(
        "running_mean.csv",
        "running mean of e*e_prime over the first k triples, every stride-th k",
        &["k", "mean"],
    );
    for (i, m) in rm.trajectory.iter().enumerate() {
        let k = i + 1;
        if k % stride == 0 || k == n {
            table.push([k.to_string(), m.to_string()]);
        }
    }
    report.table(table);
    report.raw(
        CsvDoc {
            file: "samples.csv".into(),
            description: "one row per triple; angles in radians".into(),
            columns: ["pair_index", "theta_p", "theta_e", "theta_e_prime", "p", "e", "e_prime", "model", "seed"]
                .map(String::from)
                .to_vec(),
        },
        write_batch_csv(&batch)?,
    );
    Ok(report)
}
