use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bell_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bell-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn identities_report_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = bell_lab(&["identities", "--n", "500", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 violations"));
    let r = report(dir.path());
    assert_eq!(r["results"]["summary"], "0 violations");
    assert!(dir.path().join("identities.csv").exists());
    assert!(dir.path().join("metadata.json").exists());
}

#[test]
fn exhaustive_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = bell_lab(&["identities", "--n", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let s = &report(dir.path())["results"]["suite"];
    assert_eq!(s["random_triples"], 0);
    assert_eq!(s["exhaustive_triples"], 4680);
}

#[test]
fn corruption_is_a_property_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = bell_lab(&["identities", "--n", "10", "--inject-corruption", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(dir.path());
    assert_eq!(r["status"], "property_failure");
    let c = &r["results"]["suite"]["first_counterexample"];
    assert_eq!(c["regime"], "random");
    assert_eq!(c["case_index"], 0);
    assert_eq!(c["sequences"][1][0], 0);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["v3", "--bogus"][..],
        &["singlet", "--theta-e", "45"],
        &["protocol", "--p", "2000"],
        &["identities", "--n", "10", "--workers", "0"],
        &["feasible", "--triple", "0.5,0.5"],
        &["feasible", "--triple", "2,0,0"],
        &[],
    ] {
        let out = bell_lab(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(bell_lab(&["--help"]).status.code(), Some(0));
}

#[test]
fn singlet_equal_axes_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = bell_lab(&["singlet", "--theta-e", "40deg", "--theta-p", "40deg", "--n", "1000", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r["results"]["correlation"]["value"], -1.0);
    let samples = fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert!(samples.starts_with("pair_index,theta_p,theta_e,p,e,model,seed\n"));
    assert_eq!(samples.lines().count(), 1001);
}

#[test]
fn feasible_zero_target_is_uniform() {
    let out = bell_lab(&["feasible", "--triple", "0,0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("t.json");
    fs::write(&target, r#"{"n": 3, "pairs": [{"i":0,"j":1,"value":0},{"i":0,"j":2,"value":0},{"i":1,"j":2,"value":0}]}"#).unwrap();
    let outdir = dir.path().join("out");
    let out = bell_lab(&["feasible", "--target", target.to_str().unwrap(), "--out", outdir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&outdir)["results"]["summary"], "FEASIBLE, witness = uniform");
    let w = fs::read_to_string(outdir.join("witness.csv")).unwrap();
    assert_eq!(w.lines().count(), 9);
}

#[test]
fn v3_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = bell_lab(&["v3", "--n", "2000", "--format", "json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    assert!((r["results"]["analytic"]["lhs"].as_f64().unwrap() - std::f64::consts::SQRT_2).abs() < 1e-4);
    assert_eq!(r["results"]["analytic"]["rhs"], 1.0);
    assert_eq!(r["results"]["verdict"], "INFEASIBLE");
    // json only
    assert!(!dir.path().join("correlations.csv").exists());
}

#[test]
fn csv_only_skips_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = bell_lab(&["v4", "--n", "2000", "--format", "csv", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!dir.path().join("report.json").exists());
    assert!(dir.path().join("correlations.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "4")] {
        let out = bell_lab(&["nocorr", "--n", "30000", "--seed", "9", "--workers", workers, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["report.json", "samples.csv", "running_mean.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# protocol run\nseed = 3\nn = 2000\nrho = -1,1\nalignment = isochronous\nrecords = true\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = bell_lab(&["protocol", "--config", cfg.to_str().unwrap(), "--seed", "4", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out_dir);
    assert_eq!(r["seed"], 4);
    assert_eq!(r["config"]["trials"], 2000);
    assert_eq!(r["config"]["rho"], serde_json::json!([-1.0, 1.0]));
    assert!(out_dir.join("records_isochronous_block_0.csv").exists());

    fs::write(&cfg, "nonsense line\n").unwrap();
    let out = bell_lab(&["v3", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn toy_coupling_shifts_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let out = bell_lab(&[
        "nocorr", "--model", "toy", "--coupling", "1", "--theta-e", "0deg", "--theta-e-prime", "90deg",
        "--n", "20000", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(dir.path())["results"]["correlations"]["e_e_prime"]["value"], 1.0);
    assert_eq!(bell_lab(&["nocorr", "--model", "toy", "--coupling", "1.5", "--n", "10"]).status.code(), Some(1));
}
