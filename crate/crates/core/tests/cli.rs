use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ospverify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ospverify")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn default_scan_passes_with_schema_version() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let run = ospverify(&["scan", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["schema_version"], "1.0.0");
    assert_eq!(report["records"].as_array().unwrap().len(), 16);
    assert_eq!(report["pass"], true);
    assert!(String::from_utf8_lossy(&run.stdout).contains("0 gated failures"));
}

#[test]
fn super_threshold_scan_warns_but_exits_zero() {
    let run = ospverify(&["scan", "--lambda-min", "0.17", "--lambda-max", "0.2", "--steps", "4", "--n-max", "5"]);
    assert_eq!(code(&run), 0);
    let report: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    for r in report["records"].as_array().unwrap() {
        assert!(r["flags"].as_array().unwrap().iter().any(|f| f == "outside weak-condition range"));
    }
    assert!(String::from_utf8_lossy(&run.stderr).contains("warning"));
}

#[test]
fn invalid_spec_exits_two() {
    assert_eq!(code(&ospverify(&["scan", "--steps", "0"])), 2);
    assert_eq!(code(&ospverify(&["scan", "--n-max", "12"])), 2);
    assert_eq!(code(&ospverify(&["check", "--n", "2"])), 2);
    assert_eq!(code(&ospverify(&["scan", "--config", "/nonexistent/osp.toml"])), 2);
    assert_eq!(code(&ospverify(&["scan", "--format", "xml"])), 2);
}

#[test]
fn gated_failures_map_to_exit_one() {
    use osp_core::verifier::report::{exit_code, Failure};
    assert_eq!(exit_code(&[]), 0);
    let f = Failure { lambda: 0.1, n: 3, check: "small_n_positive", value: -1.0 };
    assert_eq!(exit_code(&[f]), 1);
}

#[test]
fn valid_constants_keep_gated_checks_green() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "rho0 = 5.0\na0 = 2.0\nd0 = 0.5\nn3_val = 3.0\nn3_deriv = 3.0\n");
    let run = ospverify(&["scan", "--config", &cfg, "--steps", "4"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let report: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert!(!report["records"][0]["inverted_orders"].as_array().unwrap().is_empty());
}

#[test]
fn config_overrides_flags_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "mass = 2.0\nd0 = 0.001\n[scan]\nlambda_min = 0.02\nlambda_max = 0.03\nsteps = 2\nn_max = 7\n",
    );
    let run = ospverify(&["scan", "--config", &cfg, "--steps", "9", "--mass", "1.0"]);
    assert_eq!(code(&run), 0);
    let report: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report["config"]["steps"], 2);
    assert_eq!(report["config"]["mass"], 2.0);
    assert_eq!(report["config"]["constants"]["d0"], 0.001);
    assert_eq!(report["records"][0]["orders"].as_array().unwrap().len(), 4);
    let defaulted = report["provenance"]["defaulted"].as_array().unwrap();
    assert!(defaulted.iter().any(|k| k == "rho0"));
    assert!(!defaulted.iter().any(|k| k == "d0"));

    let bad = write(dir.path(), "bad.toml", "lambda = 0.1\nmasss = 1.0\n");
    let run = ospverify(&["scan", "--config", &bad]);
    assert_eq!(code(&run), 2);
    assert!(String::from_utf8_lossy(&run.stderr).contains("masss"));
}

#[test]
fn csv_is_a_projection_of_json() {
    let json = ospverify(&["scan", "--steps", "3", "--n-max", "7"]);
    let csv = ospverify(&["scan", "--steps", "3", "--n-max", "7", "--format", "csv"]);
    let report: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..3], ["lambda", "n", "weak_condition"]);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 4);
    let h_col = header.iter().position(|h| *h == "h").unwrap();
    let last: Vec<&str> = rows[11].split(',').collect();
    let h_json = report["records"][2]["orders"][3]["lower_bounds"]["h"]["value"].as_f64().unwrap();
    assert_eq!(last[h_col].parse::<f64>().unwrap(), h_json);
}

#[test]
fn check_reports_matrix_with_numeric_key_order() {
    let run = ospverify(&["check", "--n", "11", "--lambda", "0.1"]);
    assert_eq!(code(&run), 0);
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.find("\"1,2\"").unwrap() < text.find("\"1,10\"").unwrap());
    assert!(text.find("\"9,11\"").unwrap() < text.find("\"10,1\"").unwrap());
    let summary = String::from_utf8(run.stderr).unwrap();
    assert!(summary.contains("h = ") && summary.contains("pass"));
}

#[test]
fn audit_csv_columns_and_guard() {
    let run = ospverify(&["audit", "--n", "5", "--format", "csv"]);
    assert_eq!(code(&run), 0);
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("profile,k,classical_coeff,rhs_coeff_setpart,rhs_coeff_multinomial,"));
    assert_eq!(text.lines().count(), 1 + 3);
    assert!(text.contains("\"(1,1,1,1,1)\",5,1,10,120"));

    let seven = ospverify(&["audit", "--n", "7", "--format", "csv"]);
    assert_eq!(String::from_utf8(seven.stdout).unwrap().lines().count(), 1 + 5);

    let guard = ospverify(&["audit", "--n", "15"]);
    assert_eq!(code(&guard), 2);
    assert!(String::from_utf8_lossy(&guard.stderr).contains("oracle scale exceeded"));
}

#[test]
fn partitions_table() {
    let run = ospverify(&["partitions", "--n", "7", "--format", "csv"]);
    assert_eq!(code(&run), 0);
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("profile,k,set_partition_count,multinomial_count\n"));
    assert!(text.contains("\"(3,3,1)\",3,70,140"));
}
