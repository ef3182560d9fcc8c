use std::path::PathBuf;
use std::process::{Command, Output};

fn sandwich(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sandwich"))
        .args(args)
        .env_remove("SANDWICH_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sandwich-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn bounds_csv_header_and_gaussian_row() {
    let out = sandwich(&["bounds", "--K", "1", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "regime,K,input_kind,input,cheeger_lower,implicit,argmax_t,explicit,explicit_regime,c,lambda_implicit"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let implicit: f64 = row[5].parse().unwrap();
    assert!((implicit - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-10);
    assert_eq!(row[6], "inf");
}

#[test]
fn json_output_round_trips() {
    let out = sandwich(&["bounds", "--K", "-1", "--h", "0.5,1,2", "--regime", "infinite", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = value.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let again: serde_json::Value = serde_json::from_str(&serde_json::to_string(&value).unwrap()).unwrap();
    assert_eq!(value, again);
    for row in rows {
        assert_eq!(row["regime"], "infinite");
        assert!(row["lambda_implicit"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn invert_is_consistent_with_bounds() {
    let out = sandwich(&["invert", "--K", "0.5", "--h", "1.2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lambda: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    let back = sandwich(&["invert", "--K", "0.5", "--lambda", &lambda.to_string()]);
    let h: f64 = stdout(&back).lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!(h <= 1.2 * (1.0 + 1e-6), "{h}");
    assert!((h - 1.2).abs() < 1e-6, "{h}");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["bounds", "--K", "1"][..],
        &["bounds", "--K", "1", "--h", "1", "--lambda", "1"][..],
        &["bounds", "--K", "1", "--h", "-3"][..],
        &["bounds", "--K", "0", "--h", "1", "--format", "xml"][..],
        &["verify", "--space", "klein_bottle"][..],
        &["verify", "--space", "gaussian", "--param", "L=2"][..],
        &["sweep", "--K", "1:0:3", "--h", "0.5:1:3"][..],
        &["frobnicate"][..],
    ] {
        let out = sandwich(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn verify_is_deterministic_and_passes() {
    let args = ["verify", "--space", "gaussian", "--n", "401", "--no-refine", "--t-points", "6"];
    let a = sandwich(&args);
    let b = sandwich(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("inequality_id,worst_slack,tolerance,pass,N,dx,dt,notes"));
    assert!(text.lines().skip(1).all(|l| l.contains(",true,")));
    assert!(String::from_utf8_lossy(&a.stderr).contains("gaussian"));
}

#[test]
fn verify_accepts_preset_parameters() {
    let out = sandwich(&["verify", "--space", "flat_interval", "--param", "L=2", "--n", "301", "--no-refine", "--t-points", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("flat_interval(L=2)"));
}

#[test]
fn output_dir_environment_variable() {
    let dir = scratch("env");
    let out = Command::new(env!("CARGO_BIN_EXE_sandwich"))
        .args(["constants", "--format", "json"])
        .env("SANDWICH_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("constants.json")).unwrap()).unwrap();
    let m = json
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["quantity"] == "M")
        .unwrap()["value"]
        .as_f64()
        .unwrap();
    assert!((m - 0.638_172_686_3).abs() < 1e-9);

    let explicit = dir.join("nested").join("b.csv");
    let out = sandwich(&["bounds", "--K", "0", "--h", "1", "--output", explicit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&explicit).unwrap().starts_with("regime,"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sweep_order_and_empty_grid() {
    let out = sandwich(&["sweep", "--K", "-1:1:3", "--h", "0.2:1:2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r[1].parse().unwrap(), r[3].parse().unwrap())).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    assert!(text.lines().next().unwrap().ends_with(",ratio"));

    let empty = sandwich(&["sweep", "--K", "0:1:0", "--lambda", "1:2:4"]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(stdout(&empty).lines().count(), 1);
}

#[test]
fn sharpness_reports_gaussian_equality() {
    let out = sandwich(&["sharpness", "--n", "2001", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let get = |q: &str| {
        json.as_array().unwrap().iter().find(|r| r["quantity"] == q).unwrap()["value"]
            .as_f64()
            .unwrap()
    };
    assert!((get("lambda1") - 1.0).abs() < 1e-3);
    assert!(get("h_gap").abs() < 1e-3);
}
