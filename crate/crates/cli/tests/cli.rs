use std::fs;
use std::process::{Command, Output};

fn lft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lft")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn zero_operator_estimate_succeeds() {
    let out = lft(&["estimate", "--group", "Z4", "--op", "zero:2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["estimate"]["bound"], 0.0);
    assert_eq!(doc["passed"], true);
}

#[test]
fn scalar_estimate_is_one() {
    let out = lft(&["estimate", "--group", "Z3", "--p", "1.5"]);
    assert_eq!(out.status.code(), Some(0));
    let bound = json(&out)["estimate"]["bound"].as_f64().unwrap();
    assert!((bound - 1.0).abs() < 1e-9, "{bound}");
}

#[test]
fn p_out_of_range_is_a_usage_error() {
    let out = lft(&["estimate", "--group", "Z4", "--p", "2.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p must satisfy"));
}

#[test]
fn malformed_inputs_exit_with_two() {
    for args in [
        &["estimate", "--group", "Q7"][..],
        &["estimate", "--group", "Z4", "--op", "[[1,2],[3]]"],
        &["verify", "--group", "Z4", "--check", "nope"],
        &["estimate"],
    ] {
        assert_eq!(lft(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_with_two() {
    let out = lft(&["estimate", "--group", "Z2", "--out", "/nonexistent-dir/report.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_and_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let args = ["estimate", "--group", "Z2 x Z2", "--op", "id:2:q=1.5", "--seed", "9", "--restarts", "8"];
    let first = lft(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    assert_eq!(lft(&with_out).status.code(), Some(0));
    assert_eq!(fs::read(&path).unwrap(), first.stdout);
    let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}

#[test]
fn verify_runs_selected_checks() {
    let out = lft(&["verify", "--group", "Z6", "--subgroup", "3", "--check", "parseval", "--check", "weil"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    let ids: Vec<&str> = doc["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["parseval", "weil"]);
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["verdict"] == "pass"));
}

#[test]
fn csv_output_has_one_row_per_check() {
    let out = lft(&["verify", "--group", "Z4", "--check", "parseval", "--check", "sinc_sum", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "kind");
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| &r[2] == "pass"));
}

#[test]
fn operator_files_are_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("op.json");
    fs::write(&path, "[[2, 0], [0, [0, 1]]]").unwrap();
    let op = format!("file:{}", path.display());
    let out = lft(&["estimate", "--group", "1", "--op", &op, "--p", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let bound = json(&out)["estimate"]["bound"].as_f64().unwrap();
    assert!((bound - 2.0).abs() < 1e-9, "{bound}");
}
