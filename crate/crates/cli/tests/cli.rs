use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pcompact-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcompact")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn header(o: &Output) -> String {
    stdout(o).lines().next().unwrap_or_default().to_string()
}

#[test]
fn example_a_is_valid() {
    let o = run(&["example-a", "--m-max", "3", "--p", "1,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(header(&o), "p,m,lower,upper,upper_status,closed_form,valid,detail");
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 3);
}

#[test]
fn example_b_at_e1_partial_sums() {
    let o = run(&["example-b", "--at-e1", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let last = stdout(&o).lines().last().unwrap().to_string();
    assert!(last.starts_with("2,12,11,11,"), "{last}");
}

#[test]
fn every_input_command_succeeds() {
    for args in [
        vec!["mp", "points.json", "--p", "1,2"],
        vec!["kp", "poly.json"],
        vec!["beta", "beta.json"],
        vec!["merge", "merge.json"],
        vec!["factorize", "linear.json"],
        vec!["radius", "model.json", "--window", "2,3"],
        vec!["seminorm", "seminorm.json"],
    ] {
        let path = data(args[1]);
        let mut full = args.clone();
        full[1] = path.to_str().unwrap();
        let o = run(&full);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stdout(&o));
    }
}

#[test]
fn malformed_input_exits_one() {
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{\"points\": [").unwrap();
    let o = run(&["mp", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let o = run(&["kp", data("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unsupported_exponent_gives_invalid_row() {
    let o = run(&["kp", data("poly.json").to_str().unwrap(), "--p", "inf"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("false"));
}

fn tamper(src: &Path, dst: &Path, key: &str, factor: f64) {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(src).unwrap()).unwrap();
    let x = v[key].as_f64().unwrap();
    v[key] = Value::from(x * factor);
    std::fs::write(dst, serde_json::to_string(&v).unwrap()).unwrap();
}

#[test]
fn kp_certificate_round_trip_and_tamper() {
    let poly = data("poly.json");
    let cert = scratch("kp-cert.json");
    let o = run(&["kp", poly.to_str().unwrap(), "--cert-out", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));

    let o = run(&["kp", poly.to_str().unwrap(), "--certificate", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("checked"));

    let bad = scratch("kp-cert-bad.json");
    tamper(&cert, &bad, "upper", 0.5);
    let o = run(&["kp", poly.to_str().unwrap(), "--certificate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("invalid certificate"));

    tamper(&cert, &bad, "lower", 2.0);
    let o = run(&["kp", poly.to_str().unwrap(), "--certificate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mp_certificate_tamper() {
    let pts = data("points.json");
    let cert = scratch("mp-cert.json");
    assert_eq!(run(&["mp", pts.to_str().unwrap(), "--cert-out", cert.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(run(&["mp", pts.to_str().unwrap(), "--certificate", cert.to_str().unwrap()]).status.code(), Some(0));
    let bad = scratch("mp-cert-bad.json");
    tamper(&cert, &bad, "upper", 0.9);
    assert_eq!(run(&["mp", pts.to_str().unwrap(), "--certificate", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn suites_are_deterministic_across_thread_counts() {
    for name in ["solver", "beta", "factor"] {
        let a = run(&["suite", name, "--instances", "8", "--seed", "7", "--jobs", "1"]);
        let b = run(&["suite", name, "--instances", "8", "--seed", "7", "--jobs", "4"]);
        assert_eq!(a.status.code(), Some(0), "{name}: {}", stdout(&a));
        assert_eq!(a.stdout, b.stdout, "{name}");
    }
    let a = run(&["suite", "solver", "--instances", "4", "--seed", "7"]);
    let c = run(&["suite", "solver", "--instances", "4", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_file_drives_a_suite() {
    let out = scratch("holotype.json");
    let cfg = scratch("config.json");
    let body = serde_json::json!({
        "suite": "holotype", "p": [1.5, 2], "instances": 4, "seed": 3, "budget": 32,
        "out": out, "format": "json"
    });
    std::fs::write(&cfg, body.to_string()).unwrap();
    let o = run(&["suite", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["report"], "suite-holotype");
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["valid"], true);

    std::fs::write(&cfg, r#"{"suite": "holotype", "sedd": 3}"#).unwrap();
    assert_eq!(run(&["suite", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn json_mirrors_csv() {
    let csv = run(&["example-b", "--m-max", "4"]);
    let json = run(&["example-b", "--m-max", "4", "--format", "json"]);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.stdout.as_slice());
    let cols: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let json_cols: Vec<String> = v["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().into()).collect();
    assert_eq!(cols, json_cols);
    let rows = v["rows"].as_array().unwrap();
    let records: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), records.len());
    for (rec, row) in records.iter().zip(rows) {
        for (c, text) in cols.iter().zip(rec.iter()) {
            match &row[c] {
                Value::Null => assert_eq!(text, ""),
                Value::String(s) => assert_eq!(text, s),
                Value::Bool(b) => assert_eq!(text, b.to_string()),
                Value::Number(n) => assert_eq!(text.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{c}"),
                other => panic!("unexpected {other}"),
            }
        }
    }
}

#[test]
fn schema_command_lists_every_report() {
    let o = run(&["schema"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    for name in
        ["mp", "kp", "beta", "merge", "factorize", "radius", "example-a", "example-b", "seminorm", "suite-solver"]
    {
        assert!(v[name]["columns"].is_array(), "{name}");
    }
}
