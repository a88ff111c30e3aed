use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn primeflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_primeflow"))
        .args(args)
        .output()
        .expect("failed to run primeflow")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

fn schema() -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/primeflow.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&schema).expect("schema compiles")
}

fn assert_valid(text: &str) {
    let instance: Value = serde_json::from_str(text).expect("valid JSON");
    let schema = schema();
    if let Err(errors) = schema.validate(&instance) {
        let messages: Vec<String> = errors.map(|e| e.to_string()).collect();
        panic!("schema violations: {messages:?}\n{text}");
    };
}

#[test]
fn pi_json() {
    let out = primeflow(&["pi", "--n", "1000000", "--format", "json"]);
    assert!(out.status.success());
    let value: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value, serde_json::json!({"n": 1000000, "pi": 78498}));
    assert_valid(&stdout(&out));
}

#[test]
fn flow_identity() {
    let out = primeflow(&["flow", "--t", "0", "--d0", "0.5"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "t,d0,closed_form,series,numeric\n0,0.5,0.5,,0.5\n"
    );
}

#[test]
fn scale_check_row() {
    let out = primeflow(&["scale-check", "--n1", "100000000", "--n2", "1000000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n1,n2,lhs,rhs,abs_err,rel_err"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&fields[..2], &["100000000", "1000000"]);
    let rhs: f64 = fields[3].parse().unwrap();
    let rel: f64 = fields[5].parse().unwrap();
    assert!((rhs - 4.60517).abs() < 1e-5);
    assert!((rel - 0.0026).abs() < 1e-4);
}

#[test]
fn every_json_output_matches_the_schema() {
    let cases: [&[&str]; 8] = [
        &["pi", "--grid", "100:10000:1"],
        &["mertens", "--n", "1000"],
        &["mertens", "--grid", "10,100,1000"],
        &["density", "--grid", "1000:100000:2"],
        &["flow", "--t", "0.5", "--d0", "1", "--order", "10"],
        &["flow", "--t", "2", "--d0", "0.3"],
        &["scale-check", "--n1", "1000", "--n2", "100000"],
        &["report", "--grid", "1000:1000000:1"],
    ];
    for args in cases {
        let mut args = args.to_vec();
        args.extend(["--format", "json"]);
        let out = primeflow(&args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_valid(&stdout(&out));
    }
}

#[test]
fn report_golden_csv() {
    let out = primeflow(&["report", "--grid", "1000:100000:1"]);
    assert!(out.status.success());
    let golden = include_str!("golden/report_1e3_1e5.csv");
    assert_eq!(stdout(&out), golden);
}

#[test]
fn report_header_and_rows() {
    let out = primeflow(&["report", "--grid", "10000:100000000:1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "n,pi,density,inv_log,li_over_n,fbar,residual,rg_pred,scale_lhs,scale_rhs,scale_rel_err"
    );
    assert_eq!(lines.len(), 6);
    assert!(lines[1].ends_with(",,,"));
    assert!(!text.contains('\r'));
    let rel_errs: Vec<f64> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<f64> = l.split(',').take(4).map(|x| x.parse().unwrap()).collect();
            (f[3] - f[2]).abs() / f[2]
        })
        .collect();
    assert!(rel_errs.windows(2).all(|w| w[1] < w[0]), "{rel_errs:?}");
}

#[test]
fn report_to_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = primeflow(&[
            "report",
            "--grid",
            "1000:10000000:2",
            "--format",
            "json",
            "--seed",
            "17",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn exit_codes() {
    // configuration errors
    for args in [
        &["report"][..],
        &["report", "--grid", "100,100"],
        &["pi"],
        &["flow", "--t", "1"],
        &["flow", "--t", "-3", "--d0", "0.5"],
        &["flow", "--t", "3", "--d0", "0.5", "--order", "5"],
        &["scale-check", "--n1", "100", "--n2", "100"],
        &["pi", "--n", "10", "--format", "xml"],
        &["nonsense"],
        &["mertens", "--n", "2"],
    ] {
        let out = primeflow(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
    // limits
    let out = primeflow(&[
        "pi",
        "--n",
        "1000000",
        "--limit-fast",
        "1000",
        "--limit-sieve",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = primeflow(&["mertens", "--n", "100000", "--limit-sieve", "1000"]);
    assert_eq!(out.status.code(), Some(2));
}
