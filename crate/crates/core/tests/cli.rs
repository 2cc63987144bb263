use std::process::{Command, Output};

use num_rational::BigRational;
use serde_json::Value;
use urnlab::numerics::parse_rational;
use urnlab::oracle::pmf_recurrence;
use urnlab::{Model, UrnSpec, WeightSequence};

fn urnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urnlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn json(args: &[&str]) -> Value {
    let o = urnlab(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).expect("valid JSON")
}

fn schema() -> jsonschema::Validator {
    let text = include_str!("../schema/output.schema.json");
    jsonschema::validator_for(&serde_json::from_str(text).unwrap()).expect("schema compiles")
}

fn stderr_line(o: &Output) -> String {
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert_eq!(err.trim_end().lines().count(), 1, "diagnostic should be one line: {err:?}");
    err
}

#[test]
fn pmf_unit_linear_example() {
    let v = json(&["pmf", "--model", "I", "--A", "linear:1", "--B", "linear:1", "--n", "2", "--m", "2", "--format", "json"]);
    let expected: Value = serde_json::from_str(r#"[{"k":0,"p":"1/2"},{"k":1,"p":"1/3"},{"k":2,"p":"1/6"}]"#).unwrap();
    assert_eq!(v["pmf"], expected);
    assert_eq!(v["status"], "ok");
}

#[test]
fn pmf_export_roundtrips() {
    let v = json(&["pmf", "--A", "square", "--B", "shifted-square", "--n", "5", "--m", "4", "--representation", "beta"]);
    let spec = UrnSpec::two_color(Model::I, WeightSequence::square(), WeightSequence::shifted_square(), 5, 4);
    let oracle = pmf_recurrence::<BigRational>(&spec).unwrap();
    let parsed: Vec<BigRational> =
        v["pmf"].as_array().unwrap().iter().map(|e| parse_rational(e["p"].as_str().unwrap()).unwrap()).collect();
    assert_eq!(parsed, oracle.probs());
}

#[test]
fn duality_check_example() {
    let o = urnlab(&["duality-check", "--A", "square", "--B", "linear:1", "--n", "4", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"], "exact match");
}

#[test]
fn theta_example() {
    for mode in ["bigfloat", "float"] {
        let v = json(&["theta", "--q", "0.5", "--tol", "1e-12", "--mode", mode]);
        assert!(v["difference"].as_f64().unwrap() < 1e-12, "{mode}: {v}");
    }
}

#[test]
fn w_cdf_grid_has_101_monotone_rows() {
    let o = urnlab(&["limit", "--law", "w-cdf", "--grid-step", "0.01", "--format", "csv", "--decimals", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,value"));
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 101);
    assert!(values.windows(2).all(|w| w[0] <= w[1]), "{values:?}");
    assert_eq!(values[0], 0.0);
    assert_eq!(values[100], 1.0);
    assert!(!text.contains('\r'));
}

#[test]
fn csv_rationals_and_decimals() {
    let o = urnlab(&["oracle", "--A", "linear:1", "--B", "linear:1", "--n", "2", "--m", "2", "--format", "csv"]);
    assert_eq!(stdout(&o), "k,p\n0,1/2\n1,1/3\n2,1/6\n");
    let o = urnlab(&["oracle", "--A", "linear:1", "--B", "linear:1", "--n", "2", "--m", "2", "--format", "csv", "--decimals", "3"]);
    assert_eq!(stdout(&o), "k,p\n0,0.500\n1,0.333\n2,0.167\n");
}

#[test]
fn every_subcommand_validates_against_schema() {
    let validator = schema();
    let runs: &[&[&str]] = &[
        &["pmf", "--A", "square", "--B", "triangular", "--n", "4", "--m", "3"],
        &["pmf", "--A", "power:1:1/2", "--B", "linear:1", "--n", "3", "--m", "3"],
        &["pmf", "--A", "square", "--B", "triangular", "--n", "4", "--m", "3", "--mode", "float"],
        &["pmf-multi", "--model", "II", "--weights", "square", "triangular", "linear:1", "--counts", "2,2,2"],
        &["moments", "--a", "1", "--d", "2", "--n", "4", "--m", "3", "--s", "3"],
        &["moments", "--avec", "1,2,1", "--counts", "2,3,2", "--orders", "1,2"],
        &["moments", "--A", "square", "--B", "triangular", "--n", "3", "--m", "3", "--s", "2"],
        &["okc-moments", "--b", "1", "--c", "2", "--n", "3", "--m", "2", "--s", "2"],
        &["limit", "--law", "ym", "--m", "3", "--s", "2"],
        &["limit", "--law", "ym", "--m", "3", "--s", "2", "--mode", "float"],
        &["limit", "--law", "ym-density", "--m", "3", "--q", "1/2"],
        &["limit", "--law", "zn", "--n", "4"],
        &["limit", "--law", "zn", "--n", "4", "--k", "0", "--series-tol", "1e-30"],
        &["limit", "--law", "zn-moment", "--n", "4", "--s", "2"],
        &["limit", "--law", "w", "--s", "1", "--family", "triangular"],
        &["limit", "--law", "w-cdf", "--grid-step", "0.25", "--family", "shifted-square"],
        &["theta", "--q", "0.3"],
        &["duality-check", "--weights", "square", "triangular", "linear:1", "--counts", "2,2,2"],
        &["oracle", "--A", "square", "--B", "triangular", "--n", "3", "--m", "3", "--method", "enumerate"],
        &["oracle", "--weights", "square", "triangular", "linear:1", "--counts", "2,1,2"],
        &["simulate", "--A", "square", "--B", "triangular", "--n", "4", "--m", "3", "--trials", "2000", "--seed", "5"],
        &["compare", "--A", "linear:1", "--B", "linear:1", "--n", "3", "--m", "3", "--trials", "1000"],
        &["compare", "--A", "square", "--B", "square", "--n", "3", "--m", "3", "--trials", "0"],
    ];
    for args in runs {
        let v = json(args);
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}\n{v}");
        assert_eq!(v["request"]["subcommand"], args[0]);
    }
}

#[test]
fn schema_rejects_float_for_rational() {
    let validator = schema();
    let mut v = json(&["pmf", "--A", "linear:1", "--B", "linear:1", "--n", "2", "--m", "2"]);
    v["pmf"][0]["p"] = Value::String("0.5".into());
    assert!(!validator.is_valid(&v));
}

#[test]
fn invalid_input_exits_2_with_one_line() {
    let cases: &[(&[&str], &str)] = &[
        (&["pmf", "--A", "square", "--B", "square", "--n", "3", "--m", "2", "--bogus"], "--bogus"),
        (&["pmf", "--A", "square", "--B", "square", "--n", "3", "--m", "2", "--precision-bits", "10"], "--precision-bits"),
        (&["pmf", "--A", "power:1:1/2", "--B", "square", "--n", "3", "--m", "2", "--mode", "exact"], "--mode"),
        (&["pmf", "--A", "square", "--B", "square", "--n", "3", "--m", "2", "--decimals", "4"], "--decimals"),
        (&["pmf", "--A", "square", "--n", "3", "--m", "2"], "--B"),
        (&["limit", "--law", "w", "--s", "2", "--mode", "exact"], "--mode"),
        (&["limit", "--law", "ym", "--s", "2"], "--m"),
        (&["limit", "--law", "w-cdf", "--grid-step", "2"], "--grid-step"),
        (&["pmf", "--A", "cubic", "--B", "square", "--n", "3", "--m", "2"], "--A"),
        (&["simulate", "--A", "square", "--B", "square", "--n", "3", "--m", "2", "--trials", "0"], "trials"),
    ];
    for (args, flag) in cases {
        let o = urnlab(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let line = stderr_line(&o);
        assert!(line.contains(flag), "{args:?}: {line}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn literal_cross_term_reports_discrepancy() {
    let o = urnlab(&["pmf-multi", "--model", "II", "--weights", "square", "triangular", "linear:1", "--counts", "2,2,2", "--cross-term", "literal"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "formula-discrepancy");
    assert!(!v["literal_mismatches"].as_array().unwrap().is_empty());
}

#[test]
fn manifest_compare_is_clean() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/manifests/acceptance.json");
    let v = json(&["compare", "--manifest", path, "--trials", "0"]);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["max_discrepancy"].as_f64(), Some(0.0));
    assert!(schema().is_valid(&v));
}

#[test]
fn precision_env_and_flag() {
    let o = Command::new(env!("CARGO_BIN_EXE_urnlab"))
        .args(["limit", "--law", "w", "--s", "1"])
        .env("URNLAB_PRECISION_BITS", "128")
        .output()
        .unwrap();
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["request"]["precision_bits"], 128);
    assert_eq!(v["moment"]["precision_bits"], 128);
    let v = json(&["limit", "--law", "w", "--s", "1", "--precision-bits", "512"]);
    assert_eq!(v["moment"]["precision_bits"], 512);
}

#[test]
fn simulation_ignores_worker_count() {
    let base = ["simulate", "--A", "square", "--B", "linear:1", "--n", "6", "--m", "5", "--trials", "40000", "--seed", "9"];
    let one = urnlab(&[&base[..], &["--workers", "1"]].concat());
    let four = urnlab(&[&base[..], &["--workers", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(urnlab(&["--help"]).status.code(), Some(0));
    assert_eq!(urnlab(&["--version"]).status.code(), Some(0));
}
