use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stable-forms"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn form_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const PHI_R: &str = r#"{"dim":6,"degree":3,"terms":[{"idx":[1,2,3],"re":1},{"idx":[4,5,6],"re":1}]}"#;
const PHI_STD: &str = r#"{"dim":7,"degree":3,"terms":[
  {"idx":[1,2,5],"re":1},{"idx":[3,4,5],"re":-1},{"idx":[1,3,6],"re":1},{"idx":[2,4,6],"re":1},
  {"idx":[1,4,7],"re":1},{"idx":[2,3,7],"re":-1},{"idx":[5,6,7],"re":1}]}"#;

#[test]
fn classify_split_form() {
    let f = form_file(PHI_R);
    let out = run(&["classify", "--input", f.path().to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["orbit"], "positive_pair");
    assert_eq!(v["lambda"].as_f64().unwrap(), 1.0);
    assert_eq!(v["decomposition"]["kind"], "real_pair");
}

#[test]
fn classify_standard_g2_form() {
    let f = form_file(PHI_STD);
    let out = run(&["classify", "--input", f.path().to_str().unwrap(), "--dim", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["positive"], true);
    assert!((v["phi"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn degree_two_is_rejected() {
    let f = form_file(r#"{"dim":6,"degree":2,"terms":[{"idx":[1,2],"re":1}]}"#);
    let out = run(&["classify", "--input", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degree must be 3"));
}

#[test]
fn malformed_term_is_named() {
    let f = form_file(r#"{"dim":6,"degree":3,"terms":[{"idx":[1,2,3],"re":1},{"idx":[3,2,1],"re":1}]}"#);
    let out = run(&["classify", "--input", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("term 1"));
    let f = form_file("{not json");
    assert_eq!(run(&["classify", "--input", f.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn g2_rejects_non_positive_forms() {
    let f = form_file(r#"{"dim":7,"degree":3,"terms":[{"idx":[1,2,3],"re":1}]}"#);
    let out = run(&["g2", "--input", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn g2_reports_star_projection_and_spectrum() {
    let f = form_file(PHI_STD);
    let p = f.path().to_str().unwrap();
    let out = run(&["g2", "--input", p, "--star", "--project", p, "--hessian"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["vol"].as_f64().unwrap(), 1.0);
    assert_eq!(v["star_omega"]["degree"], 4);
    assert_eq!(v["star_omega"]["terms"].as_array().unwrap().len(), 7);
    assert_eq!(v["projection"]["p7"]["terms"].as_array().unwrap().iter().filter(|t| t["re"].as_f64().unwrap().abs() > 1e-12).count(), 0);
    let eig = v["spectrum"].as_array().unwrap();
    assert_eq!(eig.len(), 35);
    assert!((eig[0].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-8);
}

#[test]
fn lorentz_checks() {
    for check in ["lambda", "hat", "lagrangian", "graph"] {
        let out = run(&["lorentz", "--check", check, "--samples", "40", "--seed", "2"]);
        assert!(out.status.success());
        let v = json(&out);
        assert_eq!(v["violations"], 0, "{check}");
        assert_eq!(v["samples"], 40);
    }
}

#[test]
fn flow_exit_codes() {
    let out = run(&["flow", "--perturb", "0", "--grid", "4"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["iterations"], 0);
    assert_eq!(v["status"], "Converged");
    assert_eq!(v["hessian"]["kernel_dim"], v["hessian"]["gauge_rank"]);

    let out = run(&["flow", "--grid", "4", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["status"], "FlowStalled");

    assert_eq!(run(&["flow", "--dim", "5"]).status.code(), Some(2));
}

#[test]
fn flow_report_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["flow", "--dim", "7", "--grid", "4", "--report", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file = std::fs::read(&path).unwrap();
    assert_eq!(file, out.stdout);
    let v = json(&out);
    assert_eq!(v["N"], 1);
    assert_eq!(v["G"], 4);
    assert!(v["residual_history"].as_array().unwrap().last().unwrap().as_f64().unwrap() < 1e-6);
}

#[test]
fn suite_output_is_stable() {
    let a = run(&["suite", "lorentz", "--seed", "4"]);
    let b = bin().args(["suite", "lorentz", "--seed", "4"]).env("STABLE_FORMS_THREADS", "3").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run(&["suite", "bogus"]).status.code(), Some(2));
    let t = json(&run(&["suite", "forms6", "--timing"]));
    assert!(t["wall_time_s"].as_f64().is_some());
}
