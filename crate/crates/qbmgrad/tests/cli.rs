use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qbmgrad"));
    c.env_remove("QBMGRAD_SEED");
    c
}

fn demo(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demos").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("qbmgrad-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(c: &mut Command) -> (i32, Output) {
    let out = c.output().unwrap();
    (out.status.code().unwrap(), out)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn verify_densities_suite() {
    let out = scratch("verify");
    let (code, o) = run(bin().args(["verify", "--suite", "densities", "--out"]).arg(&out));
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&out);
    assert_eq!(r["failed"], 0);
    assert!(r["max_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn verify_all_suites() {
    let out = scratch("verify-all");
    let (code, _) = run(bin().args(["verify", "--out"]).arg(&out));
    assert_eq!(code, 0);
    assert!(report(&out)["checks"].as_array().unwrap().len() >= 30);
}

#[test]
fn grad_on_the_one_qubit_demo() {
    let out = scratch("grad");
    let (code, _) = run(bin().args(["grad", "--spec"]).arg(demo("gradient_1qubit.json")).arg("--out").arg(&out));
    assert_eq!(code, 0);
    let r = report(&out);
    assert!((r["values"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r["finite_difference_ok"], true);
}

#[test]
fn grad_with_tsallis_override_reports_the_overlap() {
    let out = scratch("tsallis");
    let (code, _) = run(bin()
        .args(["grad", "--spec"])
        .arg(demo("restricted.json"))
        .args(["--objective", "tsallis", "--q", "0.5", "--out"])
        .arg(&out));
    assert_eq!(code, 0);
    let r = report(&out);
    assert_eq!(r["objective"]["kind"], "tsallis");
    assert!(r["q_value"].as_f64().unwrap() > 0.0);
}

#[test]
fn train_writes_a_reproducible_trajectory() {
    let strip = |s: String| -> Vec<String> {
        // drop the wall-clock column
        s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out = scratch(&format!("train{k}"));
        let (code, _) = run(bin().args(["train", "--spec"]).arg(demo("tsallis.json")).arg("--out").arg(&out));
        assert_eq!(code, 0);
        csvs.push(strip(fs::read_to_string(out.join("trajectory.csv")).unwrap()));
    }
    assert_eq!(csvs[0], csvs[1]);
    let header = &csvs[0][0];
    assert!(header.starts_with("iter,objective,grad_norm,theta_0"));
    // 17 significant digits
    let field = csvs[0][1].split(',').nth(1).unwrap();
    let mantissa = field.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{field}");
}

#[test]
fn seed_comes_from_flag_then_environment_then_spec() {
    let seed_of = |env: Option<&str>, flag: Option<&str>, tag: &str| {
        let out = scratch(tag);
        let mut c = bin();
        c.args(["grad", "--spec"]).arg(demo("gradient_1qubit.json")).arg("--out").arg(&out);
        if let Some(e) = env {
            c.env("QBMGRAD_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        assert_eq!(run(&mut c).0, 0);
        report(&out)["seed"].as_u64().unwrap()
    };
    let spec_seed = seed_of(None, None, "seed0");
    assert_eq!(seed_of(Some("41"), None, "seed1"), 41);
    assert_eq!(seed_of(Some("41"), Some("7"), "seed2"), 7);
    assert_ne!(spec_seed, 41);
}

#[test]
fn estimate_with_automatic_shot_count() {
    let out = scratch("estimate");
    let (code, o) = run(bin()
        .args(["estimate", "--spec"])
        .arg(demo("gradient_1qubit.json"))
        .args(["--shots", "0", "--epsilon", "0.2", "--delta", "0.1", "--out"])
        .arg(&out));
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["shots"], r["hoeffding_shots"]);
    assert!(r["abs_error"].as_f64().unwrap() < 0.2);
}

#[test]
fn failed_expectation_exits_with_one() {
    let dir = scratch("expect");
    let spec = dir.join("spec.json");
    fs::write(
        &spec,
        r#"{"model": {"kind": "generic", "d_v": 2, "d_h": 1, "terms": ["Z"], "theta": [0.0]},
            "target": {"state": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
            "expect": {"gradient": [5.0]}}"#,
    )
    .unwrap();
    let (code, _) = run(bin().args(["grad", "--spec"]).arg(&spec).arg("--out").arg(&dir));
    assert_eq!(code, 1);
    assert_eq!(report(&dir)["passed"], false);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = scratch("input");
    let bad = dir.join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["grad".into()],
        vec!["grad".into(), "--spec".into(), bad.display().to_string()],
        vec!["grad".into(), "--spec".into(), dir.join("missing.json").display().to_string()],
        vec!["verify".into(), "--suite".into(), "bogus".into()],
        vec!["bogus".into()],
        vec!["grad".into(), "--spec".into(), demo("tsallis.json").display().to_string(), "--q".into(), "0.5".into()],
        vec!["grad".into(), "--spec".into(), demo("tsallis.json").display().to_string(), "--objective".into(), "tsallis".into(), "--q".into(), "3".into()],
    ];
    for args in cases {
        let (code, _) = run(bin().args(&args).arg("--out").arg(&dir));
        assert_eq!(code, 2, "{args:?}");
    }
}

#[test]
fn numerical_guard_exits_with_three() {
    let dir = scratch("guard");
    let spec = dir.join("spec.json");
    fs::write(
        &spec,
        r#"{"model": {"kind": "generic", "d_v": 2, "d_h": 1, "terms": ["Z"], "theta": [900.0]},
            "target": {"state": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}}"#,
    )
    .unwrap();
    let (code, _) = run(bin().args(["grad", "--spec"]).arg(&spec).arg("--out").arg(&dir));
    assert_eq!(code, 3);
}
