use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const PRESETS: [&str; 10] = [
    "uniform",
    "sinusoidal",
    "lorentzian-0",
    "lorentzian-0.5",
    "lorentzian-1",
    "radial-rings",
    "disk-center",
    "disk-0.6",
    "disk-0.79",
    "triangle",
];

fn fpeit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpeit"))
        .args(args)
        .env("FPEIT_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn every_preset_solves_and_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    for name in PRESETS {
        let cfg = write_config(tmp.path(), &format!("{name}.json"), &format!(r#"{{"preset": "{name}"}}"#));
        let out = tmp.path().join(name);
        let run = fpeit(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(run.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&run.stderr));
        for file in ["coefficients.csv", "boundary_fit.csv", "report.json"] {
            assert!(out.join(file).is_file(), "{name}: missing {file}");
        }
        let r = report(&out);
        assert!(r["error"].as_f64().unwrap().is_finite());
        assert!(r["timing"]["total_s"].as_f64().unwrap() < 60.0);
        assert_eq!(r["config"]["n"], r["max_degree"]);
    }
    let sin = report(&tmp.path().join("sinusoidal"));
    assert_eq!(sin["basis_size"], 35);
    assert!(sin["error"].as_f64().unwrap() < 5e-3);
    let rings = report(&tmp.path().join("radial-rings"));
    let alphas: Vec<u64> = rings["significant_coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["alpha"].as_u64().unwrap())
        .collect();
    assert_eq!(alphas, [1, 3, 19, 21]);
    let coeffs = fs::read_to_string(tmp.path().join("sinusoidal/coefficients.csv")).unwrap();
    assert_eq!(coeffs.lines().next(), Some("alpha,b"));
    assert_eq!(coeffs.lines().count(), 36);
    let fit = fs::read_to_string(tmp.path().join("sinusoidal/boundary_fit.csv")).unwrap();
    assert_eq!(fit.lines().next(), Some("theta,l,data,fit,residual"));
    assert_eq!(fit.lines().count(), 1001);
}

#[test]
fn identical_configs_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"preset": "lorentzian-1", "interior": true, "dump_powers": true, "steps": 100}"#,
    );
    let mut runs = Vec::new();
    for (k, threads) in ["1", "0"].iter().enumerate() {
        let out = tmp.path().join(format!("run{k}"));
        let run = fpeit(&[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert_eq!(run.status.code(), Some(0));
        runs.push(out);
    }
    for file in ["coefficients.csv", "boundary_fit.csv", "interior.csv", "powers.csv"] {
        let a = fs::read(runs[0].join(file)).unwrap();
        let b = fs::read(runs[1].join(file)).unwrap();
        assert!(a == b, "{file} differs between runs");
    }
}

#[test]
fn dense_error_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"conductivity": {"kind": "uniform", "value": 1.0}, "boundary": {"kind": "harmonic", "degree": 2},
            "n": 6, "rays": 21, "steps": 100}"#,
    );
    let out = tmp.path().join("o");
    let args = ["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert_eq!(fpeit(&args).status.code(), Some(0));
    let linear = report(&out)["error"].as_f64().unwrap();
    let mut dense_args = args.to_vec();
    dense_args.push("--dense-error");
    assert_eq!(fpeit(&dense_args).status.code(), Some(0));
    let dense = report(&out)["error"].as_f64().unwrap();
    assert_eq!(report(&out)["config"]["error_sampling"], "dense");
    assert!(dense < 1e-8 && linear > 1e-3, "{dense} {linear}");
}

#[test]
fn invalid_input_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = out.to_str().unwrap();
    let zero = write_config(tmp.path(), "zero.json", r#"{"preset": "sinusoidal", "n": 0}"#);
    let run = fpeit(&["solve", "--config", zero.to_str().unwrap(), "--out", o]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("n (maximum degree)"));

    let missing = write_config(
        tmp.path(),
        "missing.json",
        r#"{"conductivity": {"kind": "grid", "path": "/nonexistent/sigma.csv"}, "boundary": {"kind": "cubic"}}"#,
    );
    let run = fpeit(&["solve", "--config", missing.to_str().unwrap(), "--out", o]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("sigma.csv"));

    let trace = write_config(
        tmp.path(),
        "trace.json",
        r#"{"preset": "uniform", "boundary": {"kind": "csv", "path": "/nonexistent/trace.csv"}}"#,
    );
    let run = fpeit(&["solve", "--config", trace.to_str().unwrap(), "--out", o]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("trace.csv"));

    let run = fpeit(&["solve", "--config", "/nonexistent/config.json", "--out", o]);
    assert_eq!(run.status.code(), Some(2));
    let bad = write_config(tmp.path(), "bad.json", "{ not json");
    assert_eq!(fpeit(&["verify", "--config", bad.to_str().unwrap(), "--out", o]).status.code(), Some(2));
}

#[test]
fn boundary_data_from_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let rows: String = (0..200)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 200.0;
            format!("{t},{}\n", (2.0 * t).cos())
        })
        .collect();
    fs::write(tmp.path().join("trace.csv"), format!("theta,u\n{rows}")).unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &format!(
            r#"{{"preset": "uniform", "n": 6, "rays": 21, "boundary": {{"kind": "csv", "path": "{}"}}}}"#,
            tmp.path().join("trace.csv").display()
        ),
    );
    let out = tmp.path().join("o");
    let run = fpeit(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(report(&out)["error"].as_f64().unwrap() < 1e-3);
}

#[test]
fn verify_uniform_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"preset": "uniform"}"#);
    let run = fpeit(&["verify", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    for r in v["vekua_per_degree"].as_array().unwrap() {
        assert!(r.as_f64().unwrap() <= 1e-6);
    }
}

#[test]
fn verify_lorentzian_reports_each_family() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"preset": "lorentzian-1"}"#);
    let run = fpeit(&["verify", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("verify.json")).unwrap()).unwrap();
    let checks = v["checks"].as_array().unwrap();
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["divergence", "vekua", "successor"]);
    assert!(checks.iter().all(|c| c["applicable"] == true && c["pass"] == true));
    assert_eq!(v["vekua_per_degree"].as_array().unwrap().len(), 18);
}

#[test]
fn verify_breach_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"preset": "lorentzian-1", "thresholds": {"divergence": 1e-12}}"#,
    );
    let run = fpeit(&["verify", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("divergence"));
}

#[test]
fn powers_writes_the_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"preset": "uniform", "n": 2, "rays": 8, "steps": 50, "q": 8}"#,
    );
    let run = fpeit(&["powers", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(tmp.path().join("powers.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("degree,seed,ray,step,x,y,ReZ,ImZ"));
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 8 * 51);
}
