use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn szj(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_szj"))
        .args(args)
        .current_dir(dir)
        .env("SZJ_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn forward_zero_and_empty_alpha_give_arcsine_top_row() {
    let dir = TempDir::new().unwrap();
    for body in [r#"{"alpha": [0, 0]}"#, r#"{"alpha": []}"#] {
        let f = write(dir.path(), "a.json", body);
        let v = json(&szj(&["forward", &f], dir.path()));
        assert_eq!(v["a"][0].as_f64().unwrap(), 2f64.sqrt());
        assert_eq!(v["b"][0].as_f64().unwrap(), 0.0);
        for space in ["l11", "l21", "intersection"] {
            assert!(v["norms"][space]["lambda"].is_number());
        }
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let code = |args: &[&str]| szj(args, p).status.code();

    let bad = write(p, "bad.json", "{not json");
    assert_eq!(code(&["forward", &bad]), Some(2));
    let schema = write(p, "schema.json", r#"{"alpha": "x"}"#);
    assert_eq!(code(&["forward", &schema]), Some(2));
    assert_eq!(code(&["forward", "missing.json"]), Some(2));
    let outside = write(p, "outside.json", r#"{"alpha": [1.5]}"#);
    assert_eq!(code(&["forward", &outside]), Some(3));
    let ok = write(p, "ok.json", r#"{"alpha": [0.1]}"#);
    assert_eq!(code(&["--grid-size", "128", "forward", &ok]), Some(2));
    assert_eq!(code(&["--grid-size", "1000", "forward", &ok]), Some(2));
    assert_eq!(code(&["--space", "l7", "forward", &ok]), Some(2));

    let big = write(
        p,
        "big.json",
        r#"{"lambda": {"offset": 0, "values": [-10, 4, 2]}, "kappa": {"offset": 0, "values": [-8, 3, 1]}}"#,
    );
    assert_eq!(code(&["solve", "--no-strip", &big]), Some(4));
    assert_eq!(
        code(&[
            "--max-iter",
            "2",
            "solve",
            "--no-strip",
            &write(
                p,
                "slow.json",
                r#"{"lambda": {"offset": 0, "values": [0.2, 0.1, 0.05]}, "kappa": {"offset": 0, "values": [0.2, 0.1, 0.05]}}"#
            )
        ]),
        Some(5)
    );
    assert_eq!(code(&["solve", &big]), Some(0));
}

#[test]
fn zero_tails_solve_to_zero() {
    let dir = TempDir::new().unwrap();
    let f = write(
        dir.path(),
        "z.json",
        r#"{"lambda": {"offset": 0, "values": []}, "kappa": {"offset": 0, "values": [0, 0]}}"#,
    );
    let v = json(&szj(&["solve", &f], dir.path()));
    assert!(v["alpha"]["alpha"]
        .as_array()
        .unwrap()
        .iter()
        .all(|a| a.as_f64() == Some(0.0)));
    assert_eq!(v["residual"].as_f64(), Some(0.0));
    assert_eq!(v["N_stripped"].as_u64(), Some(0));
}

#[test]
fn forward_then_solve_recovers_alpha() {
    let dir = TempDir::new().unwrap();
    let alpha = [0.04, -0.02, 0.01, 0.005];
    let f = write(dir.path(), "a.json", &format!(r#"{{"alpha": {alpha:?}}}"#));
    let out = szj(&["--out", "tails.json", "forward", &f], dir.path());
    assert!(out.status.success());
    let v = json(&szj(&["solve", "tails.json"], dir.path()));
    let got: Vec<f64> = v["alpha"]["alpha"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (k, a) in alpha.iter().enumerate() {
        assert!(
            (got.get(k).copied().unwrap_or(0.0) - a).abs() < 1e-10,
            "{got:?}"
        );
    }
    assert!(got.iter().skip(alpha.len()).all(|x| x.abs() < 1e-10));
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn equivalence_reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let run = |out: &str, threads: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_szj"))
            .args([
                "--seed",
                "3",
                "--out",
                out,
                "equivalence",
                "--direction",
                "forward",
                "--samples",
                "6",
            ])
            .current_dir(p)
            .env("SZJ_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("one", "1");
    run("four", "4");
    for name in ["equivalence_forward.json", "equivalence_forward.csv"] {
        let a = fs::read(p.join("one").join(name)).unwrap();
        let b = fs::read(p.join("four").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between thread counts");
    }
    let csv = fs::read_to_string(p.join("one/equivalence_forward.csv")).unwrap();
    assert!(csv.starts_with("# "));
    assert!(csv.lines().nth(1).unwrap().starts_with(
        "sample_id,truncation,partial_norm_alpha,partial_norm_logw,partial_norm_lambda,partial_norm_kappa,verdict"
    ));
}

#[test]
fn reverse_with_outside_mass_is_stripped_and_consistent() {
    let dir = TempDir::new().unwrap();
    let out = szj(
        &[
            "--out",
            "r",
            "equivalence",
            "--direction",
            "reverse",
            "--samples",
            "3",
            "--eigenvalue",
            "2.5",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("r/equivalence_reverse.json")).unwrap(),
    )
    .unwrap();
    for r in v["reports"].as_array().unwrap() {
        assert_eq!(r["verdict"], "consistent", "{r}");
        assert!(r["detail"]["n_stripped"].as_u64().unwrap() >= 1);
        let eig = r["detail"]["eigenvalues"].as_array().unwrap();
        assert!(
            eig.iter().any(|e| (e.as_f64().unwrap() - 2.5).abs() < 1e-6),
            "{eig:?}"
        );
    }
}

#[test]
fn bad_sweep_configuration_exits_2() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let code = |args: &[&str]| szj(args, p).status.code();
    assert_eq!(
        code(&["equivalence", "--direction", "forward", "--samples", "0"]),
        Some(2)
    );
    assert_eq!(
        code(&["equivalence", "--direction", "forward", "--eigenvalue", "3"]),
        Some(2)
    );
    assert_eq!(code(&["equivalence", "--direction", "sideways"]), Some(2));
    let status = Command::new(env!("CARGO_BIN_EXE_szj"))
        .args(["equivalence", "--direction", "forward", "--samples", "1"])
        .current_dir(p)
        .env("SZJ_THREADS", "zero")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
