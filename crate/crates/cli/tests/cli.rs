use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn projmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projmetric"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str], out: &Path) -> (i32, Value) {
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap();
    full.extend(["--out", out_str]);
    let status = projmetric(&full).status.code().unwrap();
    let text = std::fs::read_to_string(out).expect("report written");
    (status, serde_json::from_str(&text).unwrap())
}

#[test]
fn verify_example_headline() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(&["verify-example", "--n", "3", "--f", "2+0.5*cos(2*pi*x)"], &dir.path().join("r.json"));
    assert_eq!(code, 0, "{r:#}");
    assert_eq!(r["schema"], 1);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["results"]["verdict"], "projective-nonaffine");
    let a = &r["results"]["A"];
    for (i, j, want) in [(0, 0, 0.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 0.0)] {
        assert!((a[i][j].as_f64().unwrap() - want).abs() < 1e-6);
    }
    let verdicts = r["results"]["quotient"]["verdicts"].as_array().unwrap();
    assert!(verdicts.iter().any(|v| v == "bound ≤ 2 consistent"));
    assert!(r["conventions"]["representation"].as_str().unwrap().contains("phi*sigma = a sigma"));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let args = ["torus", "--matrix", "1,1,0,1", "--samples", "40", "--out", out.to_str().unwrap()];
    assert!(projmetric(&args).status.success());
    let first = std::fs::read(&out).unwrap();
    assert!(projmetric(&args).status.success());
    assert_eq!(first, std::fs::read(&out).unwrap());
}

#[test]
fn torus_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(&["torus", "--matrix", "1,1,0,1"], &dir.path().join("a.json"));
    assert_eq!(code, 0);
    assert_eq!(r["results"]["verdict"], "affine-nonisometric");
    assert_eq!(r["results"]["pullback_metric"], serde_json::json!([[1.0, 1.0], [1.0, 2.0]]));
    let (code, r) = report(&["torus", "--matrix", "0,-1,1,0"], &dir.path().join("b.json"));
    assert_eq!(code, 0);
    assert_eq!(r["results"]["classifications"][0]["classification"]["class"], "isometry");
    let (code, r) = report(&["torus", "--matrix", "2,0,0,1"], &dir.path().join("c.json"));
    assert_eq!(code, 2);
    assert_eq!(r["status"], "error");
}

#[test]
fn lemma1_reports_first_violation() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(&["lemma1", "--alpha", "1.5707963", "--s", "1.0"], &dir.path().join("l.json"));
    assert_eq!(code, 0);
    assert_eq!(r["results"]["verdict"], "violating k = 2");
    let (code, r) = report(&["lemma1", "--alpha", "0", "--s", "7", "--kmax", "1000"], &dir.path().join("z.json"));
    assert_eq!(code, 0);
    assert_eq!(r["results"]["verdict"], "no violating k up to 1000");
}

#[test]
fn sphere_and_pullback_check() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(
        &["sphere", "--matrix", "2,0,0,0,1,0,0,0,0.5", "--samples", "60"],
        &dir.path().join("s.json"),
    );
    assert_eq!(code, 0, "{r:#}");
    assert_eq!(r["results"]["verdict"], "projective-nonaffine");
    let (code, _) = report(&["sphere", "--matrix", "2,0,0,0,1,0,0,0,1"], &dir.path().join("bad.json"));
    assert_eq!(code, 2);
    let (code, r) = report(&["pullback-check", "--grid", "20"], &dir.path().join("p.json"));
    assert_eq!(code, 0);
    assert_eq!(r["results"]["algebraic"]["grid"], 20);
}

#[test]
fn scenario_file_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("lc.json");
    let (code, _) = report(
        &["verify-example", "--n", "3", "--samples", "40", "--save-scenario", scenario.to_str().unwrap()],
        &dir.path().join("v.json"),
    );
    assert_eq!(code, 0);

    let (code, r) = report(
        &["representation", "--scenario", scenario.to_str().unwrap(), "--maps", "swap,t1", "--samples", "30"],
        &dir.path().join("rep.json"),
    );
    assert_eq!(code, 0, "{r:#}");
    assert_eq!(r["results"]["representations"].as_array().unwrap().len(), 2);

    let csv = dir.path().join("traces");
    let (code, r) = report(
        &[
            "geodesics",
            "--scenario",
            scenario.to_str().unwrap(),
            "--shots",
            "2",
            "--emit-csv",
            csv.to_str().unwrap(),
        ],
        &dir.path().join("g.json"),
    );
    assert_eq!(code, 0, "{r:#}");
    let text = std::fs::read_to_string(csv.join("shot000_g.csv")).unwrap();
    let mut lines = text.lines();
    let hash = r["config_hash"].as_str().unwrap();
    assert_eq!(lines.next().unwrap(), format!("# metric=g config={hash}"));
    assert_eq!(lines.next().unwrap(), "t,x,y1,z,v_x,v_y1,v_z,energy");
}

#[test]
fn config_file_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": {"name": "lemma1", "alpha": 2.0943951023931953, "s": [0.0], "kmax": 10}, "seed": 3}"#)
        .unwrap();
    let (code, r) = report(&["--config", cfg.to_str().unwrap()], &dir.path().join("c.json"));
    assert_eq!(code, 0);
    assert_eq!(r["config"]["seed"], 3);
    assert_eq!(r["results"]["verdict"], "violating k = 1");

    assert_eq!(projmetric(&[]).status.code(), Some(2));
    assert_eq!(projmetric(&["torus", "--matrix", "1,2"]).status.code(), Some(2));
    assert_eq!(projmetric(&["verify-example", "--base", "round"]).status.code(), Some(2));
    assert_eq!(projmetric(&["verify-example", "--f", "1+0.1*cos(2*pi*x)"]).status.code(), Some(2));
    std::fs::write(&cfg, r#"{"unknown": true}"#).unwrap();
    assert_eq!(projmetric(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn failed_expectation_exits_one() {
    // a loose sampling box with an extremely tight tolerance cannot certify
    // the projective equivalence
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = report(&["sphere", "--matrix", "2,0,0,0,1,0,0,0,0.5", "--tol", "1e-30", "--samples", "10"], &dir.path().join("f.json"));
    assert_eq!(code, 1, "{r:#}");
    assert_eq!(r["status"], "verification-failed");
}
