use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn permlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const M1: &str = r#"{"kind":"multi_scale","m":1,
    "targets":[{"scale":"n^1/2","component":{"type":"periodic","base":"21"}}],
    "global":{"type":"periodic","base":"1"},"local":{"type":"periodic","base":"1"}}"#;

const M2: &str = r#"{"kind":"multi_scale","m":2,
    "targets":[{"scale":"n^1/3","component":{"type":"periodic","base":"21"}},
               {"scale":"n^2/3","component":{"type":"periodic","base":"1"}}],
    "global":{"type":"periodic","base":"1"},"local":{"type":"periodic","base":"21"}}"#;

#[test]
fn ops_outputs() {
    assert_eq!(
        stdout(&permlab(&["ops", "box", "213", "4312"])),
        "8 4 12 7 3 11 5 1 9 6 2 10\n"
    );
    assert_eq!(stdout(&permlab(&["ops", "inverse", "1"])), "1\n");
    assert_eq!(
        stdout(&permlab(&["ops", "inverse", "24153"])),
        "3 1 5 2 4\n"
    );
    assert_eq!(stdout(&permlab(&["ops", "dsum", "21", "21"])), "2 1 4 3\n");
    assert_eq!(stdout(&permlab(&["ops", "power", "12", "2"])), "1 2 3 4\n");
    assert_eq!(stdout(&permlab(&["ops", "subst", "12", "21"])), "2 1 4 3\n");
}

#[test]
fn count_and_exact_density() {
    assert_eq!(stdout(&permlab(&["count", "132", "35142"])), "2\n");
    let v: Value = serde_json::from_str(&stdout(&permlab(&["density", "35142", "132"]))).unwrap();
    assert_eq!(v["value"].as_f64(), Some(0.2));
}

#[test]
fn monte_carlo_density_is_reproducible() {
    let args = [
        "density",
        "35142",
        "12",
        "--mode",
        "mc",
        "--seed",
        "9",
        "--samples",
        "5000",
    ];
    let (a, b) = (permlab(&args), permlab(&args));
    assert_eq!(stdout(&a), stdout(&b));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.4).abs() < 0.05);
}

#[test]
fn sample_permuton_length() {
    let text = stdout(&permlab(&[
        "sample-permuton",
        r#"{"type":"v"}"#,
        "--length",
        "50",
        "--seed",
        "2",
    ]));
    let mut vals: Vec<usize> = text
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    vals.sort_unstable();
    assert_eq!(vals, (1..=50).collect::<Vec<_>>());
}

#[test]
fn construct_writes_permutation_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tau.txt");
    stdout(&permlab(&["construct", M1, "--out", path_str(&out)]));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("tau.txt.report.json")).unwrap())
            .unwrap();
    let len = fs::read_to_string(&out).unwrap().split_whitespace().count();
    assert_eq!(report["n_m"].as_u64(), Some(len as u64));
    assert_eq!(report["m"].as_u64(), Some(1));
}

#[test]
fn construct_m2_threshold() {
    let desc = tempfile::NamedTempFile::new().unwrap();
    fs::write(desc.path(), M2).unwrap();
    let at = format!("@{}", path_str(desc.path()));
    let report: Value = serde_json::from_str(&stdout(&permlab(&["construct", &at]))).unwrap();
    assert_eq!(report["N_m"].as_u64(), Some(64));
    let ms: Vec<u64> = report["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["M"].as_u64().unwrap())
        .collect();
    assert_eq!(ms, [2, 4, 4, 2]);
}

#[test]
fn cap_exceeded_writes_report_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tau.txt");
    let o = permlab(&[
        "construct",
        M2,
        "--length-cap",
        "10",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("tau.txt.report.json")).unwrap())
            .unwrap();
    assert_eq!(report["n_m"].as_u64(), Some(64));
    assert_eq!(report["materialized"].as_bool(), Some(false));
}

#[test]
fn malformed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tau.txt");
    let o = permlab(&["construct", "{not json", "--out", path_str(&out)]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!out.exists());
    assert_eq!(permlab(&["ops", "inverse", "1 1 2"]).status.code(), Some(2));
    assert_eq!(permlab(&["count", "12", "1 3"]).status.code(), Some(2));
    assert_eq!(
        permlab(&["ops", "inverse", "@/nonexistent/file"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn converge_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"sequence":{"type":"permuton","descriptor":{"type":"grid","cells":[[1]]},"seed":5},
            "indices":[200,2000],"scales":["n^1/2"],"patterns":["all 3"],"samples":10000,"seed":11}"#,
    )
    .unwrap();
    let at = format!("@{}", path_str(&cfg));
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    stdout(&permlab(&[
        "converge",
        &at,
        "--workers",
        "1",
        "--out",
        path_str(&a),
    ]));
    stdout(&permlab(&[
        "converge",
        &at,
        "--workers",
        "4",
        "--out",
        path_str(&b),
    ]));
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("j,n,scale,pattern,value,half_width,samples\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 6);
}
