use permlab::harness::{run_converge, ConvergenceTable, ExperimentConfig};

fn v_config(workers: usize) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{"sequence":{{"type":"permuton","descriptor":{{"type":"v"}},"seed":1}},
            "indices":[1000,10000],"scales":["n^1/2","n"],"patterns":["all 2","all 3"],
            "samples":20000,"seed":3,"workers":{workers}}}"#
    ))
    .unwrap()
}

fn value(t: &ConvergenceTable, j: u64, scale: &str, pattern: &str) -> f64 {
    t.rows
        .iter()
        .find(|r| r.j == j && r.scale == scale && r.pattern == pattern)
        .and_then(|r| r.value)
        .unwrap_or_else(|| panic!("no value for {j} {scale} {pattern}"))
}

#[test]
fn v_permuton_table_shape_and_values() {
    let t = run_converge(&v_config(2)).unwrap();
    assert_eq!(t.rows.len(), 2 * 2 * (2 + 6));
    for r in &t.rows {
        let v = r.value.unwrap();
        assert!((0.0..=1.0).contains(&v));
        assert_eq!(r.n, r.j as u128);
        assert_eq!(r.samples, 20_000);
    }
    for j in [1000, 10000] {
        for scale in ["n^0.5", "n"] {
            let pairs = value(&t, j, scale, "12") + value(&t, j, scale, "21");
            assert!((pairs - 1.0).abs() < 1e-9);
            let triples: f64 = ["123", "132", "213", "231", "312", "321"]
                .iter()
                .map(|p| value(&t, j, scale, p))
                .sum();
            assert!((triples - 1.0).abs() < 1e-9);
            // V is decreasing then increasing, so these never occur
            assert_eq!(value(&t, j, scale, "132"), 0.0);
            assert_eq!(value(&t, j, scale, "231"), 0.0);
        }
        assert!((value(&t, j, "n^0.5", "12") - 0.5).abs() < 0.03);
        assert!((value(&t, j, "n", "123") - 0.25).abs() < 0.03);
    }
    // locally the V looks like one monotone branch
    let mono = |j| value(&t, j, "n^0.5", "123") + value(&t, j, "n^0.5", "321");
    assert!(mono(10000) > mono(1000) && mono(10000) > 0.99);
}

#[test]
fn output_is_independent_of_worker_count() {
    let a = run_converge(&v_config(1)).unwrap().to_csv_string().unwrap();
    let b = run_converge(&v_config(4)).unwrap().to_csv_string().unwrap();
    assert_eq!(a, b);
}

#[test]
fn csv_round_trip() {
    let t = run_converge(&v_config(2)).unwrap();
    let text = t.to_csv_string().unwrap();
    assert!(text.starts_with("j,n,scale,pattern,value,half_width,samples\n"));
    let back = ConvergenceTable::read_csv(text.as_bytes()).unwrap();
    assert_eq!(back, t);
}

#[test]
fn oversized_terms_are_skipped() {
    let cfg = ExperimentConfig::from_json(
        r#"{"sequence":{"type":"periodic","base":"21"},"indices":[10,1000000],
            "scales":["n^1/2"],"patterns":["12"],"samples":1000,"length_cap":1000}"#,
    )
    .unwrap();
    let t = run_converge(&cfg).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert!(!t.rows[0].is_skipped());
    assert!(t.rows[1].is_skipped());
    let text = t.to_csv_string().unwrap();
    assert!(text.contains("skipped"));
    assert_eq!(ConvergenceTable::read_csv(text.as_bytes()).unwrap(), t);
}

#[test]
fn exact_mode_matches_counting() {
    let cfg = ExperimentConfig::from_json(
        r#"{"sequence":{"type":"explicit","terms":["35142"]},"indices":[5],
            "scales":["n"],"patterns":["132"],"mode":"exact"}"#,
    )
    .unwrap();
    let t = run_converge(&cfg).unwrap();
    assert_eq!(t.rows[0].value, Some(0.2));
}
