use symdyn::harness::{emit, parse_json, parse_spec, run, suites, ExperimentSpec, Format, Kind, Suite};
use symdyn::Error;

fn spec(text: &str) -> ExperimentSpec {
    parse_spec(text).expect("valid spec")
}

#[test]
fn every_suite_passes_with_seed_7() {
    for suite in Suite::EACH {
        let outcome = suites::run_suite(suite, 7).unwrap();
        let failures: Vec<_> = outcome.assertions.iter().filter(|a| !a.passed).collect();
        assert!(failures.is_empty(), "{}: {failures:?}", suite.as_str());
        assert!(!outcome.assertions.is_empty());
    }
}

#[test]
fn verify_reports_are_byte_identical() {
    let s = spec(r#"{"kind": "verify", "suite": "shearer", "seed": 7}"#);
    let a = emit(&run(&s).unwrap(), Format::Json);
    let b = emit(&run(&s).unwrap(), Format::Json);
    assert_eq!(a, b);
    let report = parse_json(&a).unwrap();
    assert!(report.passed());
    assert_eq!(report, run(&s).unwrap());
}

#[test]
fn different_seeds_draw_different_instances() {
    let a = suites::random_system(&mut rand_from(1));
    let b = suites::random_system(&mut rand_from(2));
    assert_ne!(a, b);
}

fn rand_from(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn path_grid_csv_has_a_lipschitz_column() {
    let s = spec(r#"{"kind": "path", "t_grid": ["0", "1/4", "1/2", "3/4", "1"], "depth": 6}"#);
    let report = run(&s).unwrap();
    assert_eq!(report.rows.len(), 10);
    assert!(report.passed());
    let csv = String::from_utf8(emit(&report, Format::Csv)).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.ends_with("lipschitz,nested"), "{header}");
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.lines().skip(1).all(|l| l.ends_with("true,true")));
}

#[test]
fn malformed_spec_is_rejected_with_a_pointer() {
    match parse_spec(r#"{"kind": "path", "depth": -3}"#) {
        Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/depth"),
        other => panic!("unexpected {other:?}"),
    }
    let s = spec(r#"{"kind": "density", "configs": [{"variant": "periodic", "level": 1, "word": [0, 1]}]}"#);
    assert!(matches!(run(&s), Err(Error::Schema { ref pointer, .. }) if pointer == "/set"));
}

#[test]
fn density_of_a_third_serializes_both_ways() {
    let s = spec(
        r#"{"kind": "density", "chain": {"rank": 1, "scales": [3, 6]},
            "set": {"cosets": {"level": 1, "reps": [1]}}}"#,
    );
    let report = run(&s).unwrap();
    let json = String::from_utf8(emit(&report, Format::Json)).unwrap();
    assert!(json.contains("\"lower\": \"1/3\""), "{json}");
    let csv = String::from_utf8(emit(&report, Format::Csv)).unwrap();
    assert!(csv.contains("0.333333333333,inexact-serialization"), "{csv}");
}

#[test]
fn distances_and_entropy_run_on_oracles() {
    let s = spec(
        r#"{"kind": "distance", "metric": "dstar", "window": 32, "level": 3,
            "configs": [{"variant": "oracle", "box": 64, "rule": "parity"},
                        {"variant": "oracle", "box": 64, "rule": "champernowne_binary"}]}"#,
    );
    let report = run(&s).unwrap();
    assert_eq!(report.rows.len(), 1);
    let s = spec(r#"{"kind": "entropy", "level": 3, "window": 64, "configs": [{"variant": "oracle", "box": 128, "rule": "champernowne_binary"}]}"#);
    let report = run(&s).unwrap();
    assert_eq!(report.rows.len(), 4);
}

#[test]
fn krieger_and_toeplitz_reports() {
    let mut s = ExperimentSpec::new(Kind::Krieger);
    s.depth = Some(8);
    let report = run(&s).unwrap();
    assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
    assert_eq!(report.rows.len(), 3);

    let s = spec(
        r#"{"kind": "toeplitz", "action": "approx", "depth": 3,
            "configs": [{"variant": "toeplitz", "assignments": [[1, 0, 0], [2, 1, 1], [3, 3, 0]]}]}"#,
    );
    let report = run(&s).unwrap();
    assert!(report.passed());
    assert_eq!(report.rows.len(), 3);
    assert!(report.notes.iter().any(|n| n.contains("level 3")));
}

#[test]
fn omega_geometric_boxes() {
    let s = spec(
        r#"{"kind": "omega", "boxes": {"growth": "geometric", "eps": "1/2", "count": 13},
            "configs": [{"variant": "oracle", "box": 5000, "rule": "block_alternating(1/2)"}]}"#,
    );
    let report = run(&s).unwrap();
    assert_eq!(report.rows.len(), 13);
    assert!(report.passed());
}
