use std::collections::BTreeMap;

use gridcast::synth::{generate, write, SyntheticSpec, Truth, DATA_FILE, SCHEMA_FILE, TRUTH_FILE};
use gridcast::timeseries::{ingest_csv, Schema, UnknownColumns};

fn acf1(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let c0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    let c1: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    c1 / c0
}

#[test]
fn residual_autocorrelation_matches_phi() {
    for (seed, phi) in [(1u64, 0.8), (2, 0.5), (3, -0.3)] {
        let spec = SyntheticSpec {
            seed,
            n_hours: 10_000,
            residual_ar: vec![phi],
            ..SyntheticSpec::default()
        };
        let s = generate(&spec).unwrap();
        let r = acf1(&s.residual);
        assert!((r - phi).abs() < 0.05, "phi {phi}: lag-1 ACF {r}");
    }
}

#[test]
fn same_seed_writes_identical_bytes() {
    let spec = SyntheticSpec {
        n_hours: 2000,
        ..SyntheticSpec::default()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write(&generate(&spec).unwrap(), a.path()).unwrap();
    write(&generate(&spec).unwrap(), b.path()).unwrap();
    for f in [DATA_FILE, SCHEMA_FILE, TRUTH_FILE] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
    let other = SyntheticSpec {
        seed: spec.seed + 1,
        ..spec
    };
    let c = tempfile::tempdir().unwrap();
    write(&generate(&other).unwrap(), c.path()).unwrap();
    assert_ne!(
        std::fs::read(a.path().join(DATA_FILE)).unwrap(),
        std::fs::read(c.path().join(DATA_FILE)).unwrap()
    );
}

#[test]
fn written_files_reproduce_the_response() {
    let spec = SyntheticSpec {
        n_hours: 1500,
        residual_ar: vec![],
        residual_sd: 0.0,
        noise_sd: 0.0,
        ..SyntheticSpec::default()
    };
    let dir = tempfile::tempdir().unwrap();
    write(&generate(&spec).unwrap(), dir.path()).unwrap();
    let schema = Schema::load(&dir.path().join(SCHEMA_FILE)).unwrap();
    let frame = ingest_csv(&dir.path().join(DATA_FILE), &schema, UnknownColumns::Reject).unwrap();
    let truth: Truth =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(TRUTH_FILE)).unwrap()).unwrap();
    assert_eq!(truth.spec, spec);
    let y = frame.values(&spec.response).unwrap();
    for t in 0..frame.n_rows() {
        let row: BTreeMap<String, f64> = spec
            .drivers
            .iter()
            .map(|d| (d.name.clone(), frame.values(&d.name).unwrap()[t]))
            .collect();
        assert_eq!(y[t], truth.systematic(t, &row));
    }
}
