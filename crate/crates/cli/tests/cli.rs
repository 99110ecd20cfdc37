use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;

const SMALL: [&str; 8] = [
    "--set",
    "ensemble.cv.n_splits=3",
    "--set",
    "ensemble.cv.validation_len=240",
    "--set",
    "ensemble.cv.test_len=240",
    "--set",
    "ensemble.recipe.pool_size=3",
];

fn gridcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridcast"))
        .args(args)
        .env_remove("GRIDCAST_SEED")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = gridcast(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

struct Fixture {
    _dir: TempDir,
    data: PathBuf,
    run: PathBuf,
}

impl Fixture {
    fn model(&self) -> String {
        s(&self.run.join("model"))
    }
}

fn train(data: &Path, out: &Path) -> Output {
    let mut args = vec!["train".to_string(), "--data".into(), s(data), "--out".into(), s(out)];
    args.extend(SMALL.iter().map(|a| a.to_string()));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    gridcast(&args)
}

fn fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        ok(&["synth", "--out", &s(&dir.path().join("data")), "--set", "n_hours=3000"]);
        let data = dir.path().join("data/data.csv");
        let run = dir.path().join("run");
        let out = train(&data, &run);
        assert!(out.status.success(), "{}", stderr(&out));
        Fixture { _dir: dir, data, run }
    })
}

fn records(csv: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(csv.as_bytes()).records().map(Result::unwrap).collect()
}

#[test]
fn synth_is_deterministic_and_seed_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["synth", "--out", &s(&a), "--set", "n_hours=500"]);
    ok(&["synth", "--out", &s(&b), "--set", "n_hours=500"]);
    for f in ["data.csv", "schema.json", "truth.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    let out = Command::new(env!("CARGO_BIN_EXE_gridcast"))
        .args(["synth", "--out", &s(&c), "--set", "n_hours=500"])
        .env("GRIDCAST_SEED", "7")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_ne!(std::fs::read(a.join("data.csv")).unwrap(), std::fs::read(c.join("data.csv")).unwrap());
    let truth: serde_json::Value = serde_json::from_slice(&std::fs::read(c.join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["spec"]["seed"], 7);
}

#[test]
fn training_writes_its_artifacts_and_reruns_identically() {
    let f = fixture();
    for name in ["model", "selection.json", "evaluation.json", "config.json"] {
        assert!(f.run.join(name).exists(), "{name} missing");
    }
    let again = f.run.with_file_name("rerun");
    let out = train(&f.data, &again);
    assert!(out.status.success(), "{}", stderr(&out));
    for name in ["evaluation.json", "selection.json"] {
        assert_eq!(
            std::fs::read(f.run.join(name)).unwrap(),
            std::fs::read(again.join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn forecast_has_24_ordered_rows_and_repeats_exactly() {
    let f = fixture();
    let a = ok(&["forecast", "--model", &f.model(), "--data", &s(&f.data)]).stdout;
    let b = ok(&["forecast", "--model", &f.model(), "--data", &s(&f.data)]).stdout;
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("timestamp,horizon,point,lo95,hi95"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 24);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[1], (k + 1).to_string());
        let v: Vec<f64> = r[2..].iter().map(|x| x.parse().unwrap()).collect();
        assert!(v[1] <= v[0] && v[0] <= v[2], "row {}: {r:?}", k + 1);
    }
}

#[test]
fn origin_before_feature_availability_fails() {
    let f = fixture();
    let out = gridcast(&["forecast", "--model", &f.model(), "--data", &s(&f.data), "--at", "2021-01-01T03:00:00Z"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("horizon"), "{}", stderr(&out));
}

#[test]
fn incomplete_model_directory_lists_missing_files() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(f.run.join("model")).unwrap() {
        let p = entry.unwrap().path();
        std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    std::fs::remove_file(dir.path().join("corrector.json")).unwrap();
    let out = gridcast(&["forecast", "--model", &s(dir.path()), "--data", &s(&f.data)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("corrector.json"), "{}", stderr(&out));
}

#[test]
fn unknown_response_column_is_named() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let out = gridcast(&["train", "--data", &s(&f.data), "--out", &s(dir.path()), "--set", "response=co2"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("co2"), "{}", stderr(&out));
}

#[test]
fn unknown_setting_is_a_config_error() {
    let f = fixture();
    let out = gridcast(&["train", "--data", &s(&f.data), "--set", "ensemble.no_such_key=1"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn single_horizon_evaluation_reports_one_row() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let eval = dir.path().join("eval.json");
    let (model, data, eval_s) = (f.model(), s(&f.data), s(&eval));
    let mut args = vec!["evaluate", "--model", &model, "--data", &data, "--out", &eval_s, "--set", "horizons=[3]"];
    args.extend(SMALL);
    ok(&args);
    let text = String::from_utf8(ok(&["report", &eval_s, "--out", &s(dir.path())]).stdout).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "{csv}");
    assert_eq!(text.lines().count(), 3, "{text}");
    assert_eq!(std::fs::read_to_string(dir.path().join("report.txt")).unwrap(), text);
    let row = records(&csv).remove(0);
    assert_eq!(&row[1], "3");
    assert!(row[3].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn training_report_weights_sum_to_one_per_range() {
    let f = fixture();
    let eval = s(&f.run.join("evaluation.json"));
    let text = String::from_utf8(ok(&["report", &eval]).stdout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    ok(&["report", &eval, "--out", &s(dir.path())]);
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut sums = std::collections::BTreeMap::<String, f64>::new();
    let mut text_rows = text.lines().skip(2);
    for cells in records(&csv) {
        let shown: Vec<&str> = text_rows.next().unwrap().split_whitespace().collect();
        let filled: Vec<&str> = cells.iter().filter(|c| !c.is_empty()).collect();
        assert_eq!(shown, filled);
        if cells[0].starts_with('M') && !cells[4].is_empty() {
            *sums.entry(cells[1].to_string()).or_default() += cells[4].parse::<f64>().unwrap();
        }
    }
    assert!(!sums.is_empty(), "{csv}");
    for (range, total) in sums {
        assert!((total - 1.0).abs() < 2e-3, "weights for {range} sum to {total}");
    }
}

#[test]
fn malformed_evaluation_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = gridcast(&["report", &s(&bad)]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("broken.json"), "{}", stderr(&out));
}
