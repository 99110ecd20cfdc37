//! `gridcast`: synthesize data, train the compound forecaster, evaluate it,
//! issue 24-hour forecasts and tabulate evaluation reports.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.

mod config;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gridcast::ensemble::{build_compound, score_routes, CompoundForecaster, HORIZONS};
use gridcast::error::ErrorKind;
use gridcast::synth::{self, SyntheticSpec};
use gridcast::timeseries::{ingest_csv, parse_timestamp, write_atomic, Schema, TimeFrame, UnknownColumns};
use log::info;

use config::{resolve, RunConfig};
use report::EvaluationFile;

/// A failed command: the module that failed, the cause and the exit code.
#[derive(Debug)]
pub struct Failure {
    module: &'static str,
    message: String,
    code: u8,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            module: "config",
            message: message.into(),
            code: 2,
        }
    }

    pub fn data(module: &'static str, message: impl Into<String>) -> Self {
        Self {
            module,
            message: message.into(),
            code: 3,
        }
    }

    pub fn lib(module: &'static str, e: gridcast::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        };
        Self {
            module,
            message: e.to_string(),
            code,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.module, self.message)
    }
}

trait In<T> {
    fn within(self, module: &'static str) -> Result<T, Failure>;
}

impl<T> In<T> for gridcast::Result<T> {
    fn within(self, module: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure::lib(module, e))
    }
}

#[derive(Parser)]
#[command(name = "gridcast", version, about = "Hourly emission-intensity forecasting")]
struct Cli {
    /// Log progress (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a setting, e.g. `--set ensemble.recipe.pool_size=8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Args)]
struct DataArgs {
    /// Hourly CSV whose first column is `timestamp`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Column availability classes; defaults to `schema.json` next to the data.
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic data set with its ground truth.
    Synth {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the compound forecaster and write the model, selection and evaluation reports.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        data: DataArgs,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a trained forecaster on held-out rows of a data set.
    Evaluate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        data: DataArgs,
        /// Model directory written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// First forecast origin (UTC timestamp); defaults to the first row.
        #[arg(long)]
        from: Option<String>,
        /// Origins before this timestamp; defaults to the last usable origin.
        #[arg(long)]
        to: Option<String>,
        /// Evaluation JSON to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the 24 forecasts issued at one origin.
    Forecast {
        #[command(flatten)]
        data: DataArgs,
        /// Model directory written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Forecast origin (UTC timestamp); defaults to the latest origin the data allows.
        #[arg(long)]
        at: Option<String>,
        /// CSV to write; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarise evaluation files as a text table and a CSV.
    Report {
        /// Evaluation JSON files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Directory for `report.txt` and `report.csv`; the text goes to standard output either way.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_frame(data: &Path, schema: &Path) -> Result<TimeFrame, Failure> {
    let schema = Schema::load(schema).within("timeseries")?;
    ingest_csv(data, &schema, UnknownColumns::Reject).within("timeseries")
}

fn run_config(cfg: &ConfigArgs, data: &DataArgs) -> Result<RunConfig, Failure> {
    let mut run: RunConfig = resolve(cfg.config.as_deref(), &cfg.sets, "seed")?;
    if data.data.is_some() {
        run.data = data.data.clone();
    }
    if data.schema.is_some() {
        run.schema = data.schema.clone();
    }
    run.check()?;
    Ok(run)
}

fn run_frame(run: &RunConfig) -> Result<TimeFrame, Failure> {
    let data = run
        .data
        .as_ref()
        .ok_or_else(|| Failure::config("no data file given (use --data or `data` in the config)"))?;
    load_frame(data, &run.schema_path()?)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    write_atomic(path, text.as_bytes()).within("output")
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialises");
    s.push('\n');
    s
}

fn cmd_synth(cfg: &ConfigArgs, out: &Path) -> Result<(), Failure> {
    let spec: SyntheticSpec = resolve(cfg.config.as_deref(), &cfg.sets, "seed")?;
    let s = synth::generate(&spec).within("synth")?;
    synth::write(&s, out).within("synth")?;
    info!("wrote {} hours to {}", spec.n_hours, out.display());
    Ok(())
}

fn cmd_train(cfg: &ConfigArgs, data: &DataArgs, out: Option<&Path>) -> Result<(), Failure> {
    let mut run = run_config(cfg, data)?;
    if let Some(o) = out {
        run.output = Some(o.to_path_buf());
    }
    let out = run
        .output
        .clone()
        .ok_or_else(|| Failure::config("no output directory given (use --out or `output` in the config)"))?;
    let frame = run_frame(&run)?;
    let trained = build_compound(&frame, &run.response, run.kind, &run.ensemble).within("ensemble")?;
    trained.forecaster.save(&out.join("model")).within("ensemble")?;
    let r = &trained.report;
    let evaluation = EvaluationFile {
        config_hash: run.hash(),
        seed: run.seed,
        kind: r.kind,
        response: r.response.clone(),
        plan: r.plan.clone(),
        corrector: r.corrector.clone(),
        rows: report::training_rows(&trained.forecaster, &r.horizons, &r.holdout, &run.horizons),
        horizons: r.horizons.iter().filter(|e| run.horizons.contains(&e.horizon)).cloned().collect(),
        holdout: r.holdout.iter().filter(|s| run.horizons.contains(&s.horizon)).cloned().collect(),
    };
    write(&out.join("selection.json"), &json(&trained.selections))?;
    write(&out.join("evaluation.json"), &evaluation.to_json())?;
    write(&out.join("config.json"), &json(&run))?;
    info!("model written to {}", out.join("model").display());
    Ok(())
}

fn origin_row(frame: &TimeFrame, text: &str) -> Result<usize, Failure> {
    let ts = parse_timestamp(text).within("timeseries")?;
    frame
        .row_of(ts)
        .ok_or_else(|| Failure::data("timeseries", format!("timestamp {text} is outside the data")))
}

fn cmd_evaluate(
    cfg: &ConfigArgs,
    data: &DataArgs,
    model: &Path,
    from: Option<&str>,
    to: Option<&str>,
    out: &Path,
) -> Result<(), Failure> {
    let run = run_config(cfg, data)?;
    let forecaster = CompoundForecaster::load(model).within("ensemble")?;
    let frame = run_frame(&run)?;
    let start = from.map(|t| origin_row(&frame, t)).transpose()?.unwrap_or(0);
    let last = frame.n_rows().saturating_sub(HORIZONS);
    let end = to.map(|t| origin_row(&frame, t)).transpose()?.unwrap_or(last).min(last);
    if start >= end {
        return Err(Failure::data("cv", "no forecast origin lies in the requested range"));
    }
    let origins: Vec<usize> = (start..end).collect();
    let scores = score_routes(&forecaster, &frame, &origins, &forecaster.plan.routes).within("ensemble")?;
    let scores: Vec<_> = scores.into_iter().filter(|s| run.horizons.contains(&s.horizon)).collect();
    let evaluation = EvaluationFile {
        config_hash: run.hash(),
        seed: run.seed,
        kind: forecaster.kind,
        response: forecaster.response.clone(),
        plan: forecaster.plan.to_string(),
        corrector: forecaster.corrector.as_ref().map(|c| c.model.order.to_string()),
        rows: report::holdout_rows(&forecaster, &scores, &run.horizons),
        horizons: Vec::new(),
        holdout: scores,
    };
    write(out, &evaluation.to_json())
}

fn cmd_forecast(data: &DataArgs, model: &Path, at: Option<&str>, out: Option<&Path>) -> Result<(), Failure> {
    let forecaster = CompoundForecaster::load(model).within("ensemble")?;
    let data_path = data
        .data
        .as_ref()
        .ok_or_else(|| Failure::config("forecast needs --data"))?;
    let schema = data
        .schema
        .clone()
        .unwrap_or_else(|| data_path.with_file_name(synth::SCHEMA_FILE));
    let frame = load_frame(data_path, &schema)?;
    let t = match at {
        Some(text) => origin_row(&frame, text)?,
        None => frame.n_rows().checked_sub(HORIZONS + 1).ok_or_else(|| {
            Failure::data("ensemble", format!("the data has {} rows; a forecast needs at least 25", frame.n_rows()))
        })?,
    };
    let rows = forecaster.forecast_24h(&frame, t).within("ensemble")?;
    let csv = CompoundForecaster::forecast_csv(&rows);
    match out {
        Some(p) => write(p, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_report(files: &[PathBuf], out: Option<&Path>) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for f in files {
        rows.extend(EvaluationFile::load(f)?.rows);
    }
    let text = report::to_text(&rows);
    if let Some(dir) = out {
        write(&dir.join("report.txt"), &text)?;
        write(&dir.join("report.csv"), &report::to_csv(&rows))?;
    }
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let (name, result) = match &cli.command {
        Command::Synth { cfg, out } => ("synth", cmd_synth(cfg, out)),
        Command::Train { cfg, data, out } => ("train", cmd_train(cfg, data, out.as_deref())),
        Command::Evaluate {
            cfg,
            data,
            model,
            from,
            to,
            out,
        } => (
            "evaluate",
            cmd_evaluate(cfg, data, model, from.as_deref(), to.as_deref(), out),
        ),
        Command::Forecast { data, model, at, out } => {
            ("forecast", cmd_forecast(data, model, at.as_deref(), out.as_deref()))
        }
        Command::Report { files, out } => ("report", cmd_report(files, out.as_deref())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gridcast {name}: {f}");
            ExitCode::from(f.code)
        }
    }
}
