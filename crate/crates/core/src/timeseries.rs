//! Hourly multivariate time series, CSV ingestion and the lag/moving-average
//! transforms used to turn real-time measurements into forecast inputs.
//!
//! Missing values are stored as `NaN` and propagate through every transform.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, NaiveDateTime, TimeZone, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

/// When a column's value for a target hour becomes known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Availability {
    /// Short-term forecasts, usable up to six hours ahead.
    ShortTermForecast,
    /// Weather forecasts, used beyond six hours.
    WeatherForecast,
    /// Day-ahead market data, known for every horizon.
    MarketData,
    /// Measurements only known once the hour has passed.
    RealTime,
}

impl Availability {
    /// Whether the value at the target hour `t + h` may enter a forecast made at `t`.
    pub fn usable_at(self, horizon: usize) -> bool {
        match self {
            Availability::ShortTermForecast => horizon <= 6,
            Availability::WeatherForecast => horizon > 6,
            Availability::MarketData => true,
            Availability::RealTime => horizon == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    #[serde(rename = "class")]
    pub availability: Availability,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<[f64; 2]>,
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum SchemaEntry {
    Bare(Availability),
    Full(ColumnSchema),
}

/// Column name → availability class (and optional clipping range).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Schema {
    pub columns: BTreeMap<String, ColumnSchema>,
}

impl Schema {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        let raw: BTreeMap<String, SchemaEntry> = serde_json::from_str(text)?;
        let columns = raw
            .into_iter()
            .map(|(k, v)| {
                let c = match v {
                    SchemaEntry::Bare(a) => ColumnSchema {
                        availability: a,
                        clip: None,
                    },
                    SchemaEntry::Full(c) => c,
                };
                (k, c)
            })
            .collect();
        Ok(Self { columns })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::json(path, e))
    }

    pub fn to_json(&self) -> String {
        let raw: BTreeMap<&String, SchemaEntry> = self
            .columns
            .iter()
            .map(|(k, c)| {
                let e = if c.clip.is_none() {
                    SchemaEntry::Bare(c.availability)
                } else {
                    SchemaEntry::Full(*c)
                };
                (k, e)
            })
            .collect();
        serde_json::to_string_pretty(&raw).expect("schema serialises")
    }

    pub fn insert(&mut self, name: &str, availability: Availability) {
        self.columns.insert(
            name.to_string(),
            ColumnSchema {
                availability,
                clip: None,
            },
        );
    }
}

/// What to do with CSV columns the schema does not mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownColumns {
    #[default]
    Reject,
    Tag(Availability),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub availability: Availability,
    pub values: Vec<f64>,
}

/// Aligned hourly series. Row `i` is `start + i` hours.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFrame {
    start: DateTime<Utc>,
    columns: Vec<Column>,
    index: HashMap<String, usize>,
}

#[inline]
pub fn is_missing(v: f64) -> bool {
    v.is_nan()
}

/// Hour of day, weekday (Monday = 0) and month (1–12) of a timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Calendar {
    pub hour: u32,
    pub weekday: u32,
    pub month: u32,
}

impl Calendar {
    pub fn of(ts: DateTime<Utc>) -> Self {
        Self {
            hour: ts.hour(),
            weekday: ts.weekday().num_days_from_monday(),
            month: ts.month(),
        }
    }
}

pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>> {
    let naive = NaiveDateTime::parse_from_str(s.trim(), TIMESTAMP_FORMAT)
        .map_err(|e| Error::Data(format!("bad timestamp `{s}`: {e}")))?;
    Ok(Utc.from_utc_datetime(&naive))
}

pub fn format_timestamp(ts: DateTime<Utc>) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

/// Hours since the Unix epoch.
pub fn epoch_hours(ts: DateTime<Utc>) -> i64 {
    ts.timestamp().div_euclid(3600)
}

impl TimeFrame {
    pub fn new(start: DateTime<Utc>, columns: Vec<Column>) -> Result<Self> {
        if start.minute() != 0 || start.second() != 0 || start.nanosecond() != 0 {
            return Err(Error::Data(format!(
                "start {} is not on the hour",
                format_timestamp(start)
            )));
        }
        let n = columns
            .first()
            .map(|c| c.values.len())
            .ok_or_else(|| Error::Data("time frame needs at least one column".into()))?;
        if n == 0 {
            return Err(Error::Data("time frame needs at least one row".into()));
        }
        let mut index = HashMap::new();
        for (i, c) in columns.iter().enumerate() {
            if c.values.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: c.values.len(),
                });
            }
            if index.insert(c.name.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate column `{}`", c.name)));
            }
        }
        Ok(Self {
            start,
            columns,
            index,
        })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].values.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.index
            .get(name)
            .map(|&i| &self.columns[i])
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn values(&self, name: &str) -> Result<&[f64]> {
        self.column(name).map(|c| c.values.as_slice())
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn timestamp(&self, row: usize) -> DateTime<Utc> {
        self.start + Duration::hours(row as i64)
    }

    pub fn calendar(&self, row: usize) -> Calendar {
        Calendar::of(self.timestamp(row))
    }

    /// Row index of `ts`, if it falls inside the frame.
    pub fn row_of(&self, ts: DateTime<Utc>) -> Option<usize> {
        let d = (ts - self.start).num_seconds();
        if d < 0 || d % 3600 != 0 {
            return None;
        }
        let r = (d / 3600) as usize;
        (r < self.n_rows()).then_some(r)
    }

    /// New frame with `column` appended (or replacing one of the same name).
    pub fn with_column(&self, column: Column) -> Result<TimeFrame> {
        let mut cols = self.columns.clone();
        match self.index.get(&column.name) {
            Some(&i) => cols[i] = column,
            None => cols.push(column),
        }
        TimeFrame::new(self.start, cols)
    }

    /// Rows `0..end`, the data visible at forecast origin `end - 1`.
    pub fn truncate(&self, end: usize) -> Result<TimeFrame> {
        let end = end.min(self.n_rows());
        let cols = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                availability: c.availability,
                values: c.values[..end].to_vec(),
            })
            .collect();
        TimeFrame::new(self.start, cols)
    }

    /// Moving average over the `window` most recent hours ending at each row.
    pub fn moving_average(&self, column: &str, window: usize) -> Result<Vec<f64>> {
        let x = self.values(column)?;
        moving_average(x, window)
    }

    /// `out[t] = x[t - k]`, missing for the first `k` rows.
    pub fn lag(&self, column: &str, k: usize) -> Result<Vec<f64>> {
        Ok(lag(self.values(column)?, k))
    }

    /// Drops rows with a missing value in any of `columns`.
    ///
    /// Returns the reduced frame's columns and the original row of each kept
    /// row. The result is not a [`TimeFrame`] because its rows are no longer
    /// hourly-contiguous.
    pub fn drop_incomplete_rows(&self, columns: &[&str]) -> Result<(Vec<Column>, Vec<usize>)> {
        let selected: Vec<&Column> = columns
            .iter()
            .map(|c| self.column(c))
            .collect::<Result<_>>()?;
        let keep: Vec<usize> = (0..self.n_rows())
            .filter(|&i| selected.iter().all(|c| !is_missing(c.values[i])))
            .collect();
        if keep.is_empty() {
            return Err(Error::Data(
                "no complete rows remain; the data range is unusable".into(),
            ));
        }
        let out = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                availability: c.availability,
                values: keep.iter().map(|&i| c.values[i]).collect(),
            })
            .collect();
        Ok((out, keep))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf)?;
        write_atomic(path, &buf)
    }

    pub fn write_csv_to<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["timestamp".to_string()];
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        wr.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec = vec![format_timestamp(self.timestamp(i))];
            rec.extend(self.columns.iter().map(|c| format_value(c.values[i])));
            wr.write_record(&rec)?;
        }
        wr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn schema(&self) -> Schema {
        let mut s = Schema::default();
        for c in &self.columns {
            s.insert(&c.name, c.availability);
        }
        s
    }
}

/// Shortest decimal form that parses back to the same `f64`; empty for missing.
pub fn format_value(v: f64) -> String {
    if is_missing(v) {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let file_name = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn moving_average(x: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::InvalidArgument("moving-average window must be ≥ 1".into()));
    }
    let n = x.len();
    let mut out = vec![f64::NAN; n];
    for (t, o) in out.iter_mut().enumerate().skip(window - 1) {
        let w = &x[t + 1 - window..=t];
        if w.iter().all(|v| !is_missing(*v)) {
            *o = w.iter().sum::<f64>() / window as f64;
        }
    }
    Ok(out)
}

pub fn lag(x: &[f64], k: usize) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|t| if t >= k { x[t - k] } else { f64::NAN })
        .collect()
}

/// Reads an hourly CSV whose first column is `timestamp`.
///
/// Rows are sorted by time and hourly gaps are filled with missing values.
/// Columns listed in the schema with a clipping range are clamped into it.
pub fn ingest_csv(path: &Path, schema: &Schema, unknown: UnknownColumns) -> Result<TimeFrame> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema, unknown)
}

pub fn read_csv<R: std::io::Read>(
    reader: R,
    schema: &Schema,
    unknown: UnknownColumns,
) -> Result<TimeFrame> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0).map(str::trim) != Some("timestamp") {
        return Err(Error::Data("first CSV header must be `timestamp`".into()));
    }
    let names: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
    let mut specs = Vec::with_capacity(names.len());
    for name in &names {
        let spec = match (schema.columns.get(name), unknown) {
            (Some(s), _) => *s,
            (None, UnknownColumns::Tag(a)) => ColumnSchema {
                availability: a,
                clip: None,
            },
            (None, UnknownColumns::Reject) => {
                return Err(Error::Config(format!(
                    "column `{name}` is not in the schema"
                )))
            }
        };
        specs.push(spec);
    }

    let mut rows: Vec<(DateTime<Utc>, Vec<f64>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let ts_text = rec.get(0).unwrap_or("");
        let ts = parse_timestamp(ts_text)?;
        if ts.minute() != 0 || ts.second() != 0 {
            return Err(Error::Data(format!("non-hourly timestamp {ts_text}")));
        }
        let mut vals = Vec::with_capacity(names.len());
        for j in 0..names.len() {
            let cell = rec.get(j + 1).unwrap_or("").trim();
            let v = if cell.is_empty() {
                f64::NAN
            } else {
                cell.parse::<f64>().map_err(|_| {
                    Error::Data(format!("non-numeric value `{cell}` in column `{}`", names[j]))
                })?
            };
            vals.push(v);
        }
        rows.push((ts, vals));
    }
    if rows.is_empty() {
        return Err(Error::Data("CSV has no data rows".into()));
    }
    rows.sort_by_key(|r| r.0);
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::DuplicateTimestamp(format_timestamp(w[0].0)));
        }
    }
    let start = rows[0].0;
    let n = ((rows.last().unwrap().0 - start).num_hours() + 1) as usize;
    let mut values = vec![vec![f64::NAN; n]; names.len()];
    for (ts, vals) in rows {
        let i = (ts - start).num_hours() as usize;
        for (j, v) in vals.into_iter().enumerate() {
            values[j][i] = v;
        }
    }
    let columns = names
        .into_iter()
        .zip(values)
        .zip(specs)
        .map(|((name, mut vals), spec)| {
            if let Some([lo, hi]) = spec.clip {
                for v in vals.iter_mut().filter(|v| !is_missing(**v)) {
                    *v = v.clamp(lo, hi);
                }
            }
            Column {
                name,
                availability: spec.availability,
                values: vals,
            }
        })
        .collect();
    TimeFrame::new(start, columns)
}
