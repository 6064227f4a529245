//! Tabular experiment reports with CSV and JSON serialization.
//!
//! CSV output is a plain table: one header row, floats written with 9
//! significant digits, error cells written as `ERR:<message>`. JSON output
//! additionally carries the run metadata and stores floats at full
//! precision.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const ERROR_PREFIX: &str = "ERR:";

/// Formats like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    /// A value that could not be computed.
    Error(String),
}

impl Cell {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Cell::Error(_))
    }

    fn to_csv_field(&self) -> String {
        match self {
            Cell::Num(x) => format_sig9(*x),
            Cell::Text(s) => s.clone(),
            Cell::Error(m) => format!("{ERROR_PREFIX}{m}"),
        }
    }

    fn from_csv_field(s: &str) -> Self {
        if let Some(m) = s.strip_prefix(ERROR_PREFIX) {
            return Cell::Error(m.to_string());
        }
        match s.parse::<f64>() {
            Ok(x) => Cell::Num(x),
            Err(_) => Cell::Text(s.to_string()),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(format_sig9(*x)),
            Cell::Text(s) => json!(s),
            Cell::Error(m) => json!({ "error": m }),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => Ok(Cell::Num(n.as_f64().unwrap_or(f64::NAN))),
            Value::String(s) => Ok(match s.as_str() {
                "NaN" => Cell::Num(f64::NAN),
                "inf" => Cell::Num(f64::INFINITY),
                "-inf" => Cell::Num(f64::NEG_INFINITY),
                _ => Cell::Text(s.clone()),
            }),
            Value::Object(o) => match o.get("error") {
                Some(Value::String(m)) => Ok(Cell::Error(m.clone())),
                _ => Err(Error::InvalidConfig(format!("unrecognized report cell {v}"))),
            },
            _ => Err(Error::InvalidConfig(format!("unrecognized report cell {v}"))),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Num(x as f64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportMetadata {
    pub command: String,
    /// First 16 hex digits of SHA-256 over the canonical parameter JSON.
    pub config_hash: String,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub params: Value,
    /// Command-specific results that do not fit the table.
    pub summary: Value,
}

impl ReportMetadata {
    pub fn new(command: &str, params: Value, seed: Option<u64>) -> Self {
        let canonical = serde_json::to_string(&params).expect("params serialize");
        let digest = Sha256::digest(canonical.as_bytes());
        Self {
            command: command.to_string(),
            config_hash: hex::encode(digest)[..16].to_string(),
            seed,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            params,
            summary: Value::Null,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub metadata: ReportMetadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ExperimentReport {
    pub fn new(metadata: ReportMetadata, columns: Vec<String>) -> Self {
        Self {
            metadata,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric value at `(row, column name)`.
    pub fn num(&self, row: usize, name: &str) -> Option<f64> {
        self.column(name).and_then(|c| self.rows[row][c].as_num())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv_field))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Parses a table written by [`to_csv`](Self::to_csv). Metadata is not
    /// part of the CSV and comes back empty.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(Cell::from_csv_field).collect());
        }
        Ok(Self {
            metadata: ReportMetadata {
                command: String::new(),
                config_hash: String::new(),
                seed: None,
                timestamp: 0,
                params: Value::Null,
                summary: Value::Null,
            },
            columns,
            rows,
        })
    }

    pub fn to_json(&self) -> Value {
        let m = &self.metadata;
        json!({
            "metadata": {
                "command": m.command,
                "config_hash": m.config_hash,
                "seed": m.seed,
                "timestamp": m.timestamp,
                "params": m.params,
                "summary": m.summary,
            },
            "columns": self.columns,
            "rows": self.rows.iter()
                .map(|r| r.iter().map(Cell::to_json).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let bad = |what: &str| Error::InvalidConfig(format!("report JSON missing {what}"));
        let meta = v.get("metadata").and_then(Value::as_object).ok_or_else(|| bad("metadata"))?;
        let get = |k: &str| meta.get(k).cloned().unwrap_or(Value::Null);
        let metadata = ReportMetadata {
            command: get("command").as_str().unwrap_or_default().to_string(),
            config_hash: get("config_hash").as_str().unwrap_or_default().to_string(),
            seed: get("seed").as_u64(),
            timestamp: get("timestamp").as_u64().unwrap_or(0),
            params: get("params"),
            summary: get("summary"),
        };
        let columns = v
            .get("columns")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("columns"))?
            .iter()
            .map(|c| c.as_str().map(str::to_string).ok_or_else(|| bad("column names")))
            .collect::<Result<Vec<_>>>()?;
        let rows = v
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("rows"))?
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| bad("row array"))?
                    .iter()
                    .map(Cell::from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            metadata,
            columns,
            rows,
        })
    }

    /// Aligned plain-text table for terminals.
    pub fn to_table(&self) -> String {
        let cells: Vec<Vec<String>> = std::iter::once(self.columns.clone())
            .chain(self.rows.iter().map(|r| r.iter().map(Cell::to_csv_field).collect()))
            .collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|c| cells.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &cells {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }
}

/// Minimal gnuplot script plotting `y_columns` against `x_column` from a CSV
/// file written by [`ExperimentReport::to_csv`].
pub fn gnuplot_script(csv_path: &str, report: &ExperimentReport, x_column: &str, y_columns: &[&str], title: &str) -> String {
    let idx = |name: &str| report.column(name).map(|c| c + 1).unwrap_or(0);
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set xlabel '{x_column}'");
    let plots: Vec<String> = y_columns
        .iter()
        .map(|y| format!("'{csv_path}' using {}:{} with linespoints", idx(x_column), idx(y)))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

/// Object with the given keys, for report parameters.
pub fn params<const N: usize>(pairs: [(&str, Value); N]) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}
