//! Event-log ingestion and report emission.
//!
//! Event logs are CSV with header `time,investor_id,side,price,volume[,adjust]`.
//! `time` is an integer or an RFC-3339 timestamp (converted to Unix seconds),
//! `side` is `B` or `S`.
//!
//! Reports are CSV or JSON with the columns of [`report_columns`]. Floats are
//! written in shortest round-trip form, so parsing a report back reproduces
//! every value bit for bit.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::events::EventRecord;
use crate::moments::{InvestorId, Side};
use crate::pipeline::{Family, ReportRow, TauSweepRow};

const EVENT_HEADER: [&str; 6] = ["time", "investor_id", "side", "price", "volume", "adjust"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: Option<&Path>, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.map(Path::to_path_buf).unwrap_or_default(),
            source,
        },
        other => Error::Parse {
            line,
            column: String::new(),
            reason: format!("{other:?}"),
        },
    }
}

pub fn read_events(path: &Path) -> Result<Vec<EventRecord>> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_events(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Parse an event log, checking the header, every field and time order.
pub fn parse_events<R: Read>(reader: R) -> Result<Vec<EventRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(h) => h.map_err(|e| csv_err(None, e))?,
        None => {
            return Err(Error::Parse {
                line: 1,
                column: String::new(),
                reason: "missing header".into(),
            })
        }
    };
    let names: Vec<&str> = header.iter().collect();
    let with_adjust = match names.len() {
        5 | 6 if names[..] == EVENT_HEADER[..names.len()] => names.len() == 6,
        _ => {
            return Err(Error::Parse {
                line: 1,
                column: String::new(),
                reason: format!("expected header `{}[,adjust]`", EVENT_HEADER[..5].join(",")),
            })
        }
    };

    let mut out = Vec::new();
    let mut previous: Option<i64> = None;
    for rec in records {
        let rec = rec.map_err(|e| csv_err(None, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let expected = if with_adjust { 6 } else { 5 };
        if rec.len() != expected {
            return Err(Error::Parse {
                line,
                column: String::new(),
                reason: format!("expected {expected} fields, found {}", rec.len()),
            });
        }
        let bad = |column: &str, reason: String| Error::Parse {
            line,
            column: column.into(),
            reason,
        };
        let time = parse_time(&rec[0]).map_err(|r| bad("time", r))?;
        if rec[1].is_empty() {
            return Err(bad("investor_id", "empty investor id".into()));
        }
        let side = match &rec[2] {
            "B" => Side::Buy,
            "S" => Side::Sell,
            other => return Err(bad("side", format!("expected B or S, found `{other}`"))),
        };
        let price = parse_positive(&rec[3]).map_err(|r| bad("price", format!("price {r}")))?;
        let volume = parse_positive(&rec[4]).map_err(|r| bad("volume", format!("volume {r}")))?;
        let adjust = if with_adjust {
            parse_positive(&rec[5]).map_err(|r| bad("adjust", format!("adjust {r}")))?
        } else {
            1.0
        };
        if let Some(p) = previous {
            if time < p {
                return Err(Error::Ordering {
                    context: format!("line {line}"),
                    time,
                    previous: p,
                });
            }
        }
        previous = Some(time);
        out.push(EventRecord {
            time,
            investor_id: InvestorId::new(&rec[1]),
            side,
            price,
            volume,
            adjust,
        });
    }
    Ok(out)
}

fn parse_time(s: &str) -> std::result::Result<i64, String> {
    if let Ok(t) = s.parse::<i64>() {
        return Ok(t);
    }
    chrono::DateTime::parse_from_rfc3339(s)
        .map(|dt| dt.timestamp())
        .map_err(|_| format!("`{s}` is neither an integer nor an RFC-3339 timestamp"))
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, found {s}"))
    }
}

/// Write an event log with the `adjust` column always present.
pub fn write_events<W: Write>(writer: W, events: &[EventRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(EVENT_HEADER).map_err(|e| csv_err(None, e))?;
    for e in events {
        w.write_record([
            e.time.to_string(),
            e.investor_id.to_string(),
            e.side.code().to_string(),
            fmt_f64(e.price),
            fmt_f64(e.volume),
            fmt_f64(e.adjust),
        ])
        .map_err(|e| csv_err(None, e))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: Default::default(),
        source,
    })
}

pub fn write_events_file(path: &Path, events: &[EventRecord]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_events(BufWriter::new(file), events).map_err(|e| with_path(e, path))
}

/// Shortest decimal that parses back to the same `f64`, switching to exponent
/// form for very small or large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::config(format!(
                "unknown report format `{s}` (expected csv or json)"
            ))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

const BASE_COLUMNS: [&str; 24] = [
    "window_index",
    "window_anchor",
    "family",
    "status",
    "investor_id",
    "sale_time",
    "tick_count",
    "leg_count",
    "sale_count",
    "investor_count",
    "mean",
    "second_moment",
    "volatility",
    "value_volatility",
    "volume_volatility",
    "value_volume_cov",
    "current_value_volatility",
    "past_value_volatility",
    "current_past_cov",
    "original_value_volatility",
    "current_original_cov",
    "avg_current_value_volatility",
    "avg_original_value_volatility",
    "cov",
];

const ORACLE_COLUMNS: [&str; 3] = [
    "oracle_direct_volatility",
    "oracle_delta_abs",
    "oracle_delta_rel",
];

/// Report columns in output order; the oracle columns only in oracle mode.
pub fn report_columns(oracle: bool) -> Vec<&'static str> {
    let mut cols = BASE_COLUMNS.to_vec();
    if oracle {
        cols.extend(ORACLE_COLUMNS);
    }
    cols
}

enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(*v),
            Cell::Text(s) => s.clone(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => {
                i64::try_from(*v).map_or_else(|_| Value::from(v.to_string()), Value::from)
            }
            Cell::Float(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Null => Value::Null,
        }
    }
}

fn opt_int<T: Into<i128>>(v: Option<T>) -> Cell {
    v.map_or(Cell::Null, |v| Cell::Int(v.into()))
}

fn opt_float(v: Option<f64>) -> Cell {
    v.map_or(Cell::Null, Cell::Float)
}

fn cell(row: &ReportRow, column: &str) -> Cell {
    match column {
        "window_index" => Cell::Int(row.window_index as i128),
        "window_anchor" => Cell::Int(row.window_anchor.into()),
        "family" => Cell::Text(row.family.as_str().into()),
        "status" => Cell::Text(row.status.as_str().into()),
        "investor_id" => row.investor_id.clone().map_or(Cell::Null, Cell::Text),
        "sale_time" => opt_int(row.sale_time),
        "tick_count" => opt_int(row.tick_count),
        "leg_count" => opt_int(row.leg_count),
        "sale_count" => opt_int(row.sale_count),
        "investor_count" => opt_int(row.investor_count),
        other => opt_float(*float_field(row, other).expect("known column")),
    }
}

fn float_field<'r>(row: &'r ReportRow, column: &str) -> Option<&'r Option<f64>> {
    Some(match column {
        "mean" => &row.mean,
        "second_moment" => &row.second_moment,
        "volatility" => &row.volatility,
        "value_volatility" => &row.value_volatility,
        "volume_volatility" => &row.volume_volatility,
        "value_volume_cov" => &row.value_volume_cov,
        "current_value_volatility" => &row.current_value_volatility,
        "past_value_volatility" => &row.past_value_volatility,
        "current_past_cov" => &row.current_past_cov,
        "original_value_volatility" => &row.original_value_volatility,
        "current_original_cov" => &row.current_original_cov,
        "avg_current_value_volatility" => &row.avg_current_value_volatility,
        "avg_original_value_volatility" => &row.avg_original_value_volatility,
        "cov" => &row.cov,
        "oracle_direct_volatility" => &row.oracle_direct_volatility,
        "oracle_delta_abs" => &row.oracle_delta_abs,
        "oracle_delta_rel" => &row.oracle_delta_rel,
        _ => return None,
    })
}

fn float_field_mut<'r>(row: &'r mut ReportRow, column: &str) -> Option<&'r mut Option<f64>> {
    Some(match column {
        "mean" => &mut row.mean,
        "second_moment" => &mut row.second_moment,
        "volatility" => &mut row.volatility,
        "value_volatility" => &mut row.value_volatility,
        "volume_volatility" => &mut row.volume_volatility,
        "value_volume_cov" => &mut row.value_volume_cov,
        "current_value_volatility" => &mut row.current_value_volatility,
        "past_value_volatility" => &mut row.past_value_volatility,
        "current_past_cov" => &mut row.current_past_cov,
        "original_value_volatility" => &mut row.original_value_volatility,
        "current_original_cov" => &mut row.current_original_cov,
        "avg_current_value_volatility" => &mut row.avg_current_value_volatility,
        "avg_original_value_volatility" => &mut row.avg_original_value_volatility,
        "cov" => &mut row.cov,
        "oracle_direct_volatility" => &mut row.oracle_direct_volatility,
        "oracle_delta_abs" => &mut row.oracle_delta_abs,
        "oracle_delta_rel" => &mut row.oracle_delta_rel,
        _ => return None,
    })
}

pub fn write_report_csv<W: Write>(writer: W, rows: &[ReportRow], oracle: bool) -> Result<()> {
    let cols = report_columns(oracle);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&cols).map_err(|e| csv_err(None, e))?;
    for row in rows {
        w.write_record(cols.iter().map(|c| cell(row, c).csv()))
            .map_err(|e| csv_err(None, e))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: Default::default(),
        source,
    })
}

/// Rows as an array of objects keyed by the same names as the CSV header.
pub fn report_json(rows: &[ReportRow], oracle: bool) -> Value {
    let cols = report_columns(oracle);
    Value::Array(
        rows.iter()
            .map(|row| {
                let obj: Map<String, Value> = cols
                    .iter()
                    .map(|c| (c.to_string(), cell(row, c).json()))
                    .collect();
                Value::Object(obj)
            })
            .collect(),
    )
}

pub fn write_report_json<W: Write>(mut writer: W, rows: &[ReportRow], oracle: bool) -> Result<()> {
    let io = |source| Error::Io {
        path: Default::default(),
        source,
    };
    serde_json::to_writer_pretty(&mut writer, &report_json(rows, oracle))
        .map_err(|e| io(e.into()))?;
    writer.write_all(b"\n").map_err(io)?;
    writer.flush().map_err(io)
}

pub fn write_report<W: Write>(
    writer: W,
    rows: &[ReportRow],
    format: ReportFormat,
    oracle: bool,
) -> Result<()> {
    match format {
        ReportFormat::Csv => write_report_csv(writer, rows, oracle),
        ReportFormat::Json => write_report_json(writer, rows, oracle),
    }
}

pub fn emit(path: &Path, rows: &[ReportRow], format: ReportFormat, oracle: bool) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_report(BufWriter::new(file), rows, format, oracle).map_err(|e| with_path(e, path))
}

/// Parse a CSV report written by [`write_report_csv`].
pub fn parse_report_csv<R: Read>(reader: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(None, e))?
        .iter()
        .map(str::to_string)
        .collect();
    for required in ["window_index", "window_anchor", "family", "status"] {
        if !header.iter().any(|h| h == required) {
            return Err(Error::Parse {
                line: 1,
                column: required.into(),
                reason: "missing column".into(),
            });
        }
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(None, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |name: &str| -> &str {
            header
                .iter()
                .position(|h| h == name)
                .map_or("", |i| &rec[i])
        };
        let bad = |column: &str, reason: String| Error::Parse {
            line,
            column: column.into(),
            reason,
        };
        fn num<T: FromStr>(s: &str) -> std::result::Result<Option<T>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| format!("cannot parse `{s}`"))
            }
        }
        let int = |name: &str| num::<i64>(field(name)).map_err(|r| bad(name, r));
        let count = |name: &str| num::<u64>(field(name)).map_err(|r| bad(name, r));

        let family: Family = field("family")
            .parse()
            .map_err(|e: Error| bad("family", e.to_string()))?;
        let window_index =
            int("window_index")?.ok_or_else(|| bad("window_index", "missing".into()))?;
        let window_anchor =
            int("window_anchor")?.ok_or_else(|| bad("window_anchor", "missing".into()))?;
        let mut row = ReportRow::new(
            usize::try_from(window_index).map_err(|_| bad("window_index", "negative".into()))?,
            window_anchor,
            family,
        );
        row.status = field("status")
            .parse()
            .map_err(|e: Error| bad("status", e.to_string()))?;
        row.investor_id = Some(field("investor_id").to_string()).filter(|s| !s.is_empty());
        row.sale_time = int("sale_time")?;
        row.tick_count = count("tick_count")?;
        row.leg_count = count("leg_count")?;
        row.sale_count = count("sale_count")?;
        row.investor_count = count("investor_count")?;
        for name in &header {
            if let Some(slot) = float_field_mut(&mut row, name) {
                *slot = num::<f64>(field(name)).map_err(|r| bad(name, r))?;
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Plot-ready CSV of an anticipated-volatility horizon sweep.
pub fn write_tau_sweep_csv<W: Write>(writer: W, rows: &[TauSweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "window_index",
        "window_anchor",
        "tau",
        "shift",
        "mean",
        "volatility",
    ])
    .map_err(|e| csv_err(None, e))?;
    for r in rows {
        w.write_record([
            r.window_index.to_string(),
            r.window_anchor.to_string(),
            r.tau.clone(),
            r.shift.clone(),
            fmt_f64(r.mean),
            fmt_f64(r.volatility),
        ])
        .map_err(|e| csv_err(None, e))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: Default::default(),
        source,
    })
}
