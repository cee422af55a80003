use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use super::SalesRecord;
use crate::demand::WeekIndex;
use crate::error::{Error, Result};

const HEADER: [&str; 4] = ["cluster_id", "sku_id", "week", "units"];

/// How week labels in a sales file map onto dense week indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "labels", rename_all = "snake_case")]
pub enum WeekCalendar {
    /// Labels are the indices themselves.
    Integer,
    /// ISO weeks `YYYY-Www`; index 0 is the given week.
    Iso { origin_year: i32, origin_week: u32 },
}

impl WeekCalendar {
    pub fn label(&self, index: WeekIndex) -> String {
        match *self {
            WeekCalendar::Integer => index.to_string(),
            WeekCalendar::Iso { origin_year, origin_week } => {
                let monday = iso_monday(origin_year, origin_week)
                    .expect("calendar origin is a valid ISO week")
                    + chrono::Duration::weeks(index as i64);
                let iso = monday.iso_week();
                format!("{:04}-W{:02}", iso.year(), iso.week())
            }
        }
    }

    /// Resolve a label in this calendar's format.
    pub fn index(&self, label: &str) -> Result<WeekIndex> {
        let bad = |why: String| Error::config("target_week", why);
        match (*self, parse_week(label)) {
            (WeekCalendar::Integer, Some(RawWeek::Index(i))) => Ok(i),
            (WeekCalendar::Iso { origin_year, origin_week }, Some(RawWeek::Iso(y, w))) => {
                let origin = iso_monday(origin_year, origin_week).expect("valid origin");
                let monday = iso_monday(y, w).ok_or_else(|| bad(format!("{label:?} is not a valid ISO week")))?;
                let weeks = (monday - origin).num_weeks();
                u32::try_from(weeks).map_err(|_| bad(format!("{label:?} precedes the first week in the data")))
            }
            _ => Err(bad(format!("{label:?} does not match the week format of the input"))),
        }
    }
}

/// Parsed sales file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalesData {
    pub records: Vec<SalesRecord>,
    pub calendar: WeekCalendar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum RawWeek {
    Iso(i32, u32),
    Index(u32),
}

fn iso_monday(year: i32, week: u32) -> Option<NaiveDate> {
    NaiveDate::from_isoywd_opt(year, week, Weekday::Mon)
}

fn parse_week(s: &str) -> Option<RawWeek> {
    if let Some((year, week)) = s.split_once("-W") {
        if year.len() == 4 && week.len() == 2 && year.bytes().chain(week.bytes()).all(|b| b.is_ascii_digit()) {
            let (y, w) = (year.parse().ok()?, week.parse().ok()?);
            return iso_monday(y, w).map(|_| RawWeek::Iso(y, w));
        }
        return None;
    }
    if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
        return s.parse().ok().map(RawWeek::Index);
    }
    None
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

/// Read and validate a sales CSV.
pub fn load_sales(path: impl AsRef<Path>) -> Result<SalesData> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_sales(&text)
}

/// Parse sales CSV text with header `cluster_id,sku_id,week,units`.
pub fn parse_sales(text: &str) -> Result<SalesData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Input(format!("line 1: unreadable header: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Input(format!(
            "line 1: unknown header {:?}; expected {}",
            header.iter().collect::<Vec<_>>().join(","),
            HEADER.join(",")
        )));
    }

    let mut rows: Vec<(u64, String, String, RawWeek, u64)> = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| Error::Input(format!("malformed csv: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != HEADER.len() {
            return Err(Error::Input(format!(
                "line {line}: expected {} fields, found {}",
                HEADER.len(),
                record.len()
            )));
        }
        let field_err = |col: usize, what: &str| {
            Error::Input(format!(
                "line {line}, column {} ({}): {what}, got {:?}",
                col + 1,
                HEADER[col],
                &record[col]
            ))
        };
        for col in 0..2 {
            if !is_token(&record[col]) {
                return Err(field_err(col, "expected a token of [A-Za-z0-9_-]"));
            }
        }
        let week = parse_week(&record[2])
            .ok_or_else(|| field_err(2, "expected an ISO week YYYY-Www or a non-negative integer"))?;
        let units: u64 = record[3]
            .parse()
            .map_err(|_| field_err(3, "expected a non-negative integer"))?;
        rows.push((line, record[0].to_string(), record[1].to_string(), week, units));
    }

    let mut first_seen: HashMap<(&str, &str, RawWeek), u64> = HashMap::new();
    let mut duplicates = Vec::new();
    for (line, cluster, sku, week, _) in &rows {
        if let Some(prev) = first_seen.insert((cluster, sku, *week), *line) {
            duplicates.push(format!("lines {prev} and {line} ({cluster},{sku},{})", &week_text(*week)));
            first_seen.insert((cluster, sku, *week), prev);
        }
    }
    if !duplicates.is_empty() {
        return Err(Error::Input(format!(
            "duplicate (cluster_id, sku_id, week) keys: {}",
            duplicates.join("; ")
        )));
    }

    let calendar = match rows.iter().map(|r| r.3).min() {
        None | Some(RawWeek::Index(_)) => WeekCalendar::Integer,
        Some(RawWeek::Iso(y, w)) => WeekCalendar::Iso { origin_year: y, origin_week: w },
    };
    let origin = match calendar {
        WeekCalendar::Iso { origin_year, origin_week } => iso_monday(origin_year, origin_week),
        WeekCalendar::Integer => None,
    };
    let records = rows
        .into_iter()
        .map(|(line, cluster_id, sku_id, week, units)| {
            let week = match (week, origin) {
                (RawWeek::Index(i), None) => i,
                (RawWeek::Iso(y, w), Some(origin)) => {
                    (iso_monday(y, w).expect("validated") - origin).num_weeks() as WeekIndex
                }
                _ => {
                    return Err(Error::Input(format!(
                        "line {line}: week format differs from earlier rows; use either ISO weeks or integers"
                    )))
                }
            };
            Ok(SalesRecord { cluster_id, sku_id, week, units })
        })
        .collect::<Result<_>>()?;
    Ok(SalesData { records, calendar })
}

fn week_text(w: RawWeek) -> String {
    match w {
        RawWeek::Iso(y, wk) => format!("{y:04}-W{wk:02}"),
        RawWeek::Index(i) => i.to_string(),
    }
}

/// Sales CSV text with LF line endings.
pub fn sales_csv(records: &[SalesRecord], calendar: WeekCalendar) -> String {
    let mut out = String::with_capacity(32 * (records.len() + 1));
    out.push_str(&HEADER.join(","));
    out.push('\n');
    for r in records {
        writeln!(out, "{},{},{},{}", r.cluster_id, r.sku_id, calendar.label(r.week), r.units)
            .expect("writing to a String");
    }
    out
}

/// Write `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io_err = |e| Error::io(path.display().to_string(), e);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
