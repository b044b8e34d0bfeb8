//! CSV ingestion and output for demand, weather and occupancy files.
//!
//! Timestamps are naive local ISO-8601 (`2019-01-01T00:00:00`; a space
//! separator and omitted seconds are accepted). Empty fields are NA.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Duration, NaiveDateTime};

use crate::error::{Error, Result};
use crate::features::{OccupancyTable, WeatherRecord, WeatherTable};
use crate::series::{aggregate_to_hourly, HourlyTimeSeries, SubHourlySeries};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn parse_timestamp(s: &str) -> std::result::Result<NaiveDateTime, String> {
    let s = s.trim();
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t);
        }
    }
    Err(format!("bad timestamp `{s}`"))
}

pub fn format_timestamp(ts: NaiveDateTime) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

/// Parsed rows of a headed CSV, with the column lookup and line numbers kept
/// for error messages.
struct Table {
    origin: String,
    header: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    fn parse(reader: impl Read, origin: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::format(format!("{origin}:1"), e.to_string()))?
            .iter()
            .map(|h| h.to_ascii_lowercase())
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::format(format!("{origin}:{line}"), e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(Self {
            origin: origin.to_string(),
            header,
            rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| {
            Error::format(format!("{}:1", self.origin), format!("missing column `{name}`"))
        })
    }

    fn optional_column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn loc(&self, line: u64) -> String {
        format!("{}:{line}", self.origin)
    }

    fn timestamp(&self, line: u64, row: &[String], col: usize) -> Result<NaiveDateTime> {
        parse_timestamp(&row[col]).map_err(|m| Error::format(self.loc(line), m))
    }

    /// `None` for an empty field.
    fn number(&self, line: u64, row: &[String], col: usize, name: &str) -> Result<Option<f64>> {
        let s = row[col].trim();
        if s.is_empty() || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan") {
            return Ok(None);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::format(self.loc(line), format!("bad {name} value `{s}`")))?;
        if !v.is_finite() {
            return Err(Error::format(self.loc(line), format!("non-finite {name} value `{s}`")));
        }
        Ok(Some(v))
    }

    fn required(&self, line: u64, row: &[String], col: usize, name: &str) -> Result<f64> {
        self.number(line, row, col, name)?
            .ok_or_else(|| Error::format(self.loc(line), format!("empty {name} field")))
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandInput {
    pub series: HourlyTimeSeries,
    /// Cadence detected from the first two rows, in minutes.
    pub cadence_minutes: i64,
}

pub fn read_demand_csv(path: &Path) -> Result<DemandInput> {
    parse_demand_csv(open(path)?, &path.display().to_string())
}

/// Reads `timestamp,kw` at 15-minute or hourly cadence. Rows must be
/// contiguous; 15-minute data is summed to hours.
pub fn parse_demand_csv(reader: impl Read, origin: &str) -> Result<DemandInput> {
    let t = Table::parse(reader, origin)?;
    let (tc, kc) = (t.column("timestamp")?, t.column("kw")?);
    if t.rows.len() < 2 {
        return Err(Error::format(format!("{origin}:2"), "need at least two data rows"));
    }
    let mut stamps = Vec::with_capacity(t.rows.len());
    let mut values = Vec::with_capacity(t.rows.len());
    for (line, row) in &t.rows {
        stamps.push(t.timestamp(*line, row, tc)?);
        values.push(t.number(*line, row, kc, "kw")?);
    }
    let cadence = (stamps[1] - stamps[0]).num_minutes();
    if cadence != 15 && cadence != 60 {
        return Err(Error::format(
            t.loc(t.rows[1].0),
            format!("unsupported cadence of {cadence} minutes; expected 15 or 60"),
        ));
    }
    for (i, w) in stamps.windows(2).enumerate() {
        if (w[1] - w[0]).num_minutes() != cadence {
            let msg = if w[1] == w[0] {
                format!("duplicate timestamp {}", format_timestamp(w[1]))
            } else {
                format!(
                    "timestamp {} breaks the {cadence}-minute cadence after {}",
                    format_timestamp(w[1]),
                    format_timestamp(w[0])
                )
            };
            return Err(Error::format(t.loc(t.rows[i + 1].0), msg));
        }
    }
    let series = if cadence == 60 {
        HourlyTimeSeries::from_options(stamps[0], &values)?
    } else {
        if values.len() % 4 != 0 {
            return Err(Error::format(
                origin,
                format!("{} quarter-hour rows do not make whole hours", values.len()),
            ));
        }
        aggregate_to_hourly(&SubHourlySeries {
            start: stamps[0],
            interval_minutes: 15,
            values,
        })?
    };
    Ok(DemandInput {
        series,
        cadence_minutes: cadence,
    })
}

pub fn read_weather_csv(path: &Path) -> Result<WeatherTable> {
    parse_weather_csv(open(path)?, &path.display().to_string())
}

/// Reads `timestamp,temp_c[,rh_pct]`; an empty humidity field is allowed.
pub fn parse_weather_csv(reader: impl Read, origin: &str) -> Result<WeatherTable> {
    let t = Table::parse(reader, origin)?;
    let (tc, temp) = (t.column("timestamp")?, t.column("temp_c")?);
    let rh = t.optional_column("rh_pct");
    let rows = t
        .rows
        .iter()
        .map(|(line, row)| {
            Ok((
                t.timestamp(*line, row, tc)?,
                WeatherRecord {
                    temp_c: t.required(*line, row, temp, "temp_c")?,
                    rh_pct: match rh {
                        Some(c) => t.number(*line, row, c, "rh_pct")?,
                        None => None,
                    },
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    WeatherTable::from_rows(origin, rows)
}

pub fn read_occupancy_csv(path: &Path) -> Result<OccupancyTable> {
    parse_occupancy_csv(open(path)?, &path.display().to_string())
}

pub fn parse_occupancy_csv(reader: impl Read, origin: &str) -> Result<OccupancyTable> {
    let t = Table::parse(reader, origin)?;
    let (tc, fc) = (t.column("timestamp")?, t.column("fte")?);
    let rows = t
        .rows
        .iter()
        .map(|(line, row)| Ok((t.timestamp(*line, row, tc)?, t.required(*line, row, fc, "fte")?)))
        .collect::<Result<Vec<_>>>()?;
    OccupancyTable::from_rows(origin, rows)
}

/// Future exogenous inputs for forecasting, optionally with observed demand
/// for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct FutureExog {
    pub start: NaiveDateTime,
    pub weather: WeatherTable,
    pub occupancy: OccupancyTable,
    pub actual_kw: Option<Vec<f64>>,
}

impl FutureExog {
    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }
}

pub fn read_future_exog_csv(path: &Path) -> Result<FutureExog> {
    parse_future_exog_csv(open(path)?, &path.display().to_string())
}

/// Reads hourly `timestamp,temp_c,rh_pct,fte[,kw]`.
pub fn parse_future_exog_csv(reader: impl Read, origin: &str) -> Result<FutureExog> {
    let t = Table::parse(reader, origin)?;
    let tc = t.column("timestamp")?;
    let temp = t.column("temp_c")?;
    let fte = t.column("fte")?;
    let rh = t.optional_column("rh_pct");
    let kw = t.optional_column("kw");
    if t.rows.is_empty() {
        return Err(Error::format(format!("{origin}:2"), "no data rows"));
    }
    let mut weather = Vec::new();
    let mut occ = Vec::new();
    let mut actual = Vec::new();
    let mut prev: Option<NaiveDateTime> = None;
    for (line, row) in &t.rows {
        let ts = t.timestamp(*line, row, tc)?;
        if let Some(p) = prev {
            if ts - p != Duration::hours(1) {
                return Err(Error::format(
                    t.loc(*line),
                    format!("timestamp {} does not follow {} by one hour", format_timestamp(ts), format_timestamp(p)),
                ));
            }
        }
        prev = Some(ts);
        weather.push((
            ts,
            WeatherRecord {
                temp_c: t.required(*line, row, temp, "temp_c")?,
                rh_pct: match rh {
                    Some(c) => t.number(*line, row, c, "rh_pct")?,
                    None => None,
                },
            },
        ));
        occ.push((ts, t.required(*line, row, fte, "fte")?));
        if let Some(c) = kw {
            actual.push(t.number(*line, row, c, "kw")?);
        }
    }
    let actual_kw = if kw.is_some() {
        Some(
            actual
                .into_iter()
                .enumerate()
                .map(|(i, v)| {
                    v.ok_or_else(|| Error::format(t.loc(t.rows[i].0), "empty kw field in scoring column"))
                })
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(FutureExog {
        start: weather[0].0,
        weather: WeatherTable::from_rows(origin, weather)?,
        occupancy: OccupancyTable::from_rows(origin, occ)?,
        actual_kw,
    })
}

/// Writes a CSV file through the `csv` writer; rows are already formatted.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let to_io = |e: csv::Error| Error::io(path, std::io::Error::other(e.to_string()));
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(&row).map_err(to_io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Shortest representation that round-trips, so repeated runs write
/// identical bytes.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub fn write_demand_csv(path: &Path, series: &HourlyTimeSeries) -> Result<()> {
    let rows = (0..series.len()).map(|i| {
        let v = if series.is_missing(i) { String::new() } else { fmt_f64(series.values()[i]) };
        vec![format_timestamp(series.timestamp(i)), v]
    });
    write_csv(path, &["timestamp", "kw"], rows)
}

pub fn write_weather_csv(path: &Path, weather: &WeatherTable) -> Result<()> {
    let rows = weather.iter().map(|(ts, w)| {
        vec![format_timestamp(*ts), fmt_f64(w.temp_c), w.rh_pct.map(fmt_f64).unwrap_or_default()]
    });
    write_csv(path, &["timestamp", "temp_c", "rh_pct"], rows)
}

pub fn write_occupancy_csv(path: &Path, occ: &OccupancyTable) -> Result<()> {
    let rows = occ.iter().map(|(ts, f)| vec![format_timestamp(*ts), fmt_f64(*f)]);
    write_csv(path, &["timestamp", "fte"], rows)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
