//! Hourly demand container and the meter-data cleaning steps: 15-minute
//! aggregation, zero/NA gap filling and the log transform.

use chrono::{Duration, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contiguous hourly observations. Index `i` is the hour `start + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyTimeSeries {
    start: NaiveDateTime,
    values: Vec<f64>,
    log_scale: bool,
    missing: Vec<bool>,
}

impl HourlyTimeSeries {
    /// Builds a fully observed series.
    pub fn new(start: NaiveDateTime, values: Vec<f64>) -> Result<Self> {
        let missing = vec![false; values.len()];
        Self::with_missing(start, values, missing)
    }

    /// Builds a series where `missing[i]` marks an unavailable reading. The
    /// stored value at a missing index is ignored.
    pub fn with_missing(start: NaiveDateTime, values: Vec<f64>, missing: Vec<bool>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("hourly series must have at least one value".into()));
        }
        if missing.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                actual: missing.len(),
            });
        }
        if start.minute() != 0 || start.second() != 0 || start.nanosecond() != 0 {
            return Err(Error::InvalidInput(format!("hourly series start {start} is not on the hour")));
        }
        let values = values
            .into_iter()
            .zip(&missing)
            .map(|(v, &m)| if m { f64::NAN } else { v })
            .collect();
        Ok(Self {
            start,
            values,
            log_scale: false,
            missing,
        })
    }

    pub fn from_options(start: NaiveDateTime, values: &[Option<f64>]) -> Result<Self> {
        let missing = values.iter().map(Option::is_none).collect();
        let vals = values.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        Self::with_missing(start, vals, missing)
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    /// Values; missing readings are `NaN`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_log_scale(&self) -> bool {
        self.log_scale
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    pub fn is_missing(&self, i: usize) -> bool {
        self.missing[i]
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }

    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        self.start + Duration::hours(i as i64)
    }

    pub fn end(&self) -> NaiveDateTime {
        self.timestamp(self.len() - 1)
    }

    /// Sub-range `[from, to)` as a new series starting at `timestamp(from)`.
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        if from >= to || to > self.len() {
            return Err(Error::InvalidInput(format!(
                "slice {from}..{to} out of range for series of length {}",
                self.len()
            )));
        }
        Ok(Self {
            start: self.timestamp(from),
            values: self.values[from..to].to_vec(),
            log_scale: self.log_scale,
            missing: self.missing[from..to].to_vec(),
        })
    }

    fn map_values(&self, log_scale: bool, f: impl Fn(f64) -> f64) -> Self {
        Self {
            start: self.start,
            values: self.values.iter().map(|&v| f(v)).collect(),
            log_scale,
            missing: self.missing.clone(),
        }
    }
}

/// Readings at a fixed sub-hourly cadence; `None` marks a missing interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SubHourlySeries {
    pub start: NaiveDateTime,
    pub interval_minutes: u32,
    pub values: Vec<Option<f64>>,
}

/// Sums each hour's four 15-minute intervals. Any missing interval makes the
/// whole hour missing.
pub fn aggregate_to_hourly(raw: &SubHourlySeries) -> Result<HourlyTimeSeries> {
    if raw.interval_minutes != 15 {
        return Err(Error::InvalidInput(format!(
            "expected 15-minute intervals, got {} minutes",
            raw.interval_minutes
        )));
    }
    if raw.start.minute() != 0 || raw.start.second() != 0 {
        return Err(Error::InvalidInput(format!(
            "sub-hourly series start {} is not aligned to the hour",
            raw.start
        )));
    }
    if raw.values.is_empty() || raw.values.len() % 4 != 0 {
        return Err(Error::InvalidInput(format!(
            "interval count {} is not a positive multiple of 4",
            raw.values.len()
        )));
    }
    let hourly: Vec<Option<f64>> = raw
        .values
        .chunks_exact(4)
        .map(|c| c.iter().copied().sum::<Option<f64>>())
        .collect();
    HourlyTimeSeries::from_options(raw.start, &hourly)
}

/// One multi-hour replacement made by [`fill_gaps`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FillSpan {
    pub start: usize,
    pub len: usize,
    pub scale: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleaningReport {
    /// Isolated bad hours replaced by the mean of their neighbors.
    pub single_hour_fills: usize,
    /// Hours replaced inside runs of two or more bad hours.
    pub multi_hour_fills: usize,
    pub fill_spans: Vec<FillSpan>,
    /// How many of the replaced hours were NA rather than zero.
    pub na_fills: usize,
}

impl CleaningReport {
    pub fn total_fills(&self) -> usize {
        self.single_hour_fills + self.multi_hour_fills
    }
}

const HOURS_PER_DAY: usize = 24;

/// Replaces zero and missing readings.
///
/// An isolated bad hour becomes the mean of the hour before and after. A run
/// of two or more bad hours is copied from the same clock hours of the
/// previous day, multiplied by
/// `mean(before, after) / mean(before_ref, after_ref)` where `before`/`after`
/// are the readings bracketing the run and the `_ref` values are the readings
/// 24 hours earlier. Runs of a day or longer have no after-gap reference, so
/// only the leading boundary sets the scale.
pub fn fill_gaps(series: &HourlyTimeSeries) -> Result<(HourlyTimeSeries, CleaningReport)> {
    if series.is_log_scale() {
        return Err(Error::AlreadyLogScale);
    }
    let n = series.len();
    let bad: Vec<bool> = (0..n)
        .map(|i| series.missing[i] || series.values[i] == 0.0)
        .collect();
    let mut out = series.values.clone();
    let mut report = CleaningReport::default();

    let mut i = 0;
    while i < n {
        if !bad[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && bad[i] {
            i += 1;
        }
        let end = i;
        let len = end - start;
        if start == 0 || end == n {
            return Err(Error::BoundaryGap {
                index: if start == 0 { start } else { end - 1 },
            });
        }
        let before = out[start - 1];
        let after = out[end];
        if len == 1 {
            out[start] = 0.5 * (before + after);
            report.single_hour_fills += 1;
        } else {
            if start < HOURS_PER_DAY + 1 {
                return Err(Error::MissingReferenceDay { index: start });
            }
            let before_ref = out[start - 1 - HOURS_PER_DAY];
            let scale = if len < HOURS_PER_DAY {
                let after_ref = out[end - HOURS_PER_DAY];
                0.5 * (before + after) / (0.5 * (before_ref + after_ref))
            } else {
                before / before_ref
            };
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::MissingReferenceDay { index: start });
            }
            for j in start..end {
                out[j] = scale * out[j - HOURS_PER_DAY];
            }
            report.multi_hour_fills += len;
            report.fill_spans.push(FillSpan { start, len, scale });
        }
        report.na_fills += (start..end).filter(|&j| series.missing[j]).count();
    }

    let cleaned = HourlyTimeSeries {
        start: series.start,
        values: out,
        log_scale: false,
        missing: vec![false; n],
    };
    Ok((cleaned, report))
}

/// Natural log of every value.
pub fn log_transform(series: &HourlyTimeSeries) -> Result<HourlyTimeSeries> {
    if series.log_scale {
        return Err(Error::AlreadyLogScale);
    }
    for (i, &v) in series.values.iter().enumerate() {
        if series.missing[i] {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::NonPositive { index: i, value: v });
        }
    }
    Ok(series.map_values(true, f64::ln))
}

/// `exp` of every value. No retransformation bias correction is applied; see
/// [`inverse_log_transform_with_bias`].
pub fn inverse_log_transform(series: &HourlyTimeSeries) -> Result<HourlyTimeSeries> {
    if !series.log_scale {
        return Err(Error::NotLogScale);
    }
    Ok(series.map_values(false, f64::exp))
}

/// `exp(v + sigma2 / 2)`, the lognormal mean correction.
pub fn inverse_log_transform_with_bias(series: &HourlyTimeSeries, sigma2: f64) -> Result<HourlyTimeSeries> {
    if !series.log_scale {
        return Err(Error::NotLogScale);
    }
    let shift = 0.5 * sigma2;
    Ok(series.map_values(false, |v| (v + shift).exp()))
}
