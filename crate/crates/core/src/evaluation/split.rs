use std::ops::Range;

use chrono::{Months, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contiguous training range followed directly by the test range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: Range<usize>,
    pub test: Range<usize>,
    pub label: String,
}

impl SplitSpec {
    pub fn new(train: Range<usize>, test: Range<usize>, label: &str) -> Result<Self> {
        if train.is_empty() || test.is_empty() {
            return Err(Error::InvalidInput("train and test ranges must be non-empty".into()));
        }
        if test.start != train.end {
            return Err(Error::InvalidInput(format!(
                "test range must start where training ends ({} != {})",
                test.start, train.end
            )));
        }
        Ok(Self {
            train,
            test,
            label: label.to_string(),
        })
    }

    /// `train_years` of training from `start` then `test_years` of testing,
    /// measured in calendar years. Labelled like `1y-train/2y-test`.
    pub fn by_years(start: NaiveDateTime, train_years: u32, test_years: u32, available: usize) -> Result<Self> {
        let hours = |years: u32| -> Result<usize> {
            let end = start
                .checked_add_months(Months::new(12 * years))
                .ok_or_else(|| Error::InvalidInput("split end out of range".into()))?;
            Ok((end - start).num_hours() as usize)
        };
        let train_end = hours(train_years)?;
        let test_end = hours(train_years + test_years)?;
        if test_end > available {
            return Err(Error::InvalidInput(format!(
                "{train_years}y/{test_years}y split needs {test_end} hours, data has {available}"
            )));
        }
        Self::new(0..train_end, train_end..test_end, &format!("{train_years}y-train/{test_years}y-test"))
    }

    /// Training fraction of `n` rows, the rest for testing.
    pub fn by_fraction(n: usize, train_fraction: f64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidInput(format!("train fraction must lie in (0, 1), got {train_fraction}")));
        }
        let cut = (n as f64 * train_fraction).round() as usize;
        let pct = (train_fraction * 100.0).round();
        Self::new(0..cut, cut..n, &format!("{pct}%-train/{}%-test", 100.0 - pct))
    }
}
