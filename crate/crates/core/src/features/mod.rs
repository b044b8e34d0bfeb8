//! Exogenous regressors: time step, occupancy, weather, day category, class
//! binary, daily harmonics and the optional building-area/EUI columns.

mod calendar;
mod matrix;

pub use calendar::{is_weekend, CalendarSpec, DateRange, DayCategory};
pub use matrix::{
    assemble_feature_matrix, assemble_for_span, FeatureColumn, FeatureMatrix, FeatureOptions, HourlyTable,
    OccupancyTable, WeatherRecord, WeatherTable,
};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TIME_STEP: &str = "time_step";
pub const OCCUPANCY: &str = "occupancy";
pub const TEMPERATURE: &str = "temperature";
pub const HUMIDITY: &str = "humidity";
pub const DAY_CATEGORY: &str = "day_category";
pub const CLASS_BINARY: &str = "class_binary";
pub const COSINE_TERM: &str = "cosine_term";
pub const SINE_TERM: &str = "sine_term";
pub const BUILDING_AREA: &str = "building_area";
pub const EUI: &str = "eui";

/// Hour of the day, 0..=23.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct HourOfDay(u8);

impl HourOfDay {
    pub fn new(hour: u32) -> Result<Self> {
        if hour < 24 {
            Ok(Self(hour as u8))
        } else {
            Err(Error::InvalidInput(format!("hour of day {hour} out of range")))
        }
    }

    pub fn of(ts: NaiveDateTime) -> Self {
        Self(ts.hour() as u8)
    }

    pub fn get(self) -> u32 {
        u32::from(self.0)
    }
}

/// `(cos(2 pi h / 24), sin(2 pi h / 24))`.
pub fn build_harmonics(hour: HourOfDay) -> (f64, f64) {
    let angle = 2.0 * PI * f64::from(hour.0) / 24.0;
    (angle.cos(), angle.sin())
}

pub fn derive_day_category(date: NaiveDate, cal: &CalendarSpec) -> Result<DayCategory> {
    cal.day_category(date)
}

pub fn class_binary(date: NaiveDate, cal: &CalendarSpec) -> Result<u8> {
    cal.class_binary(date)
}

/// Annual energy (kBTU) per gross floor area (ft^2).
pub fn compute_eui(annual_energy_kbtu: f64, gross_area_ft2: f64) -> Result<f64> {
    if !(gross_area_ft2 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gross floor area must be positive, got {gross_area_ft2}"
        )));
    }
    Ok(annual_energy_kbtu / gross_area_ft2)
}

/// kBTU per MWh.
pub const KBTU_PER_MWH: f64 = 3412.14;

/// Within-day weighting of the annual FTE headcount.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyShape {
    /// First and last clock hour of instruction.
    pub class_start_hour: u32,
    pub class_end_hour: u32,
    /// Fraction present on non-class days during working hours (staff only).
    pub staff_fraction: f64,
    /// Fraction present at night and on weekends (on-campus residents).
    pub residential_fraction: f64,
}

impl Default for OccupancyShape {
    fn default() -> Self {
        Self {
            class_start_hour: 8,
            class_end_hour: 17,
            staff_fraction: 0.35,
            residential_fraction: 0.2,
        }
    }
}

impl OccupancyShape {
    /// Weight in `[residential_fraction, 1]` for a given hour and day type.
    pub fn weight(&self, hour: u32, class_day: bool, weekend: bool) -> f64 {
        let peak = if weekend {
            return self.residential_fraction;
        } else if class_day {
            1.0
        } else {
            self.staff_fraction.max(self.residential_fraction)
        };
        let (a, b) = (self.class_start_hour as f64 - 1.0, self.class_end_hour as f64 + 1.0);
        let h = hour as f64;
        if h <= a || h >= b {
            return self.residential_fraction;
        }
        // raised-cosine bump over the working window
        let bump = 0.5 - 0.5 * (2.0 * PI * (h - a) / (b - a)).cos();
        self.residential_fraction + (peak - self.residential_fraction) * bump
    }
}

/// Hourly occupancy from annual FTE audits: the headcount is interpolated
/// linearly between January 1 of consecutive audit years and weighted by
/// `shape`. 1.0 counts a full-time person and 0.5 a half-time one; the FTE
/// figures are expected to already carry those weights.
pub fn occupancy_profile(
    start: NaiveDateTime,
    hours: usize,
    fte_by_year: &BTreeMap<i32, f64>,
    cal: &CalendarSpec,
    shape: &OccupancyShape,
) -> Result<Vec<f64>> {
    if fte_by_year.is_empty() {
        return Err(Error::InvalidInput("no annual FTE levels given".into()));
    }
    let anchors: Vec<(f64, f64)> = fte_by_year
        .iter()
        .map(|(&y, &f)| {
            let t = NaiveDate::from_ymd_opt(y, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
            ((t - start).num_hours() as f64, f)
        })
        .collect();
    let level = |t: f64| -> f64 {
        if t <= anchors[0].0 {
            return anchors[0].1;
        }
        for w in anchors.windows(2) {
            if t <= w[1].0 {
                let frac = (t - w[0].0) / (w[1].0 - w[0].0);
                return w[0].1 + frac * (w[1].1 - w[0].1);
            }
        }
        anchors[anchors.len() - 1].1
    };
    (0..hours)
        .map(|i| {
            let ts = start + Duration::hours(i as i64);
            let date = ts.date();
            let class = cal.class_binary(date)? == 1;
            Ok(level(i as f64) * shape.weight(ts.hour(), class, is_weekend(date)))
        })
        .collect()
}

pub(crate) fn year_of(ts: NaiveDateTime) -> i32 {
    ts.year()
}
