//! Synthetic campus demand with known structure, used as ground truth for
//! end-to-end checks.
//!
//! Log demand is a sum of deterministic components plus a simulated SARMA
//! residual, so the log → exogenous model → residual SARIMA pipeline is
//! exactly well specified for it:
//!
//! ```text
//! ln kW = ln(base) + ln(1+g)·t/8760
//!       + a_d cos(2π(h - h_peak)/24) + a_w cos(2π t/168) + a_y cos(2π(doy - 200)/365.25)
//!       + w·weekend + (s/base)·max(T - T_bal, 0) + (c/base)·occupancy + r_t
//! ```
//!
//! The cooling slope `s` (kW/°C) and occupancy coefficient `c` (kW/person)
//! enter as fractions of the base load.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    assemble_for_span, is_weekend, occupancy_profile, CalendarSpec, DateRange, FeatureMatrix, FeatureOptions,
    OccupancyShape, OccupancyTable, WeatherRecord, WeatherTable,
};
use crate::io::{
    fmt_f64, format_timestamp, write_csv, write_demand_csv, write_occupancy_csv, write_text, write_weather_csv,
};
use crate::kv::KvFile;
use crate::sarima::{simulate_sarima, theoretical_acf, SarimaOrder, SarimaParams};
use crate::series::HourlyTimeSeries;

const HOURS_PER_YEAR: f64 = 8760.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub start: NaiveDateTime,
    pub years: u32,
    pub base_load_kw: f64,
    pub annual_growth_pct: f64,
    /// Log-scale harmonic amplitudes.
    pub daily_amplitude: f64,
    pub daily_peak_hour: f64,
    pub weekly_amplitude: f64,
    pub annual_amplitude: f64,
    /// Log-scale shift on Saturdays and Sundays.
    pub weekend_effect: f64,
    pub balance_temp_c: f64,
    pub cooling_slope_kw_per_c: f64,
    pub occupancy_coefficient_kw: f64,
    /// Full-time-equivalent headcount.
    pub population: f64,
    pub temp_mean_c: f64,
    pub temp_annual_amplitude_c: f64,
    pub temp_daily_amplitude_c: f64,
    /// Standard deviation of the AR(1) weather noise.
    pub temp_noise_c: f64,
    pub residual_order: SarimaOrder,
    pub residual_params: SarimaParams,
    /// Innovation standard deviation of the log-scale residual.
    pub residual_sigma: f64,
    /// Trailing years also written as a future-exogenous file with actuals.
    pub holdout_years: u32,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    /// Three years from 2023 with a SARMA(1,0,1)(1,0,0)24 residual whose
    /// marginal standard deviation is about 0.084 on the log scale. The
    /// strong seasonal AR keeps the residual predictable for a few weeks;
    /// growth is kept small because one training year cannot resolve it.
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2023, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            years: 3,
            base_load_kw: 4000.0,
            annual_growth_pct: 1.0,
            daily_amplitude: 0.12,
            daily_peak_hour: 14.0,
            weekly_amplitude: 0.0,
            annual_amplitude: 0.0,
            weekend_effect: -0.08,
            balance_temp_c: 18.0,
            cooling_slope_kw_per_c: 60.0,
            occupancy_coefficient_kw: 0.1,
            population: 5000.0,
            temp_mean_c: 12.0,
            temp_annual_amplitude_c: 12.0,
            temp_daily_amplitude_c: 6.0,
            temp_noise_c: 2.0,
            residual_order: SarimaOrder::new(1, 0, 1, 1, 0, 0, 24).unwrap(),
            residual_params: SarimaParams {
                phi: vec![0.5],
                theta: vec![-0.2],
                seasonal_phi: vec![0.9],
                seasonal_theta: vec![],
            },
            residual_sigma: 0.0344,
            holdout_years: 0,
            seed: 42,
        }
    }
}

impl ScenarioSpec {
    pub fn hours(&self) -> Result<usize> {
        let end = self
            .start
            .checked_add_months(chrono::Months::new(12 * self.years))
            .ok_or_else(|| Error::InvalidInput("scenario end out of range".into()))?;
        Ok((end - self.start).num_hours() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.years == 0 {
            return Err(Error::InvalidInput("scenario needs at least one year".into()));
        }
        if !(self.base_load_kw > 0.0) {
            return Err(Error::InvalidInput(format!("base load must be positive, got {}", self.base_load_kw)));
        }
        if self.holdout_years >= self.years {
            return Err(Error::InvalidInput("holdout must leave at least one training year".into()));
        }
        if !(self.residual_sigma >= 0.0) || !(self.temp_noise_c >= 0.0) || !(self.population >= 0.0) {
            return Err(Error::InvalidInput("standard deviations and population must be non-negative".into()));
        }
        if self.start.minute() != 0 || self.start.second() != 0 {
            return Err(Error::InvalidInput("scenario start must be on the hour".into()));
        }
        self.residual_order.validate()?;
        self.residual_params.check(&self.residual_order)?;
        if self.residual_order.n_diff() > 0 {
            return Err(Error::NonStationary("the residual process must not be differenced".into()));
        }
        Ok(())
    }

    /// Marginal standard deviation of the residual process.
    pub fn residual_sd(&self) -> Result<f64> {
        let (_, var) = theoretical_acf(&self.residual_order, &self.residual_params, 0)?;
        Ok(self.residual_sigma * var.sqrt())
    }

    /// Reads `key = value` lines; unspecified keys keep their defaults.
    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let mut s = Self::default();
        macro_rules! set {
            ($($key:literal => $field:ident),* $(,)?) => {
                $(if let Some(v) = kv.get_parsed(None, $key)? { s.$field = v; })*
            };
        }
        set!(
            "years" => years,
            "base_load_kw" => base_load_kw,
            "annual_growth_pct" => annual_growth_pct,
            "daily_amplitude" => daily_amplitude,
            "daily_peak_hour" => daily_peak_hour,
            "weekly_amplitude" => weekly_amplitude,
            "annual_amplitude" => annual_amplitude,
            "weekend_effect" => weekend_effect,
            "balance_temp_c" => balance_temp_c,
            "cooling_slope_kw_per_c" => cooling_slope_kw_per_c,
            "occupancy_coefficient_kw" => occupancy_coefficient_kw,
            "population" => population,
            "temp_mean_c" => temp_mean_c,
            "temp_annual_amplitude_c" => temp_annual_amplitude_c,
            "temp_daily_amplitude_c" => temp_daily_amplitude_c,
            "temp_noise_c" => temp_noise_c,
            "residual_order" => residual_order,
            "residual_sigma" => residual_sigma,
            "holdout_years" => holdout_years,
            "seed" => seed,
        );
        if let Some(e) = kv.get(None, "start") {
            let d: NaiveDate = kv.parse_value(e)?;
            s.start = d.and_hms_opt(0, 0, 0).unwrap();
        }
        let list = |key: &str, default: &[f64]| -> Result<Vec<f64>> {
            Ok(kv.get_list(None, key)?.unwrap_or_else(|| default.to_vec()))
        };
        // coefficients default to zero whenever the order is overridden
        let order_given = kv.get(None, "residual_order").is_some();
        let base = if order_given { SarimaParams::zeros(&s.residual_order) } else { s.residual_params.clone() };
        s.residual_params = SarimaParams {
            phi: list("residual_phi", &base.phi)?,
            theta: list("residual_theta", &base.theta)?,
            seasonal_phi: list("residual_seasonal_phi", &base.seasonal_phi)?,
            seasonal_theta: list("residual_seasonal_theta", &base.seasonal_theta)?,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_kv(&KvFile::read(path)?)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let p = &self.residual_params;
        format!(
            "# synthetic campus scenario\n\
             start = {}\nyears = {}\nbase_load_kw = {}\nannual_growth_pct = {}\n\
             daily_amplitude = {}\ndaily_peak_hour = {}\nweekly_amplitude = {}\nannual_amplitude = {}\n\
             weekend_effect = {}\nbalance_temp_c = {}\ncooling_slope_kw_per_c = {}\n\
             occupancy_coefficient_kw = {}\npopulation = {}\n\
             temp_mean_c = {}\ntemp_annual_amplitude_c = {}\ntemp_daily_amplitude_c = {}\ntemp_noise_c = {}\n\
             residual_order = {}\nresidual_phi = {}\nresidual_theta = {}\nresidual_seasonal_phi = {}\n\
             residual_seasonal_theta = {}\nresidual_sigma = {}\nholdout_years = {}\nseed = {}\n",
            self.start.date(),
            self.years,
            self.base_load_kw,
            self.annual_growth_pct,
            self.daily_amplitude,
            self.daily_peak_hour,
            self.weekly_amplitude,
            self.annual_amplitude,
            self.weekend_effect,
            self.balance_temp_c,
            self.cooling_slope_kw_per_c,
            self.occupancy_coefficient_kw,
            self.population,
            self.temp_mean_c,
            self.temp_annual_amplitude_c,
            self.temp_daily_amplitude_c,
            self.temp_noise_c,
            self.residual_order,
            join(&p.phi),
            join(&p.theta),
            join(&p.seasonal_phi),
            join(&p.seasonal_theta),
            self.residual_sigma,
            self.holdout_years,
            self.seed,
        )
    }
}

/// True per-hour components, all on the log scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTruth {
    /// Deterministic part of log demand.
    pub structure_log: Vec<f64>,
    pub temperature_response_log: Vec<f64>,
    pub residual_log: Vec<f64>,
    /// Marginal standard deviation of the residual process.
    pub residual_sd: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticBundle {
    pub spec: ScenarioSpec,
    pub demand: HourlyTimeSeries,
    pub weather: WeatherTable,
    pub occupancy: OccupancyTable,
    pub calendar: CalendarSpec,
    pub features: FeatureMatrix,
    pub truth: ScenarioTruth,
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// Two semesters a year with winter, spring and Thanksgiving breaks.
pub fn synthetic_calendar(first_year: i32, last_year: i32) -> Result<CalendarSpec> {
    let mut semesters = Vec::new();
    let mut holidays = Vec::new();
    for y in first_year..=last_year {
        semesters.push(DateRange::new(date(y, 1, 15), date(y, 5, 10))?);
        semesters.push(DateRange::new(date(y, 8, 20), date(y, 12, 12))?);
        holidays.push(DateRange::new(date(y, 1, 1), date(y, 1, 2))?);
        holidays.push(DateRange::new(date(y, 3, 16), date(y, 3, 22))?);
        holidays.push(DateRange::new(date(y, 7, 4), date(y, 7, 4))?);
        holidays.push(DateRange::new(date(y, 11, 23), date(y, 11, 26))?);
        holidays.push(DateRange::new(date(y, 12, 24), date(y, 12, 31))?);
    }
    let coverage = DateRange::new(date(first_year, 1, 1), date(last_year, 12, 31))?;
    CalendarSpec::new(semesters, holidays, BTreeMap::new(), Some(coverage))
}

pub fn generate(spec: &ScenarioSpec) -> Result<SyntheticBundle> {
    spec.validate()?;
    let n = spec.hours()?;
    let start = spec.start;
    let last = start + Duration::hours(n as i64 - 1);
    let calendar = synthetic_calendar(start.year(), last.year())?;

    // weather: seasonal and daily cycles plus AR(1) noise
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Normal::new(0.0, 1.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let innov = (1.0f64 - 0.9 * 0.9).sqrt();
    let (mut temp_noise, mut rh_noise) = (0.0, 0.0);
    let mut weather_rows = Vec::with_capacity(n);
    let mut temps = Vec::with_capacity(n);
    for i in 0..n {
        let ts = start + Duration::hours(i as i64);
        temp_noise = 0.9 * temp_noise + innov * unit.sample(&mut rng);
        rh_noise = 0.95 * rh_noise + (1.0f64 - 0.95 * 0.95).sqrt() * unit.sample(&mut rng);
        let doy = ts.ordinal0() as f64;
        let hour = ts.hour() as f64;
        let t = spec.temp_mean_c
            + spec.temp_annual_amplitude_c * (2.0 * PI * (doy - 200.0) / 365.25).cos()
            + spec.temp_daily_amplitude_c * (2.0 * PI * (hour - 15.0) / 24.0).cos()
            + spec.temp_noise_c * temp_noise;
        let rh = (60.0 + 15.0 * rh_noise).clamp(5.0, 100.0);
        temps.push(t);
        weather_rows.push((
            ts,
            WeatherRecord {
                temp_c: t,
                rh_pct: Some(rh),
            },
        ));
    }
    let weather = WeatherTable::from_rows("synthetic weather", weather_rows)?;

    let fte: BTreeMap<i32, f64> = (start.year()..=last.year() + 1).map(|y| (y, spec.population)).collect();
    let occ_values = occupancy_profile(start, n, &fte, &calendar, &OccupancyShape::default())?;
    let occupancy = OccupancyTable::from_rows(
        "synthetic occupancy",
        occ_values.iter().enumerate().map(|(i, &v)| (start + Duration::hours(i as i64), v)),
    )?;

    let residual = simulate_sarima(
        &spec.residual_order,
        &spec.residual_params,
        n,
        spec.seed.wrapping_add(1),
        spec.residual_sigma,
    )?;

    let growth = (1.0 + spec.annual_growth_pct / 100.0).ln();
    let ln_base = spec.base_load_kw.ln();
    let mut structure = Vec::with_capacity(n);
    let mut temp_response = Vec::with_capacity(n);
    for i in 0..n {
        let ts = start + Duration::hours(i as i64);
        let t = i as f64;
        let hour = ts.hour() as f64;
        let doy = ts.ordinal0() as f64;
        let cooling = spec.cooling_slope_kw_per_c / spec.base_load_kw * (temps[i] - spec.balance_temp_c).max(0.0);
        let s = ln_base
            + growth * t / HOURS_PER_YEAR
            + spec.daily_amplitude * (2.0 * PI * (hour - spec.daily_peak_hour) / 24.0).cos()
            + spec.weekly_amplitude * (2.0 * PI * t / 168.0).cos()
            + spec.annual_amplitude * (2.0 * PI * (doy - 200.0) / 365.25).cos()
            + if is_weekend(ts.date()) { spec.weekend_effect } else { 0.0 }
            + cooling
            + spec.occupancy_coefficient_kw / spec.base_load_kw * occ_values[i];
        structure.push(s);
        temp_response.push(cooling);
    }
    let kw: Vec<f64> = structure.iter().zip(&residual).map(|(s, r)| (s + r).exp()).collect();
    if kw.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidInput("scenario produces non-finite demand".into()));
    }
    let demand = HourlyTimeSeries::new(start, kw)?;
    let features = assemble_for_span(start, n, &weather, &occupancy, &calendar, &FeatureOptions::default())?;
    Ok(SyntheticBundle {
        spec: spec.clone(),
        demand,
        weather,
        occupancy,
        calendar,
        features,
        truth: ScenarioTruth {
            structure_log: structure,
            temperature_response_log: temp_response,
            residual_log: residual,
            residual_sd: spec.residual_sd()?,
        },
    })
}

/// File names written by [`write_bundle`].
pub mod files {
    pub const DEMAND: &str = "demand.csv";
    pub const WEATHER: &str = "weather.csv";
    pub const OCCUPANCY: &str = "occupancy.csv";
    pub const CALENDAR: &str = "calendar.txt";
    pub const TRUTH: &str = "truth.csv";
    pub const SCENARIO: &str = "scenario.txt";
    pub const FUTURE: &str = "future_exog.csv";
}

impl SyntheticBundle {
    /// Hours in the training part (everything before the holdout years).
    pub fn training_hours(&self) -> Result<usize> {
        let s = ScenarioSpec {
            years: self.spec.years - self.spec.holdout_years,
            ..self.spec.clone()
        };
        s.hours()
    }
}

/// Writes the input files the ingest path reads, the truth record, the
/// scenario itself and, with holdout years, a future-exogenous file with the
/// actual demand for scoring. The demand file stops before the holdout.
pub fn write_bundle(bundle: &SyntheticBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let train = bundle.training_hours()?;
    let n = bundle.demand.len();
    let demand = if train < n { bundle.demand.slice(0, train)? } else { bundle.demand.clone() };
    write_demand_csv(&dir.join(files::DEMAND), &demand)?;
    write_weather_csv(&dir.join(files::WEATHER), &bundle.weather)?;
    write_occupancy_csv(&dir.join(files::OCCUPANCY), &bundle.occupancy)?;
    write_text(&dir.join(files::CALENDAR), &bundle.calendar.to_text())?;
    write_text(&dir.join(files::SCENARIO), &bundle.spec.to_text())?;
    let t = &bundle.truth;
    write_csv(
        &dir.join(files::TRUTH),
        &["timestamp", "structure_log", "temperature_response_log", "residual_log", "kw"],
        (0..n).map(|i| {
            vec![
                format_timestamp(bundle.demand.timestamp(i)),
                fmt_f64(t.structure_log[i]),
                fmt_f64(t.temperature_response_log[i]),
                fmt_f64(t.residual_log[i]),
                fmt_f64(bundle.demand.values()[i]),
            ]
        }),
    )?;
    if train < n {
        let rows = (train..n).map(|i| {
            let ts = bundle.demand.timestamp(i);
            let w = bundle.weather.get(ts).expect("weather covers the scenario");
            let occ = bundle.occupancy.get(ts).expect("occupancy covers the scenario");
            vec![
                format_timestamp(ts),
                fmt_f64(w.temp_c),
                w.rh_pct.map_or(String::new(), fmt_f64),
                fmt_f64(*occ),
                fmt_f64(bundle.demand.values()[i]),
            ]
        });
        write_csv(&dir.join(files::FUTURE), &["timestamp", "temp_c", "rh_pct", "fte", "kw"], rows)?;
    }
    Ok(())
}
