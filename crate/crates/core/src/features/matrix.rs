use std::collections::BTreeMap;
use std::ops::Range;

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::{
    build_harmonics, compute_eui, year_of, CalendarSpec, DayCategory, HourOfDay, BUILDING_AREA, CLASS_BINARY,
    COSINE_TERM, DAY_CATEGORY, EUI, HUMIDITY, OCCUPANCY, SINE_TERM, TEMPERATURE, TIME_STEP,
};
use crate::error::{Error, Result};
use crate::series::HourlyTimeSeries;

/// Hour-keyed table read from an exogenous input file.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyTable<T> {
    name: String,
    rows: BTreeMap<NaiveDateTime, T>,
}

impl<T: Clone> HourlyTable<T> {
    pub fn from_rows(name: &str, rows: impl IntoIterator<Item = (NaiveDateTime, T)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (ts, v) in rows {
            if map.insert(ts, v).is_some() {
                return Err(Error::DuplicateTimestamp {
                    source_name: name.to_string(),
                    timestamp: ts.to_string(),
                });
            }
        }
        Ok(Self {
            name: name.to_string(),
            rows: map,
        })
    }

    pub fn get(&self, ts: NaiveDateTime) -> Result<&T> {
        self.rows.get(&ts).ok_or_else(|| Error::Coverage {
            source_name: self.name.clone(),
            timestamp: ts.format("%Y-%m-%dT%H:%M:%S").to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NaiveDateTime, &T)> {
        self.rows.iter()
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherRecord {
    pub temp_c: f64,
    pub rh_pct: Option<f64>,
}

pub type WeatherTable = HourlyTable<WeatherRecord>;
pub type OccupancyTable = HourlyTable<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureOptions {
    /// Hour zero of the `time_step` column. Defaults to the first row, so
    /// matrices built for a later span must pass the training origin.
    pub time_origin: Option<NaiveDateTime>,
    pub include_humidity: bool,
    /// Gross floor area (ft^2) by calendar year; empty disables the column.
    pub building_area: BTreeMap<i32, f64>,
    /// Annual energy (kBTU) by calendar year; with `building_area` this
    /// enables the EUI column.
    pub annual_energy_kbtu: BTreeMap<i32, f64>,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        Self {
            time_origin: None,
            include_humidity: true,
            building_area: BTreeMap::new(),
            annual_energy_kbtu: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    /// Logical variable the column belongs to; several dummy columns share
    /// one variable.
    pub variable: String,
    pub values: Vec<f64>,
}

/// Row-aligned regressors, stored by column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    start: NaiveDateTime,
    n_rows: usize,
    columns: Vec<FeatureColumn>,
}

impl FeatureMatrix {
    pub fn new(start: NaiveDateTime, columns: Vec<FeatureColumn>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |c| c.values.len());
        for c in &columns {
            if c.values.len() != n_rows {
                return Err(Error::LengthMismatch {
                    expected: n_rows,
                    actual: c.values.len(),
                });
            }
            if c.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("column {} has non-finite cells", c.name)));
            }
        }
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::InvalidInput(format!("duplicate column {}", c.name)));
            }
        }
        Ok(Self { start, n_rows, columns })
    }

    /// A matrix with rows but no columns (intercept-only models).
    pub fn empty(start: NaiveDateTime, n_rows: usize) -> Self {
        Self {
            start,
            n_rows,
            columns: Vec::new(),
        }
    }

    /// Wraps plain named columns, each its own variable.
    pub fn from_named(start: NaiveDateTime, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        Self::new(
            start,
            columns
                .into_iter()
                .map(|(name, values)| FeatureColumn {
                    variable: name.clone(),
                    name,
                    values,
                })
                .collect(),
        )
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    /// Logical variables in first-appearance order.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.columns {
            if !out.contains(&c.variable) {
                out.push(c.variable.clone());
            }
        }
        out
    }

    pub fn columns_of(&self, variable: &str) -> Vec<&FeatureColumn> {
        self.columns.iter().filter(|c| c.variable == variable).collect()
    }

    /// Keeps every column whose variable is listed, in matrix order.
    pub fn select_variables(&self, variables: &[String]) -> Result<Self> {
        for v in variables {
            if !self.columns.iter().any(|c| &c.variable == v) {
                return Err(Error::MissingColumn(v.clone()));
            }
        }
        Ok(Self {
            start: self.start,
            n_rows: self.n_rows,
            columns: self
                .columns
                .iter()
                .filter(|c| variables.contains(&c.variable))
                .cloned()
                .collect(),
        })
    }

    /// Keeps exactly the named columns, in the order given.
    pub fn select_columns(&self, names: &[String]) -> Result<Self> {
        let columns = names
            .iter()
            .map(|n| {
                self.columns
                    .iter()
                    .find(|c| &c.name == n)
                    .cloned()
                    .ok_or_else(|| Error::MissingColumn(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            start: self.start,
            n_rows: self.n_rows,
            columns,
        })
    }

    pub fn slice_rows(&self, rows: Range<usize>) -> Result<Self> {
        if rows.start > rows.end || rows.end > self.n_rows {
            return Err(Error::InvalidInput(format!(
                "row range {rows:?} out of bounds for {} rows",
                self.n_rows
            )));
        }
        Ok(Self {
            start: self.start + Duration::hours(rows.start as i64),
            n_rows: rows.len(),
            columns: self
                .columns
                .iter()
                .map(|c| FeatureColumn {
                    name: c.name.clone(),
                    variable: c.variable.clone(),
                    values: c.values[rows.clone()].to_vec(),
                })
                .collect(),
        })
    }

    /// Drops columns that are constant over the rows; such columns are
    /// collinear with the intercept.
    pub fn without_constant_columns(&self) -> Self {
        Self {
            start: self.start,
            n_rows: self.n_rows,
            columns: self
                .columns
                .iter()
                .filter(|c| c.values.iter().any(|&v| v != c.values[0]))
                .cloned()
                .collect(),
        }
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }
}

/// Builds the regressor matrix aligned with `demand`.
pub fn assemble_feature_matrix(
    demand: &HourlyTimeSeries,
    weather: &WeatherTable,
    occupancy: &OccupancyTable,
    cal: &CalendarSpec,
    options: &FeatureOptions,
) -> Result<FeatureMatrix> {
    assemble_for_span(demand.start(), demand.len(), weather, occupancy, cal, options)
}

/// Builds the regressor matrix for `hours` rows starting at `start`.
///
/// Day category is one-hot encoded with `sem_weekday` as the dropped
/// reference level, giving five dummy columns.
pub fn assemble_for_span(
    start: NaiveDateTime,
    hours: usize,
    weather: &WeatherTable,
    occupancy: &OccupancyTable,
    cal: &CalendarSpec,
    options: &FeatureOptions,
) -> Result<FeatureMatrix> {
    let origin = options.time_origin.unwrap_or(start);
    let offset = (start - origin).num_hours() as f64;
    let mut time_step = Vec::with_capacity(hours);
    let mut occ = Vec::with_capacity(hours);
    let mut temp = Vec::with_capacity(hours);
    let mut rh = Vec::with_capacity(hours);
    let mut dummies = vec![Vec::with_capacity(hours); DayCategory::ALL.len() - 1];
    let mut class = Vec::with_capacity(hours);
    let mut cosine = Vec::with_capacity(hours);
    let mut sine = Vec::with_capacity(hours);
    let mut area = Vec::new();
    let mut eui = Vec::new();
    let with_area = !options.building_area.is_empty();
    let with_eui = with_area && !options.annual_energy_kbtu.is_empty();

    let mut day_cache: Option<(chrono::NaiveDate, DayCategory, u8)> = None;
    for i in 0..hours {
        let ts = start + Duration::hours(i as i64);
        time_step.push(offset + i as f64);
        occ.push(*occupancy.get(ts)?);
        let w = weather.get(ts)?;
        temp.push(w.temp_c);
        if options.include_humidity {
            rh.push(w.rh_pct.ok_or_else(|| Error::Coverage {
                source_name: format!("{} (rh_pct)", weather.name()),
                timestamp: ts.format("%Y-%m-%dT%H:%M:%S").to_string(),
            })?);
        }
        let date = ts.date();
        let (cat, cls) = match day_cache {
            Some((d, c, b)) if d == date => (c, b),
            _ => {
                let c = cal.day_category(date)?;
                let b = cal.class_binary(date)?;
                day_cache = Some((date, c, b));
                (c, b)
            }
        };
        for (k, level) in DayCategory::ALL[1..].iter().enumerate() {
            dummies[k].push(if *level == cat { 1.0 } else { 0.0 });
        }
        class.push(f64::from(cls));
        let (c, s) = build_harmonics(HourOfDay::of(ts));
        cosine.push(c);
        sine.push(s);
        if with_area {
            let year = year_of(ts);
            let a = *options.building_area.get(&year).ok_or_else(|| Error::Coverage {
                source_name: "building_area".into(),
                timestamp: year.to_string(),
            })?;
            area.push(a);
            if with_eui {
                let energy = *options.annual_energy_kbtu.get(&year).ok_or_else(|| Error::Coverage {
                    source_name: "annual_energy_kbtu".into(),
                    timestamp: year.to_string(),
                })?;
                eui.push(compute_eui(energy, a)?);
            }
        }
    }

    let plain = |name: &str, values: Vec<f64>| FeatureColumn {
        name: name.to_string(),
        variable: name.to_string(),
        values,
    };
    let mut columns = vec![plain(TIME_STEP, time_step), plain(OCCUPANCY, occ), plain(TEMPERATURE, temp)];
    if options.include_humidity {
        columns.push(plain(HUMIDITY, rh));
    }
    for (level, values) in DayCategory::ALL[1..].iter().zip(dummies) {
        columns.push(FeatureColumn {
            name: format!("{DAY_CATEGORY}[{}]", level.name()),
            variable: DAY_CATEGORY.to_string(),
            values,
        });
    }
    columns.push(plain(CLASS_BINARY, class));
    columns.push(plain(COSINE_TERM, cosine));
    columns.push(plain(SINE_TERM, sine));
    if with_area {
        columns.push(plain(BUILDING_AREA, area));
    }
    if with_eui {
        columns.push(plain(EUI, eui));
    }
    FeatureMatrix::new(start, columns)
}
