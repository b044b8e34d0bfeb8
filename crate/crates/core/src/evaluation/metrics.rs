use chrono::{Months, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::HourlyTimeSeries;
use crate::stats::{adjusted_r2, mean};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Adjusted R². The framework reports the training fit on the log scale;
    /// [`metrics`] alone scores the supplied pair.
    pub adj_r2: f64,
    pub rmse_kw: f64,
    pub nrmse_pct: f64,
    pub peak_pct: f64,
    /// Clock hour (0–23) of the forecast maximum.
    pub peak_hour: u32,
    /// `None` when the test span holds no whole year.
    pub energy_pct: Option<f64>,
    /// RMSE over hours whose actual load exceeds the threshold.
    pub rmse_over_threshold: Option<f64>,
    /// Regressor count `E` used for the adjustment.
    pub n_regressors: f64,
}

/// Hour of day of the first occurrence of the maximum.
pub fn peak_time_of_day(series: &HourlyTimeSeries) -> u32 {
    let v = series.values();
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        // strict comparison keeps the earliest maximum
        if x > v[best] {
            best = i;
        }
    }
    series.timestamp(best).hour()
}

/// Hours in the longest prefix of whole years, counting a year from the
/// start timestamp to its anniversary.
pub fn whole_year_hours(start: NaiveDateTime, len: usize) -> usize {
    let mut years = 0u32;
    let mut hours = 0;
    loop {
        let Some(next) = start.checked_add_months(Months::new(12 * (years + 1))) else { break };
        let h = (next - start).num_hours() as usize;
        if h > len {
            break;
        }
        years += 1;
        hours = h;
    }
    hours
}

fn check_pair(actual: &HourlyTimeSeries, forecast: &HourlyTimeSeries) -> Result<()> {
    if actual.len() != forecast.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            actual: forecast.len(),
        });
    }
    if actual.start() != forecast.start() {
        return Err(Error::InvalidInput(format!(
            "actual starts at {} but forecast at {}",
            actual.start(),
            forecast.start()
        )));
    }
    if actual.has_missing() || forecast.has_missing() {
        return Err(Error::InvalidInput("metrics need fully observed series".into()));
    }
    Ok(())
}

/// Adjusted R² of `fitted` against `actual` with `e` regressors.
pub fn fit_adj_r2(actual: &[f64], fitted: &[f64], e: f64) -> Result<f64> {
    if actual.len() != fitted.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            actual: fitted.len(),
        });
    }
    let m = mean(actual);
    let tss: f64 = actual.iter().map(|a| (a - m).powi(2)).sum();
    let rss: f64 = actual.iter().zip(fitted).map(|(a, f)| (a - f).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    Ok(adjusted_r2(r2, actual.len(), e))
}

/// Scores a kW-scale forecast against the actual load.
pub fn metrics(
    actual: &HourlyTimeSeries,
    forecast: &HourlyTimeSeries,
    n_regressors: f64,
    threshold_kw: Option<f64>,
) -> Result<EvaluationReport> {
    check_pair(actual, forecast)?;
    let (a, f) = (actual.values(), forecast.values());
    let mean_actual = mean(a);
    if !(mean_actual > 0.0) {
        return Err(Error::InvalidInput(format!("mean actual load must be positive, got {mean_actual}")));
    }
    let n = a.len() as f64;
    let rmse = (a.iter().zip(f).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n).sqrt();
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let peak_pct = 100.0 * max(f) / max(a);
    let years = whole_year_hours(actual.start(), a.len());
    let energy_pct = (years > 0).then(|| 100.0 * f[..years].iter().sum::<f64>() / a[..years].iter().sum::<f64>());
    let rmse_over_threshold = threshold_kw.and_then(|th| {
        let sq: Vec<f64> = a.iter().zip(f).filter(|(x, _)| **x > th).map(|(x, y)| (x - y).powi(2)).collect();
        (!sq.is_empty()).then(|| (sq.iter().sum::<f64>() / sq.len() as f64).sqrt())
    });
    Ok(EvaluationReport {
        adj_r2: fit_adj_r2(a, f, n_regressors)?,
        rmse_kw: rmse,
        nrmse_pct: 100.0 * rmse / mean_actual,
        peak_pct,
        peak_hour: peak_time_of_day(forecast),
        energy_pct,
        rmse_over_threshold,
        n_regressors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn at(y: i32, m: u32, d: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(y, m, d).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    fn series(v: Vec<f64>) -> HourlyTimeSeries {
        HourlyTimeSeries::new(at(2021, 1, 1), v).unwrap()
    }

    #[test]
    fn identity_forecast_is_exact() {
        let v: Vec<f64> = (0..8760).map(|i| 500.0 + (i % 24) as f64 * 10.0).collect();
        let r = metrics(&series(v.clone()), &series(v), 3.0, Some(600.0)).unwrap();
        assert_eq!(r.rmse_kw, 0.0);
        assert_eq!(r.nrmse_pct, 0.0);
        assert_eq!(r.peak_pct, 100.0);
        assert_eq!(r.energy_pct, Some(100.0));
        assert_eq!(r.adj_r2, 1.0);
        assert_eq!(r.rmse_over_threshold, Some(0.0));
        assert_eq!(r.peak_hour, 23);
    }

    #[test]
    fn constant_offset_nrmse() {
        let v: Vec<f64> = (0..100).map(|i| 200.0 + (i % 7) as f64).collect();
        let m = v.iter().sum::<f64>() / 100.0;
        let f: Vec<f64> = v.iter().map(|x| x + 12.5).collect();
        let r = metrics(&series(v), &series(f), 1.0, None).unwrap();
        assert!((r.nrmse_pct - 100.0 * 12.5 / m).abs() < 1e-10);
        assert_eq!(r.energy_pct, None);
        assert_eq!(r.rmse_over_threshold, None);
    }

    #[test]
    fn peak_hour_rules() {
        let mut v = vec![1.0; 24];
        v[13] = 5.0;
        assert_eq!(peak_time_of_day(&series(v)), 13);
        assert_eq!(peak_time_of_day(&series(vec![3.0; 48])), 0);
        let mut v = vec![1.0; 24 * 5];
        v[24 * 3 + 20] = 9.0;
        v[24 + 7] = 9.0;
        assert_eq!(peak_time_of_day(&series(v)), 7);
    }

    #[test]
    fn whole_years_follow_anniversaries() {
        // 2024 is a leap year
        assert_eq!(whole_year_hours(at(2024, 1, 1), 8784), 8784);
        assert_eq!(whole_year_hours(at(2024, 1, 1), 8783), 0);
        assert_eq!(whole_year_hours(at(2021, 1, 1), 8760 * 2 + 5), 8760 * 2);
        assert_eq!(whole_year_hours(at(2023, 7, 1), 8784 + 8760 - 1), 8784);
    }

    #[test]
    fn energy_uses_whole_years_only() {
        let a = vec![100.0; 8760 + 100];
        let mut f = vec![100.0; 8760];
        f.extend(vec![1.0; 100]);
        let r = metrics(&series(a), &series(f), 0.0, None).unwrap();
        assert_eq!(r.energy_pct, Some(100.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            metrics(&series(vec![1.0; 5]), &series(vec![1.0; 4]), 0.0, None),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(metrics(&series(vec![0.0; 5]), &series(vec![1.0; 5]), 0.0, None).is_err());
        let shifted = HourlyTimeSeries::new(at(2021, 1, 2), vec![1.0; 5]).unwrap();
        assert!(metrics(&series(vec![1.0; 5]), &shifted, 0.0, None).is_err());
    }

    #[test]
    fn adjusted_r2_fixture() {
        // R² = 0.9 with T = 11, E = 2
        let a: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let tss: f64 = 110.0;
        // spread the residual sum of squares 0.1·TSS over two points
        let d = (0.1 * tss / 2.0).sqrt();
        let mut f = a.clone();
        f[0] += d;
        f[10] -= d;
        let v = fit_adj_r2(&a, &f, 2.0).unwrap();
        assert!((v - 0.875).abs() < 1e-12, "{v}");
    }

    proptest! {
        #[test]
        fn nrmse_scale_invariant(vals in proptest::collection::vec(1.0f64..100.0, 30), noise in proptest::collection::vec(-5.0f64..5.0, 30), k in 0.01f64..100.0) {
            let f: Vec<f64> = vals.iter().zip(&noise).map(|(a, b)| (a + b).abs() + 0.1).collect();
            let r1 = metrics(&series(vals.clone()), &series(f.clone()), 2.0, None).unwrap();
            let r2 = metrics(&series(vals.iter().map(|v| v * k).collect()), &series(f.iter().map(|v| v * k).collect()), 2.0, None).unwrap();
            prop_assert!((r1.nrmse_pct - r2.nrmse_pct).abs() < 1e-9 * r1.nrmse_pct.max(1.0));
            prop_assert!(r1.adj_r2 <= fit_adj_r2(&vals, &f, 0.0).unwrap() + 1e-12);
        }
    }
}
