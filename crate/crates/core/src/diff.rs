//! Backshift-polynomial differencing `(1 - B)^d (1 - B^m)^D` and its inverse.

use crate::error::{Error, Result};

fn lags(d: usize, seasonal_d: usize, m: usize) -> Result<Vec<usize>> {
    if seasonal_d > 0 && m < 2 {
        return Err(Error::InvalidOrder(format!(
            "seasonal differencing needs a season length of at least 2, got {m}"
        )));
    }
    let mut out = vec![1; d];
    out.extend(std::iter::repeat_n(m, seasonal_d));
    Ok(out)
}

fn lag_diff(x: &[f64], lag: usize) -> Vec<f64> {
    x[lag..].iter().zip(x).map(|(a, b)| a - b).collect()
}

/// Applies `(1 - B)^d` and then `(1 - B^m)^D`. The output is `d + D*m`
/// shorter than the input.
pub fn difference(x: &[f64], d: usize, seasonal_d: usize, m: usize) -> Result<Vec<f64>> {
    let lags = lags(d, seasonal_d, m)?;
    let total: usize = lags.iter().sum();
    if x.len() <= total {
        return Err(Error::TooShort {
            required: total,
            actual: x.len(),
        });
    }
    Ok(lags.iter().fold(x.to_vec(), |acc, &lag| lag_diff(&acc, lag)))
}

/// Extends `history` by values whose differenced form is `future_diffs`.
///
/// `history` must hold at least `d + D*m` original-scale values. With
/// `history` equal to the dropped prefix of a series and `future_diffs` equal
/// to its differenced form, this reconstructs the series exactly.
pub fn integrate(history: &[f64], future_diffs: &[f64], d: usize, seasonal_d: usize, m: usize) -> Result<Vec<f64>> {
    let lags = lags(d, seasonal_d, m)?;
    let total: usize = lags.iter().sum();
    if history.len() < total {
        return Err(Error::TooShort {
            required: total.saturating_sub(1),
            actual: history.len(),
        });
    }
    // stages[k] is the history after the first k differencing operations.
    let mut stages = Vec::with_capacity(lags.len() + 1);
    stages.push(history.to_vec());
    for &lag in &lags {
        let next = lag_diff(stages.last().unwrap(), lag);
        stages.push(next);
    }
    let mut future = future_diffs.to_vec();
    for (k, &lag) in lags.iter().enumerate().rev() {
        let mut stage = stages[k].clone();
        let base = stage.len();
        stage.reserve(future.len());
        for (h, &f) in future.iter().enumerate() {
            let v = f + stage[base + h - lag];
            stage.push(v);
        }
        future = stage.split_off(base);
    }
    Ok(future)
}

/// Reconstructs the original series from its differenced form and the
/// `d + D*m` values that differencing dropped.
pub fn undifference(diffed: &[f64], prefix: &[f64], d: usize, seasonal_d: usize, m: usize) -> Result<Vec<f64>> {
    let total = d + seasonal_d * m;
    if prefix.len() != total {
        return Err(Error::LengthMismatch {
            expected: total,
            actual: prefix.len(),
        });
    }
    let mut out = prefix.to_vec();
    out.extend(integrate(prefix, diffed, d, seasonal_d, m)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_first_difference_is_zero() {
        assert_eq!(difference(&[5.0; 6], 1, 0, 1).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn seasonal_difference_kills_periodic_pattern() {
        let x: Vec<f64> = (0..96).map(|i| ((i % 24) as f64).sin() * 10.0).collect();
        let d = difference(&x, 0, 1, 24).unwrap();
        assert_eq!(d.len(), 72);
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn second_difference_of_squares() {
        assert_eq!(difference(&[1.0, 4.0, 9.0, 16.0, 25.0], 2, 0, 1).unwrap(), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn errors() {
        assert!(difference(&[1.0, 2.0], 0, 1, 1).is_err());
        assert!(difference(&[1.0, 2.0], 2, 0, 1).is_err());
    }

    #[test]
    fn integrate_extends_random_walk_flat() {
        let hist = [3.0, 7.0];
        assert_eq!(integrate(&hist, &[0.0, 0.0, 0.0], 1, 0, 1).unwrap(), vec![7.0; 3]);
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(x in proptest::collection::vec(-1000i32..1000, 60..120), d in 0usize..3, sd in 0usize..2) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let m = 12;
            let total = d + sd * m;
            let diffed = difference(&x, d, sd, m).unwrap();
            prop_assert_eq!(diffed.len(), x.len() - total);
            let back = undifference(&diffed, &x[..total], d, sd, m).unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn integrate_continues_series(x in proptest::collection::vec(-1000i32..1000, 60..120), d in 0usize..3, sd in 0usize..2, split in 30usize..50) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let m = 7;
            let total = d + sd * m;
            let all = difference(&x, d, sd, m).unwrap();
            let future = &all[split - total..];
            let tail = integrate(&x[..split], future, d, sd, m).unwrap();
            prop_assert_eq!(&tail[..], &x[split..]);
        }
    }
}
