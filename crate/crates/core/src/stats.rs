//! Diagnostic statistics: Kolmogorov–Smirnov normality test and sample
//! ACF/PACF.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance (divisor `n`).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// `1 - (1 - r2)(t - 1)/(t - e - 1)` for `t` observations and `e`
/// regressors (excluding the intercept). `e` may be fractional for penalized
/// fits.
pub fn adjusted_r2(r2: f64, t: usize, e: f64) -> f64 {
    let t = t as f64;
    1.0 - (1.0 - r2) * ((t - 1.0) / (t - e - 1.0))
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form converges fast for small arguments.
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=20)
            .map(|k| {
                let odd = (2 * k - 1) as f64;
                (c * odd * odd).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test against a normal with the sample mean and standard
/// deviation. The p-value is the asymptotic Kolmogorov one; with estimated
/// parameters it is conservative.
pub fn ks_normality_test(values: &[f64]) -> Result<KsResult> {
    let n = values.len();
    if n < 8 {
        return Err(Error::TooShort { required: 7, actual: n });
    }
    let m = mean(values);
    let sd = (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt();
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance("KS normality test sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf((x - m) / sd);
            let above = (i + 1) as f64 / nf - f;
            let below = f - i as f64 / nf;
            above.max(below)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(nf.sqrt() * d),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    /// `coefficients[k]` is the lag-`k` autocorrelation; `coefficients[0] == 1`.
    pub coefficients: Vec<f64>,
    /// `partial[k]` is the lag-`k` partial autocorrelation; `partial[0] == 1`.
    pub partial: Vec<f64>,
}

impl AcfResult {
    pub fn max_lag(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// Biased sample autocorrelation up to `max_lag`.
pub fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if 2 * max_lag >= n {
        return Err(Error::InvalidInput(format!(
            "max_lag {max_lag} must be below half the series length {n}"
        )));
    }
    let m = mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - m).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum();
    if !(c0 > 0.0) {
        return Err(Error::ZeroVariance("autocorrelation of a constant series".into()));
    }
    let mut r = Vec::with_capacity(max_lag + 1);
    r.push(1.0);
    for k in 1..=max_lag {
        let ck: f64 = centered[..n - k].iter().zip(&centered[k..]).map(|(a, b)| a * b).sum();
        r.push(ck / c0);
    }
    Ok(r)
}

/// Partial autocorrelations from an autocorrelation sequence by the
/// Durbin–Levinson recursion. `rho[0]` must be 1.
pub fn pacf_from_acf(rho: &[f64]) -> Vec<f64> {
    let max_lag = rho.len().saturating_sub(1);
    let mut out = vec![1.0; max_lag + 1];
    if max_lag == 0 {
        return out;
    }
    let mut phi = vec![0.0; max_lag + 1];
    let mut prev = vec![0.0; max_lag + 1];
    let mut v: f64 = 1.0;
    for k in 1..=max_lag {
        let num = rho[k] - (1..k).map(|j| prev[j] * rho[k - j]).sum::<f64>();
        let kk = if v.abs() > 0.0 { num / v } else { 0.0 };
        phi[k] = kk;
        for j in 1..k {
            phi[j] = prev[j] - kk * prev[k - j];
        }
        v *= 1.0 - kk * kk;
        out[k] = kk;
        prev[1..=k].copy_from_slice(&phi[1..=k]);
    }
    out
}

pub fn acf_pacf(x: &[f64], max_lag: usize) -> Result<AcfResult> {
    let coefficients = acf(x, max_lag)?;
    let partial = pacf_from_acf(&coefficients);
    Ok(AcfResult { coefficients, partial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal, Uniform};
    use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

    #[test]
    fn ks_on_normal_quantiles_is_tiny() {
        let n = 100;
        let std_normal = StatNormal::new(0.0, 1.0).unwrap();
        let sample: Vec<f64> = (1..=n)
            .map(|i| std_normal.inverse_cdf((i as f64 - 0.5) / n as f64))
            .collect();
        let r = ks_normality_test(&sample).unwrap();
        assert!(r.statistic < 0.01, "D = {}", r.statistic);
        assert!(r.p_value > 0.99);
    }

    #[test]
    fn ks_rejects_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = Uniform::new(0.0, 1.0).unwrap();
        let sample: Vec<f64> = (0..10_000).map(|_| u.sample(&mut rng)).collect();
        let r = ks_normality_test(&sample).unwrap();
        assert!(r.p_value < 0.05, "p = {}", r.p_value);
    }

    #[test]
    fn ks_statistic_matches_cdf_scan() {
        let sample = [2.3, -0.4, 1.1, 0.7, 3.9, -1.2, 0.05, 0.6, 1.8, -0.3];
        let n = sample.len() as f64;
        let m = sample.iter().sum::<f64>() / n;
        let sd = (sample.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let reference = StatNormal::new(m, sd).unwrap();
        // Evaluate the ECDF by counting, at and just left of every jump.
        let mut d: f64 = 0.0;
        for &x in &sample {
            let at = sample.iter().filter(|&&v| v <= x).count() as f64 / n;
            let left = sample.iter().filter(|&&v| v < x).count() as f64 / n;
            let f = reference.cdf(x);
            d = d.max((at - f).abs()).max((left - f).abs());
        }
        let r = ks_normality_test(&sample).unwrap();
        assert!((r.statistic - d).abs() < 1e-12, "{} vs {}", r.statistic, d);
    }

    #[test]
    fn ks_rejects_constant_and_tiny_samples() {
        assert!(matches!(ks_normality_test(&[1.0; 10]), Err(Error::ZeroVariance(_))));
        assert!(ks_normality_test(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn kolmogorov_tail_branches_agree() {
        // Both series converge near the switch point.
        let a = kolmogorov_sf(1.1799999);
        let b = kolmogorov_sf(1.18);
        assert!((a - b).abs() < 1e-6);
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 1e-3);
    }

    fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut x = 0.0;
        let mut out = Vec::with_capacity(n);
        for i in 0..n + 500 {
            x = phi * x + normal.sample(&mut rng);
            if i >= 500 {
                out.push(x);
            }
        }
        out
    }

    #[test]
    fn ar1_acf_decays_geometrically() {
        // The sampling SD of r24 here is about 0.025, so the +-0.03 band is
        // roughly one SD wide; the seed is fixed.
        let x = ar1(0.8, 10_000, 2);
        let r = acf_pacf(&x, 30).unwrap();
        assert_eq!(r.coefficients[0], 1.0);
        assert!((0.77..=0.83).contains(&r.coefficients[1]), "r1 = {}", r.coefficients[1]);
        assert!((r.coefficients[24] - 0.8f64.powi(24)).abs() < 0.03, "r24 = {}", r.coefficients[24]);
        // an AR(1) has no partial autocorrelation beyond lag 1
        assert!(r.partial[2].abs() < 0.05);
    }

    #[test]
    fn adjusted_r2_fixture() {
        assert_eq!(adjusted_r2(0.9, 11, 2.0), 0.875);
        assert_eq!(adjusted_r2(0.9, 11, 0.0), 0.9);
    }

    #[test]
    fn acf_errors() {
        assert!(matches!(acf(&[3.0; 20], 2), Err(Error::ZeroVariance(_))));
        assert!(acf(&[1.0, 2.0, 3.0, 4.0], 2).is_err());
    }

    proptest! {
        #[test]
        fn acf_bounded_and_pacf_lag1_matches(x in proptest::collection::vec(-100.0f64..100.0, 20..120)) {
            prop_assume!(variance(&x) > 1e-6);
            let r = acf_pacf(&x, x.len() / 2 - 1).unwrap();
            prop_assert_eq!(r.coefficients[0], 1.0);
            for c in &r.coefficients {
                prop_assert!(c.abs() <= 1.0 + 1e-9);
            }
            prop_assert_eq!(r.partial[1], r.coefficients[1]);
        }
    }
}
