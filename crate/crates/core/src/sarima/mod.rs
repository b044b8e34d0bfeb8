//! Seasonal ARIMA: conditional-sum-of-squares estimation, forecasting,
//! simulation and AICc order search.
//!
//! The model for `w = (1-B)^d (1-B^m)^D y` is
//! `φ(B)Φ(B^m)(w_t - μ) = θ(B)Θ(B^m)ε_t` with `φ(B) = 1 - φ_1 B - …` and
//! `θ(B) = 1 + θ_1 B + …`. The mean `μ` is only used when `d = D = 0`.

mod optim;
mod order;
mod poly;
mod search;

pub use optim::{minimize, BfgsOptions, BfgsResult};
pub use order::{SarimaOrder, MAX_ARMA_TERMS};
pub use poly::{expand_ar, expand_ma, is_invertible, is_stationary};
pub use search::{
    fit_auto, seasonal_order_grid, select_d, stepwise_order_search, Candidate, SearchConstraints, SearchResult,
};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::diff::{difference, integrate};
use crate::error::{Error, Result};
use crate::stats::{acf, mean, pacf_from_acf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SarimaParams {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
}

impl SarimaParams {
    pub fn zeros(order: &SarimaOrder) -> Self {
        Self {
            phi: vec![0.0; order.p],
            theta: vec![0.0; order.q],
            seasonal_phi: vec![0.0; order.sp],
            seasonal_theta: vec![0.0; order.sq],
        }
    }

    pub fn check(&self, order: &SarimaOrder) -> Result<()> {
        if self.phi.len() != order.p
            || self.theta.len() != order.q
            || self.seasonal_phi.len() != order.sp
            || self.seasonal_theta.len() != order.sq
        {
            return Err(Error::InvalidOrder(format!("parameter counts do not match order {order}")));
        }
        if !is_stationary(&self.phi) || !is_stationary(&self.seasonal_phi) {
            return Err(Error::NonStationary("autoregressive polynomial has a root on or inside the unit circle".into()));
        }
        if !is_invertible(&self.theta) || !is_invertible(&self.seasonal_theta) {
            return Err(Error::NonStationary("moving-average polynomial is not invertible".into()));
        }
        Ok(())
    }

    fn expanded(&self, m: usize) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
        (
            expand_ar(&self.phi, &self.seasonal_phi, m),
            expand_ma(&self.theta, &self.seasonal_theta, m),
        )
    }

    fn from_unconstrained(u: &[f64], order: &SarimaOrder) -> Self {
        let (a, rest) = u.split_at(order.p);
        let (b, rest) = rest.split_at(order.q);
        let (c, e) = rest.split_at(order.sp);
        Self {
            phi: poly::transform_ar(a),
            theta: poly::transform_ma(b),
            seasonal_phi: poly::transform_ar(c),
            seasonal_theta: poly::transform_ma(e),
        }
    }

    fn to_unconstrained(&self) -> Vec<f64> {
        let mut u = poly::untransform_ar(&self.phi);
        u.extend(poly::untransform_ma(&self.theta));
        u.extend(poly::untransform_ar(&self.seasonal_phi));
        u.extend(poly::untransform_ma(&self.seasonal_theta));
        u
    }
}

/// Innovations `e_t = z_t - Σ a_k z_{t-k} - Σ b_k e_{t-k}` for `t >= start`,
/// zero before. Returns the sum of squares.
fn css_residuals(z: &[f64], ar: &[(usize, f64)], ma: &[(usize, f64)], start: usize, e: &mut Vec<f64>) -> f64 {
    e.clear();
    e.resize(z.len(), 0.0);
    let mut sum = 0.0;
    for t in start..z.len() {
        let mut v = z[t];
        for &(k, a) in ar {
            v -= a * z[t - k];
        }
        for &(k, b) in ma {
            if k <= t {
                v -= b * e[t - k];
            }
        }
        e[t] = v;
        sum += v * v;
    }
    sum
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarimaFit {
    pub order: SarimaOrder,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
    /// Mean of the differenced series; zero unless `order.has_mean()`.
    pub training_mean: f64,
    pub sigma2: f64,
    /// Gaussian log-likelihood at `sigma2`, over all `n` training values.
    pub loglik_css: f64,
    pub aicc: f64,
    /// Observations entering the sum of squares.
    pub n_eff: usize,
    /// Estimated parameters: ARMA coefficients, mean if any, and σ².
    pub n_params: usize,
    /// Index into the training series of the first innovation.
    pub conditional_start: usize,
    /// Training innovations aligned with the input series, zero before
    /// `conditional_start`.
    #[serde(skip, default)]
    pub residuals: Vec<f64>,
    /// Last `d + D·m + p + P·m` training values, the state forecasting needs.
    pub history_tail: Vec<f64>,
    /// Last `q + Q·m` innovations.
    pub residual_tail: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip, default)]
    pub objective_trace: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SarimaFit {
    pub fn params(&self) -> SarimaParams {
        SarimaParams {
            phi: self.phi.clone(),
            theta: self.theta.clone(),
            seasonal_phi: self.seasonal_phi.clone(),
            seasonal_theta: self.seasonal_theta.clone(),
        }
    }

    /// One-step-ahead in-sample predictions (`y - residuals`); before the
    /// conditional start they equal the observations.
    pub fn fitted(&self, series: &[f64]) -> Vec<f64> {
        series.iter().zip(&self.residuals).map(|(y, e)| y - e).collect()
    }
}

fn initial_params(z: &[f64], order: &SarimaOrder) -> SarimaParams {
    let zero = SarimaParams::zeros(order);
    if order.n_arma() == 0 {
        return zero;
    }
    let n = z.len();
    let (ar_span, ma_span) = (order.ar_span(), order.ma_span());
    let long = (2 * (ar_span + ma_span)).max(10).min(n / 4);
    let innovations: Vec<f64> = if order.ma_span() == 0 {
        Vec::new()
    } else {
        let Ok(r) = acf(z, long) else { return zero };
        // AR coefficients of the long autoregression by Durbin–Levinson
        let a = long_ar(&r);
        (0..n)
            .map(|t| {
                if t < long {
                    0.0
                } else {
                    z[t] - a.iter().enumerate().map(|(j, c)| c * z[t - 1 - j]).sum::<f64>()
                }
            })
            .collect()
    };
    let mut lags: Vec<(bool, usize)> = Vec::new();
    lags.extend((1..=order.p).map(|i| (false, i)));
    lags.extend((1..=order.sp).map(|j| (false, j * order.m)));
    lags.extend((1..=order.q).map(|i| (true, i)));
    lags.extend((1..=order.sq).map(|j| (true, j * order.m)));
    let first = if ma_span > 0 { long + ma_span } else { 0 }.max(ar_span);
    if n <= first + 2 * lags.len() {
        return zero;
    }
    let rows = n - first;
    let x = DMatrix::from_fn(rows, lags.len(), |i, j| {
        let t = first + i;
        let (is_e, k) = lags[j];
        if is_e {
            innovations[t - k]
        } else {
            z[t - k]
        }
    });
    let y = DVector::from_iterator(rows, z[first..].iter().copied());
    let Ok(sol) = x.clone().svd(true, true).solve(&y, 1e-12) else {
        return zero;
    };
    let c: Vec<f64> = sol.iter().copied().collect();
    let (p, sp, q) = (order.p, order.sp, order.q);
    SarimaParams {
        phi: c[..p].to_vec(),
        seasonal_phi: c[p..p + sp].to_vec(),
        theta: c[p + sp..p + sp + q].to_vec(),
        seasonal_theta: c[p + sp + q..].to_vec(),
    }
}

fn long_ar(r: &[f64]) -> Vec<f64> {
    let partial = pacf_from_acf(r);
    // rebuild the final AR coefficients from the partials
    poly::pacf_to_ar(&partial[1..])
}

/// Fits by conditional sum of squares. The objective `CSS / n_eff` is
/// minimized over the partial-autocorrelation parameterization.
pub fn fit_sarima(series: &[f64], order: &SarimaOrder) -> Result<SarimaFit> {
    order.validate()?;
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("series contains non-finite values".into()));
    }
    let required = 10 * order.n_arma() + order.n_diff();
    if series.len() <= required.max(order.n_diff() + order.ar_span() + 2) {
        return Err(Error::TooShort {
            required: required.max(order.n_diff() + order.ar_span() + 2),
            actual: series.len(),
        });
    }
    let w = difference(series, order.d, order.sd, order.m)?;
    let mu = if order.has_mean() { mean(&w) } else { 0.0 };
    let z: Vec<f64> = w.iter().map(|v| v - mu).collect();
    let start = order.ar_span();
    let n_eff = z.len() - start;
    let k = order.n_arma() + usize::from(order.has_mean()) + 1;
    if n_eff <= k + 1 {
        return Err(Error::TooShort {
            required: k + 1 + start + order.n_diff(),
            actual: series.len(),
        });
    }

    let init = initial_params(&z, order);
    let mut buf = Vec::with_capacity(z.len());
    let objective = |u: &[f64]| -> f64 {
        let p = SarimaParams::from_unconstrained(u, order);
        let (ar, ma) = p.expanded(order.m);
        let mut e = Vec::new();
        css_residuals(&z, &ar, &ma, start, &mut e) / n_eff as f64
    };
    let result = minimize(objective, &init.to_unconstrained(), &BfgsOptions::default())?;
    if !result.value.is_finite() {
        return Err(Error::Optimizer(format!("objective diverged for order {order}")));
    }
    let mut warnings = Vec::new();
    if !result.converged {
        warnings.push(format!("optimizer stopped after {} iterations without meeting the gradient tolerance", result.iterations));
    }
    if result.x.iter().any(|u| u.tanh().abs() > 0.999) {
        warnings.push("parameters at the stationarity/invertibility boundary were projected inside".into());
    }
    for w in &warnings {
        log::warn!("SARIMA{order}: {w}");
    }
    let params = SarimaParams::from_unconstrained(&result.x, order);
    let (ar, ma) = params.expanded(order.m);
    let css = css_residuals(&z, &ar, &ma, start, &mut buf);
    let sigma2 = css / n_eff as f64;
    // The likelihood is scaled to the full series length so that orders
    // conditioning on different numbers of start-up values (or differencing
    // away different numbers of rows) are scored on the same footing.
    let nf = series.len() as f64;
    let loglik = -nf / 2.0 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let kf = k as f64;
    let aicc = -2.0 * loglik + 2.0 * kf + 2.0 * kf * (kf + 1.0) / (nf - kf - 1.0);

    let nd = order.n_diff();
    let mut residuals = vec![0.0; nd];
    residuals.extend_from_slice(&buf);
    let tail_len = (nd + start).min(series.len());
    let ma_span = order.ma_span();
    Ok(SarimaFit {
        order: *order,
        phi: params.phi,
        theta: params.theta,
        seasonal_phi: params.seasonal_phi,
        seasonal_theta: params.seasonal_theta,
        training_mean: mu,
        sigma2,
        loglik_css: loglik,
        aicc,
        n_eff,
        n_params: k,
        conditional_start: nd + start,
        history_tail: series[series.len() - tail_len..].to_vec(),
        residual_tail: buf[buf.len() - ma_span.min(buf.len())..].to_vec(),
        residuals,
        iterations: result.iterations,
        converged: result.converged,
        objective_trace: result.trace,
        warnings,
    })
}

/// Point forecasts for `1..=horizon` steps after the training data, with
/// future innovations at zero.
pub fn forecast_sarima(fit: &SarimaFit, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::InvalidInput("forecast horizon must be at least 1".into()));
    }
    let order = &fit.order;
    let (ar, ma) = fit.params().expanded(order.m);
    let ar_span = order.ar_span();
    let w_hist = if ar_span == 0 {
        Vec::new()
    } else {
        difference(&fit.history_tail, order.d, order.sd, order.m)?
    };
    let mu = fit.training_mean;
    let mut z: Vec<f64> = w_hist.iter().map(|v| v - mu).collect();
    let mut e = fit.residual_tail.clone();
    let (z0, e0) = (z.len(), e.len());
    z.reserve(horizon);
    e.reserve(horizon);
    for h in 0..horizon {
        let mut v = 0.0;
        for &(k, a) in &ar {
            v += a * z[z0 + h - k];
        }
        for &(k, b) in &ma {
            if k <= e0 + h {
                v += b * e[e0 + h - k];
            }
        }
        z.push(v);
        e.push(0.0);
    }
    let w_future: Vec<f64> = z[z0..].iter().map(|v| v + mu).collect();
    integrate(&fit.history_tail, &w_future, order.d, order.sd, order.m)
}

/// Simulates `n` values with Gaussian innovations of standard deviation
/// `sigma`. The ARMA part starts from zeros and runs a burn-in of
/// `10·(m + p + q)` steps; differencing is inverted from a zero prefix.
pub fn simulate_sarima(order: &SarimaOrder, params: &SarimaParams, n: usize, seed: u64, sigma: f64) -> Result<Vec<f64>> {
    order.validate()?;
    params.check(order)?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput(format!("innovation sd must be finite and >= 0, got {sigma}")));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ar, ma) = params.expanded(order.m);
    let burn = 10 * (order.m + order.p + order.q);
    let total = burn + n;
    let mut z = vec![0.0; total];
    let mut e = vec![0.0; total];
    for t in 0..total {
        let eps = normal.sample(&mut rng);
        let mut v = eps;
        for &(k, a) in &ar {
            if k <= t {
                v += a * z[t - k];
            }
        }
        for &(k, b) in &ma {
            if k <= t {
                v += b * e[t - k];
            }
        }
        e[t] = eps;
        z[t] = v;
    }
    let w = &z[burn..];
    let prefix = vec![0.0; order.n_diff()];
    integrate(&prefix, w, order.d, order.sd, order.m)
}

/// MA(∞) weights of the stationary ARMA part, `ψ_0 = 1`.
pub fn psi_weights(order: &SarimaOrder, params: &SarimaParams, n: usize) -> Vec<f64> {
    let (ar, ma) = params.expanded(order.m);
    let mut psi = vec![0.0; n];
    if n == 0 {
        return psi;
    }
    psi[0] = 1.0;
    for j in 1..n {
        let mut v = ma.iter().find(|(k, _)| *k == j).map_or(0.0, |(_, b)| *b);
        for &(k, a) in &ar {
            if k <= j {
                v += a * psi[j - k];
            }
        }
        psi[j] = v;
    }
    psi
}

/// Autocorrelations of the stationary ARMA part at lags `0..=max_lag`, and
/// its variance for unit innovation variance.
pub fn theoretical_acf(order: &SarimaOrder, params: &SarimaParams, max_lag: usize) -> Result<(Vec<f64>, f64)> {
    params.check(order)?;
    let terms = 20_000 + max_lag;
    let psi = psi_weights(order, params, terms + max_lag + 1);
    let gamma: Vec<f64> = (0..=max_lag)
        .map(|k| (0..terms).map(|j| psi[j] * psi[j + k]).sum())
        .collect();
    Ok((gamma.iter().map(|g| g / gamma[0]).collect(), gamma[0]))
}
