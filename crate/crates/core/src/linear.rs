//! Multiple linear regression and the LASSO with cross-validated penalty.
//!
//! The LASSO minimizes `(1/2n)·RSS + λ·Σ|b_j|` over centered, unit-variance
//! columns with an unpenalized intercept. Coefficients are reported on the
//! original scale.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::stats::{adjusted_r2, mean};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub column_names: Vec<String>,
    pub alpha: f64,
    pub betas: Vec<f64>,
    #[serde(skip, default)]
    pub fitted: Vec<f64>,
    #[serde(skip, default)]
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub tss: f64,
    pub r2: f64,
    pub adj_r2: f64,
    pub n_obs: usize,
}

impl OlsFit {
    pub fn beta(&self, column: &str) -> Option<f64> {
        self.column_names.iter().position(|c| c == column).map(|i| self.betas[i])
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        let mut out = vec![self.alpha; x.n_rows()];
        for (name, b) in self.column_names.iter().zip(&self.betas) {
            let col = x.column(name).ok_or_else(|| Error::MissingColumn(name.clone()))?;
            for (o, v) in out.iter_mut().zip(col) {
                *o += b * v;
            }
        }
        Ok(out)
    }
}

fn check_y(x: &FeatureMatrix, y: &[f64]) -> Result<()> {
    if y.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            expected: x.n_rows(),
            actual: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("response contains non-finite values".into()));
    }
    Ok(())
}

/// Columns that are linear combinations of the intercept and earlier
/// columns, found by modified Gram–Schmidt on the centered design.
pub fn collinear_columns(x: &FeatureMatrix) -> Vec<String> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut bad = Vec::new();
    for c in x.columns() {
        let m = mean(&c.values);
        let mut v: Vec<f64> = c.values.iter().map(|a| a - m).collect();
        let raw = c.values.iter().map(|a| a * a).sum::<f64>().sqrt();
        // two passes keep the projection accurate for nearly dependent columns
        for _ in 0..2 {
            for q in &basis {
                let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm <= 1e-9 * raw.max(f64::MIN_POSITIVE) {
            bad.push(c.name.clone());
        } else {
            basis.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    bad
}

/// Least squares with an intercept, solved by QR on centered, norm-scaled
/// columns.
pub fn fit_ols(x: &FeatureMatrix, y: &[f64]) -> Result<OlsFit> {
    check_y(x, y)?;
    let (n, p) = (x.n_rows(), x.n_columns());
    if n <= p + 1 {
        return Err(Error::TooShort {
            required: p + 1,
            actual: n,
        });
    }
    let bad = collinear_columns(x);
    if !bad.is_empty() {
        return Err(Error::RankDeficient { columns: bad });
    }
    let y_mean = mean(y);
    let means: Vec<f64> = x.columns().iter().map(|c| mean(&c.values)).collect();
    let mut design = DMatrix::<f64>::zeros(n, p);
    let mut scales = Vec::with_capacity(p);
    for (j, c) in x.columns().iter().enumerate() {
        let norm = c.values.iter().map(|v| (v - means[j]).powi(2)).sum::<f64>().sqrt();
        scales.push(norm);
        for (i, v) in c.values.iter().enumerate() {
            design[(i, j)] = (v - means[j]) / norm;
        }
    }
    let betas: Vec<f64> = if p == 0 {
        Vec::new()
    } else {
        let rhs = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let qr = design.qr();
        let qty = qr.q().transpose() * rhs;
        let sol = qr
            .r()
            .solve_upper_triangular(&qty)
            .ok_or_else(|| Error::RankDeficient {
                columns: x.column_names(),
            })?;
        sol.iter().zip(&scales).map(|(b, s)| b / s).collect()
    };
    let alpha = y_mean - betas.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
    let mut fit = OlsFit {
        column_names: x.column_names(),
        alpha,
        betas,
        fitted: Vec::new(),
        residuals: Vec::new(),
        rss: 0.0,
        tss: 0.0,
        r2: 0.0,
        adj_r2: 0.0,
        n_obs: n,
    };
    fit.fitted = fit.predict(x)?;
    fit.residuals = y.iter().zip(&fit.fitted).map(|(a, b)| a - b).collect();
    fit.rss = fit.residuals.iter().map(|r| r * r).sum();
    fit.tss = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    fit.r2 = if fit.tss > 0.0 { 1.0 - fit.rss / fit.tss } else { 1.0 };
    fit.adj_r2 = adjusted_r2(fit.r2, n, p as f64);
    Ok(fit)
}

/// Sufficient statistics of a standardized problem: coordinate descent runs
/// on the Gram matrix, so a sweep costs O(p²) regardless of row count.
#[derive(Debug, Clone)]
struct Standardized {
    n: f64,
    means: Vec<f64>,
    /// Population standard deviations; zero marks a constant column.
    scales: Vec<f64>,
    y_mean: f64,
    gram: Vec<Vec<f64>>,
    zty: Vec<f64>,
    yty: f64,
}

impl Standardized {
    fn new(columns: &[&[f64]], y: &[f64]) -> Self {
        let n = y.len();
        let nf = n as f64;
        let y_mean = mean(y);
        let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
        let mut means = Vec::new();
        let mut scales = Vec::new();
        let z: Vec<Vec<f64>> = columns
            .iter()
            .map(|c| {
                let m = mean(c);
                let sd = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / nf).sqrt();
                // treat numerically constant columns as constant
                let sd = if sd > 1e-12 * m.abs().max(1.0) { sd } else { 0.0 };
                means.push(m);
                scales.push(sd);
                if sd > 0.0 {
                    c.iter().map(|v| (v - m) / sd).collect()
                } else {
                    vec![0.0; n]
                }
            })
            .collect();
        let p = z.len();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut gram = vec![vec![0.0; p]; p];
        for j in 0..p {
            for k in j..p {
                let g = dot(&z[j], &z[k]);
                gram[j][k] = g;
                gram[k][j] = g;
            }
        }
        let zty = z.iter().map(|c| dot(c, &yc)).collect();
        Self {
            n: nf,
            means,
            scales,
            y_mean,
            gram,
            zty,
            yty: dot(&yc, &yc),
        }
    }

    fn lambda_max(&self) -> f64 {
        self.zty.iter().map(|v| v.abs()).fold(0.0, f64::max) / self.n
    }

    fn rss(&self, b: &[f64]) -> f64 {
        let p = b.len();
        let mut quad = 0.0;
        for j in 0..p {
            if b[j] != 0.0 {
                quad += b[j] * (0..p).map(|k| self.gram[j][k] * b[k]).sum::<f64>();
            }
        }
        let lin: f64 = b.iter().zip(&self.zty).map(|(a, c)| a * c).sum();
        (self.yty - 2.0 * lin + quad).max(0.0)
    }

    fn objective(&self, b: &[f64], lambda: f64) -> f64 {
        self.rss(b) / (2.0 * self.n) + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Primal minus dual objective at `b`, with the residual rescaled into the
    /// dual-feasible set.
    fn duality_gap(&self, b: &[f64], lambda: f64) -> f64 {
        let p = b.len();
        let rss = self.rss(b);
        let corr = (0..p)
            .map(|j| (self.zty[j] - (0..p).map(|k| self.gram[j][k] * b[k]).sum::<f64>()).abs())
            .fold(0.0, f64::max);
        let s = if corr > 0.0 { (self.n * lambda / corr).min(1.0) } else { 1.0 };
        let rty = self.yty - b.iter().zip(&self.zty).map(|(a, c)| a * c).sum::<f64>();
        let dist = s * s * rss - 2.0 * s * rty + self.yty;
        let dual = (self.yty - dist) / (2.0 * self.n);
        self.objective(b, lambda) - dual
    }

    /// Cyclic coordinate descent from `b` (warm start).
    fn solve(&self, lambda: f64, b: &mut [f64], trace: Option<&mut Vec<f64>>) -> Result<usize> {
        let p = b.len();
        let mut trace = trace;
        if let Some(t) = trace.as_deref_mut() {
            t.push(self.objective(b, lambda));
        }
        for sweep in 1..=MAX_SWEEPS {
            let mut max_change: f64 = 0.0;
            for j in 0..p {
                if self.scales[j] == 0.0 {
                    b[j] = 0.0;
                    continue;
                }
                let gjj = self.gram[j][j];
                let partial: f64 =
                    self.zty[j] - (0..p).filter(|&k| k != j).map(|k| self.gram[j][k] * b[k]).sum::<f64>();
                let new = soft_threshold(partial / self.n, lambda) / (gjj / self.n);
                max_change = max_change.max((new - b[j]).abs());
                b[j] = new;
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(self.objective(b, lambda));
            }
            if max_change < TOLERANCE {
                return Ok(sweep);
            }
        }
        Err(Error::NotConverged {
            sweeps: MAX_SWEEPS,
            gap: self.duality_gap(b, lambda),
        })
    }

    /// Original-scale `(intercept, slopes)` from standardized slopes.
    fn unscale(&self, b: &[f64]) -> (f64, Vec<f64>) {
        let slopes: Vec<f64> = b
            .iter()
            .zip(&self.scales)
            .map(|(v, s)| if *s > 0.0 { v / s } else { 0.0 })
            .collect();
        let intercept = self.y_mean - slopes.iter().zip(&self.means).map(|(a, m)| a * m).sum::<f64>();
        (intercept, slopes)
    }
}

const MAX_SWEEPS: usize = 10_000;
const TOLERANCE: f64 = 1e-9;

pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub column_names: Vec<String>,
    pub lambda: f64,
    pub intercept: f64,
    /// Original-scale slopes.
    pub coefficients: Vec<f64>,
    /// Slopes on the standardized columns.
    pub scaled_coefficients: Vec<f64>,
    pub sweeps: usize,
    pub duality_gap: f64,
    /// Penalized objective before the first sweep and after each sweep.
    pub objective_trace: Vec<f64>,
}

impl LassoFit {
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        let mut out = vec![self.intercept; x.n_rows()];
        for (name, b) in self.column_names.iter().zip(&self.coefficients) {
            let col = x.column(name).ok_or_else(|| Error::MissingColumn(name.clone()))?;
            for (o, v) in out.iter_mut().zip(col) {
                *o += b * v;
            }
        }
        Ok(out)
    }
}

fn columns_of(x: &FeatureMatrix) -> Vec<&[f64]> {
    x.columns().iter().map(|c| c.values.as_slice()).collect()
}

/// `λ_max = max_j |z_jᵀ(y − ȳ)| / n` on standardized columns: the smallest
/// penalty with every slope at zero.
pub fn lambda_max(x: &FeatureMatrix, y: &[f64]) -> Result<f64> {
    check_y(x, y)?;
    Ok(Standardized::new(&columns_of(x), y).lambda_max())
}

pub fn fit_lasso(x: &FeatureMatrix, y: &[f64], lambda: f64) -> Result<LassoFit> {
    check_y(x, y)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if x.n_rows() < 2 {
        return Err(Error::TooShort {
            required: 1,
            actual: x.n_rows(),
        });
    }
    let st = Standardized::new(&columns_of(x), y);
    let mut b = vec![0.0; x.n_columns()];
    let mut trace = Vec::new();
    let sweeps = st.solve(lambda, &mut b, Some(&mut trace))?;
    let (intercept, coefficients) = st.unscale(&b);
    Ok(LassoFit {
        column_names: x.column_names(),
        lambda,
        intercept,
        coefficients,
        duality_gap: st.duality_gap(&b, lambda),
        scaled_coefficients: b,
        sweeps,
        objective_trace: trace,
    })
}

/// How the cross-validated penalty is picked from the CV curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    /// Smallest mean CV error; ties go to the larger λ.
    MinMse,
    /// Largest λ whose mean CV error is within one standard error of the
    /// minimum.
    OneStandardError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LambdaGrid {
    /// `count` log-spaced values from λ_max down to `ratio·λ_max`.
    Auto { count: usize, ratio: f64 },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub grid: LambdaGrid,
    pub rule: LambdaRule,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            grid: LambdaGrid::Auto { count: 100, ratio: 1e-4 },
            rule: LambdaRule::OneStandardError,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoCvResult {
    /// Descending.
    pub lambda_grid: Vec<f64>,
    pub cv_mse: Vec<f64>,
    /// Standard error of the fold MSEs at each λ.
    pub cv_se: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_1se: f64,
    pub rule: LambdaRule,
    pub best_lambda: f64,
    /// Refit on all rows at `best_lambda`.
    pub fit: LassoFit,
    /// Logical variable of each column, aligned with `fit.column_names`.
    pub column_variables: Vec<String>,
    pub retained: Vec<String>,
}

/// k-fold cross-validation over contiguous time blocks.
pub fn cv_lasso(x: &FeatureMatrix, y: &[f64], options: &CvOptions) -> Result<LassoCvResult> {
    check_y(x, y)?;
    let n = x.n_rows();
    let k = options.folds;
    if k < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {k}")));
    }
    if n < 10 * k {
        return Err(Error::TooShort {
            required: 10 * k - 1,
            actual: n,
        });
    }
    let cols = columns_of(x);
    let full = Standardized::new(&cols, y);
    let grid: Vec<f64> = match &options.grid {
        LambdaGrid::Explicit(g) => {
            if g.is_empty() || g.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
                return Err(Error::InvalidInput("lambda grid must hold finite non-negative values".into()));
            }
            let mut g = g.clone();
            g.sort_by(|a, b| b.total_cmp(a));
            g
        }
        LambdaGrid::Auto { count, ratio } => {
            let lmax = full.lambda_max();
            if !(lmax > 0.0) {
                return Err(Error::ZeroVariance("every column is uncorrelated with the response".into()));
            }
            if *count == 1 {
                vec![lmax]
            } else {
                let (hi, lo) = (lmax.ln(), (lmax * ratio).ln());
                (0..*count)
                    .map(|i| (hi + (lo - hi) * i as f64 / (*count - 1) as f64).exp())
                    .collect()
            }
        }
    };

    let bounds: Vec<(usize, usize)> = (0..k).map(|f| (f * n / k, (f + 1) * n / k)).collect();
    let fold_errors: Vec<Vec<f64>> = bounds
        .par_iter()
        .map(|&(lo, hi)| -> Result<Vec<f64>> {
            let train_y: Vec<f64> = y[..lo].iter().chain(&y[hi..]).copied().collect();
            if train_y.iter().all(|v| *v == train_y[0]) {
                return Err(Error::ZeroVariance(format!("response is constant outside fold rows {lo}..{hi}")));
            }
            let train_cols: Vec<Vec<f64>> = cols
                .iter()
                .map(|c| c[..lo].iter().chain(&c[hi..]).copied().collect())
                .collect();
            let refs: Vec<&[f64]> = train_cols.iter().map(Vec::as_slice).collect();
            let st = Standardized::new(&refs, &train_y);
            let mut b = vec![0.0; cols.len()];
            grid.iter()
                .map(|&lambda| {
                    st.solve(lambda, &mut b, None)?;
                    let (a, slopes) = st.unscale(&b);
                    let sse: f64 = (lo..hi)
                        .map(|i| {
                            let pred = a + slopes.iter().zip(&cols).map(|(s, c)| s * c[i]).sum::<f64>();
                            (y[i] - pred).powi(2)
                        })
                        .sum();
                    Ok(sse / (hi - lo) as f64)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let kf = k as f64;
    let cv_mse: Vec<f64> = (0..grid.len()).map(|g| fold_errors.iter().map(|f| f[g]).sum::<f64>() / kf).collect();
    let cv_se: Vec<f64> = (0..grid.len())
        .map(|g| {
            let m = cv_mse[g];
            let var = fold_errors.iter().map(|f| (f[g] - m).powi(2)).sum::<f64>() / (kf - 1.0);
            (var / kf).sqrt()
        })
        .collect();
    // grid is descending, so the first strict minimum is the largest λ
    let mut i_min = 0;
    for g in 1..grid.len() {
        if cv_mse[g] < cv_mse[i_min] {
            i_min = g;
        }
    }
    let limit = cv_mse[i_min] + cv_se[i_min];
    let i_1se = (0..=i_min).find(|&g| cv_mse[g] <= limit).unwrap_or(i_min);
    let best_lambda = match options.rule {
        LambdaRule::MinMse => grid[i_min],
        LambdaRule::OneStandardError => grid[i_1se],
    };
    let fit = fit_lasso(x, y, best_lambda)?;
    let column_variables: Vec<String> = x.columns().iter().map(|c| c.variable.clone()).collect();
    let mut retained: Vec<String> = Vec::new();
    for (v, b) in column_variables.iter().zip(&fit.coefficients) {
        if *b != 0.0 && !retained.contains(v) {
            retained.push(v.clone());
        }
    }
    Ok(LassoCvResult {
        lambda_min: grid[i_min],
        lambda_1se: grid[i_1se],
        lambda_grid: grid,
        cv_mse,
        cv_se,
        rule: options.rule,
        best_lambda,
        fit,
        column_variables,
        retained,
    })
}

/// Logical variables with at least one nonzero coefficient; a single nonzero
/// dummy keeps its whole categorical variable.
pub fn select_variables(result: &LassoCvResult) -> Result<Vec<String>> {
    if result.retained.is_empty() {
        return Err(Error::AllVariablesDropped);
    }
    Ok(result.retained.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureColumn;
    use chrono::NaiveDate;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn t0() -> chrono::NaiveDateTime {
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    fn matrix(cols: Vec<(&str, Vec<f64>)>) -> FeatureMatrix {
        FeatureMatrix::from_named(t0(), cols.into_iter().map(|(n, v)| (n.to_string(), v)).collect()).unwrap()
    }

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, 1.0).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    /// Solves the 3×3 normal equations of `[1, a, b]` by Cramer's rule.
    fn normal_equations(a: &[f64], b: &[f64], y: &[f64]) -> [f64; 3] {
        let cols = [vec![1.0; a.len()], a.to_vec(), b.to_vec()];
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
        let m: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| dot(&cols[i], &cols[j])).collect()).collect();
        let r: Vec<f64> = (0..3).map(|i| dot(&cols[i], y)).collect();
        let det3 = |m: &[Vec<f64>]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d = det3(&m);
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let mut mc = m.clone();
            for i in 0..3 {
                mc[i][c] = r[i];
            }
            *o = det3(&mc) / d;
        }
        out
    }

    #[test]
    fn ols_exact_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 3.0 * v).collect();
        let fit = fit_ols(&matrix(vec![("x", x)]), &y).unwrap();
        assert!((fit.alpha - 2.0).abs() < 1e-12);
        assert!((fit.betas[0] - 3.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ols_intercept_only() {
        let y = [3.0, 5.0, 10.0];
        let fit = fit_ols(&FeatureMatrix::empty(t0(), 3), &y).unwrap();
        assert_eq!(fit.alpha, 6.0);
        assert_eq!(fit.adj_r2, fit.r2);
    }

    #[test]
    fn ols_matches_normal_equations() {
        let a = gaussian(5, 11);
        let b = gaussian(5, 12);
        let y = gaussian(5, 13);
        let fit = fit_ols(&matrix(vec![("a", a.clone()), ("b", b.clone())]), &y).unwrap();
        let oracle = normal_equations(&a, &b, &y);
        assert!((fit.alpha - oracle[0]).abs() < 1e-10);
        assert!((fit.betas[0] - oracle[1]).abs() < 1e-10);
        assert!((fit.betas[1] - oracle[2]).abs() < 1e-10);
    }

    #[test]
    fn ols_names_collinear_columns() {
        let a = gaussian(30, 1);
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 1.0).collect();
        let err = fit_ols(&matrix(vec![("a", a.clone()), ("c", gaussian(30, 2)), ("b", b)]), &gaussian(30, 3))
            .unwrap_err();
        match err {
            Error::RankDeficient { columns } => assert_eq!(columns, vec!["b".to_string()]),
            e => panic!("{e}"),
        }
        let err = fit_ols(&matrix(vec![("a", a), ("k", vec![4.0; 30])]), &gaussian(30, 3)).unwrap_err();
        assert!(err.to_string().contains('k'));
    }

    #[test]
    fn ols_residuals_orthogonal() {
        let a = gaussian(200, 4);
        let b: Vec<f64> = gaussian(200, 5).iter().map(|v| 1000.0 * v + 5e4).collect();
        let y: Vec<f64> = a.iter().zip(&b).zip(gaussian(200, 6)).map(|((p, q), e)| p + 1e-3 * q + e).collect();
        let fit = fit_ols(&matrix(vec![("a", a.clone()), ("b", b.clone())]), &y).unwrap();
        let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(fit.residuals.iter().sum::<f64>().abs() < 1e-8 * 200.0 * scale);
        for c in [&a, &b] {
            let d: f64 = c.iter().zip(&fit.residuals).map(|(p, q)| p * q).sum();
            let cs = c.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(d.abs() < 1e-8 * cs * scale * 200.0, "{d}");
        }
        assert!(fit.rss <= fit.tss);
    }

    #[test]
    fn lasso_zero_penalty_is_ols() {
        let a = gaussian(300, 21);
        let b: Vec<f64> = gaussian(300, 22).iter().zip(&a).map(|(p, q)| 0.5 * p + 0.3 * q).collect();
        let y: Vec<f64> = a.iter().zip(&b).zip(gaussian(300, 23)).map(|((p, q), e)| 1.0 + 2.0 * p - q + e).collect();
        let x = matrix(vec![("a", a), ("b", b)]);
        let ols = fit_ols(&x, &y).unwrap();
        let lasso = fit_lasso(&x, &y, 0.0).unwrap();
        assert!((ols.alpha - lasso.intercept).abs() < 1e-8);
        for (p, q) in ols.betas.iter().zip(&lasso.coefficients) {
            assert!((p - q).abs() < 1e-8);
        }
    }

    #[test]
    fn lasso_above_lambda_max_is_empty() {
        let a = gaussian(100, 31);
        let y: Vec<f64> = a.iter().zip(gaussian(100, 32)).map(|(p, e)| 3.0 + p + e).collect();
        let x = matrix(vec![("a", a), ("b", gaussian(100, 33))]);
        let lmax = lambda_max(&x, &y).unwrap();
        for l in [lmax, 2.0 * lmax] {
            let fit = fit_lasso(&x, &y, l).unwrap();
            assert!(fit.coefficients.iter().all(|&b| b == 0.0));
            assert!((fit.intercept - mean(&y)).abs() < 1e-12);
        }
        let fit = fit_lasso(&x, &y, 0.99 * lmax).unwrap();
        assert!(fit.coefficients.iter().any(|&b| b != 0.0));
    }

    /// Centered orthogonal columns with unit population variance, so the
    /// standardized design equals the raw one.
    fn orthonormal_design(n: usize) -> (Vec<f64>, Vec<f64>) {
        let a: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let b: Vec<f64> = (0..n).map(|i| if (i / 2) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        (a, b)
    }

    #[test]
    fn lasso_orthonormal_soft_threshold() {
        let n = 400;
        let (a, b) = orthonormal_design(n);
        let y: Vec<f64> = (0..n).zip(gaussian(n, 41)).map(|(i, e)| 0.7 * a[i] - 0.2 * b[i] + e).collect();
        let x = matrix(vec![("a", a.clone()), ("b", b.clone())]);
        let ols = fit_ols(&x, &y).unwrap();
        for lambda in [0.0, 0.05, 0.15, 0.3, 1.0] {
            let fit = fit_lasso(&x, &y, lambda).unwrap();
            for j in 0..2 {
                let expect = soft_threshold(ols.betas[j], lambda);
                assert!((fit.coefficients[j] - expect).abs() < 1e-10, "λ={lambda} j={j}");
            }
        }
    }

    #[test]
    fn lasso_sparsity_monotone_on_orthonormal_path() {
        let n = 400;
        let (a, b) = orthonormal_design(n);
        let y: Vec<f64> = (0..n).zip(gaussian(n, 42)).map(|(i, e)| 0.7 * a[i] - 0.2 * b[i] + e).collect();
        let x = matrix(vec![("a", a), ("b", b)]);
        let lmax = lambda_max(&x, &y).unwrap();
        let mut prev = 0;
        for i in 0..50 {
            let l = lmax * (1e-3f64).powf(i as f64 / 49.0);
            let nz = fit_lasso(&x, &y, l).unwrap().coefficients.iter().filter(|b| **b != 0.0).count();
            assert!(nz >= prev);
            prev = nz;
        }
    }

    #[test]
    fn lasso_objective_never_increases() {
        let n = 500;
        let cols: Vec<Vec<f64>> = (0..5).map(|j| gaussian(n, 50 + j)).collect();
        let y: Vec<f64> = (0..n).map(|i| cols[0][i] + 0.5 * cols[1][i] + cols[2][i] * 0.1).collect();
        let x = matrix(cols.iter().enumerate().map(|(j, c)| (["a", "b", "c", "d", "e"][j], c.clone())).collect());
        let fit = fit_lasso(&x, &y, 0.01).unwrap();
        for w in fit.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
        assert!(fit.duality_gap < 1e-6);
    }

    #[test]
    fn lasso_constant_column_gets_zero() {
        let a = gaussian(50, 60);
        let y: Vec<f64> = a.iter().map(|v| 1.0 + v).collect();
        let fit = fit_lasso(&matrix(vec![("a", a), ("k", vec![7.0; 50])]), &y, 0.01).unwrap();
        assert_eq!(fit.coefficients[1], 0.0);
    }

    fn null_problem(seed: u64) -> (FeatureMatrix, Vec<f64>) {
        let n = 2000;
        let cols: Vec<Vec<f64>> = (0..7).map(|j| gaussian(n, seed * 100 + j)).collect();
        let noise = gaussian(n, seed * 100 + 99);
        let y: Vec<f64> = (0..n).map(|i| 2.0 * cols[0][i] - cols[1][i] + 0.5 * cols[2][i] + noise[i]).collect();
        let names = ["t1", "t2", "t3", "n1", "n2", "n3", "n4"];
        (matrix(names.iter().zip(cols).map(|(n, c)| (*n, c)).collect()), y)
    }

    #[test]
    fn cv_lasso_drops_null_regressors() {
        let (x, y) = null_problem(1);
        let r = cv_lasso(&x, &y, &CvOptions::default()).unwrap();
        assert_eq!(r.lambda_grid.len(), 100);
        assert!(r.lambda_grid.windows(2).all(|w| w[0] > w[1]));
        assert!(r.lambda_1se >= r.lambda_min);
        assert_eq!(select_variables(&r).unwrap(), vec!["t1", "t2", "t3"]);
    }

    #[test]
    fn cv_lasso_singleton_grid() {
        let (x, y) = null_problem(2);
        let opts = CvOptions {
            grid: LambdaGrid::Explicit(vec![0.05]),
            ..CvOptions::default()
        };
        let r = cv_lasso(&x, &y, &opts).unwrap();
        assert_eq!(r.best_lambda, 0.05);
        assert_eq!(r.lambda_grid, vec![0.05]);
    }

    #[test]
    fn cv_lasso_rejects_degenerate_folds() {
        let (x, _) = null_problem(3);
        assert!(matches!(
            cv_lasso(&x, &vec![1.0; 2000], &CvOptions::default()),
            Err(Error::ZeroVariance(_))
        ));
        let opts = CvOptions {
            folds: 1,
            ..CvOptions::default()
        };
        assert!(cv_lasso(&x, &vec![1.0; 2000], &opts).is_err());
    }

    #[test]
    fn select_variables_rules() {
        let (x, y) = null_problem(4);
        let mut r = cv_lasso(&x, &y, &CvOptions::default()).unwrap();
        r.retained.clear();
        assert!(matches!(select_variables(&r), Err(Error::AllVariablesDropped)));

        // one nonzero dummy keeps the categorical variable
        let n = 300;
        let d1: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { 1.0 } else { 0.0 }).collect();
        let d2: Vec<f64> = (0..n).map(|i| if i % 3 == 1 { 1.0 } else { 0.0 }).collect();
        let y: Vec<f64> = d1.iter().zip(gaussian(n, 70)).map(|(d, e)| 5.0 * d + 0.1 * e).collect();
        let cols = vec![
            FeatureColumn {
                name: "cat[a]".into(),
                variable: "cat".into(),
                values: d1,
            },
            FeatureColumn {
                name: "cat[b]".into(),
                variable: "cat".into(),
                values: d2,
            },
            FeatureColumn {
                name: "noise".into(),
                variable: "noise".into(),
                values: gaussian(n, 71),
            },
        ];
        let x = FeatureMatrix::new(t0(), cols).unwrap();
        let r = cv_lasso(&x, &y, &CvOptions::default()).unwrap();
        assert!(select_variables(&r).unwrap().contains(&"cat".to_string()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn standardized_predictions_match(seed in 0u64..1000, lambda in 0.0f64..0.5) {
            let n = 60;
            let a: Vec<f64> = gaussian(n, seed).iter().map(|v| 50.0 + 10.0 * v).collect();
            let b: Vec<f64> = gaussian(n, seed + 1).iter().map(|v| -3.0 + 0.01 * v).collect();
            let y: Vec<f64> = gaussian(n, seed + 2);
            let x = matrix(vec![("a", a.clone()), ("b", b.clone())]);
            let fit = fit_lasso(&x, &y, lambda).unwrap();
            let pred = fit.predict(&x).unwrap();
            // prediction from the scaled-space coefficients
            let st = Standardized::new(&[&a, &b], &y);
            for i in 0..n {
                let z = st.y_mean
                    + fit.scaled_coefficients[0] * (a[i] - st.means[0]) / st.scales[0]
                    + fit.scaled_coefficients[1] * (b[i] - st.means[1]) / st.scales[1];
                prop_assert!((z - pred[i]).abs() < 1e-10 * (1.0 + z.abs()));
            }
        }
    }
}
