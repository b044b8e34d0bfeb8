//! Additive models: an intercept, linear terms and penalized cubic
//! regression spline smooths, with smoothing parameters picked by GCV.
//!
//! Each smooth is constrained to sum to zero over the training rows. The
//! penalty weights are searched on `ln λ ∈ [-8, 8]` after normalizing each
//! penalty to the scale of its block of the Gram matrix.

mod basis;

pub use basis::{build_cr_basis, CrBasis};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, OCCUPANCY, TEMPERATURE};
use crate::linear::collinear_columns;
use crate::stats::{adjusted_r2, mean};

pub const DEFAULT_BASIS_DIM: usize = 10;
const LOG_LAMBDA_RANGE: (i32, i32) = (-8, 8);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothSpec {
    pub column: String,
    pub basis_dim: usize,
    /// Fixed smoothing weight; `None` selects it by GCV. Infinity restricts
    /// the term to a linear function.
    pub lambda: Option<f64>,
}

impl SmoothSpec {
    pub fn new(column: &str) -> Self {
        Self {
            column: column.to_string(),
            basis_dim: DEFAULT_BASIS_DIM,
            lambda: None,
        }
    }
}

/// Smooth terms; every other column of the design enters linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GamConfig {
    pub smooth_terms: Vec<SmoothSpec>,
}

impl GamConfig {
    /// Smooth on temperature.
    pub fn gam1() -> Self {
        Self {
            smooth_terms: vec![SmoothSpec::new(TEMPERATURE)],
        }
    }

    /// Smooths on temperature and occupancy.
    pub fn gam2() -> Self {
        Self {
            smooth_terms: vec![SmoothSpec::new(TEMPERATURE), SmoothSpec::new(OCCUPANCY)],
        }
    }

    /// Drops smooths whose column is absent from `columns`.
    pub fn restricted_to(&self, columns: &[String]) -> Self {
        Self {
            smooth_terms: self
                .smooth_terms
                .iter()
                .filter(|s| columns.contains(&s.column))
                .cloned()
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothFit {
    pub column: String,
    pub basis: CrBasis,
    /// Spline values at the knots; the contribution is `basis.value(coefficients, x)`.
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub edf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamFit {
    pub alpha: f64,
    pub linear_names: Vec<String>,
    pub linear_betas: Vec<f64>,
    pub smooths: Vec<SmoothFit>,
    #[serde(skip, default)]
    pub fitted: Vec<f64>,
    #[serde(skip, default)]
    pub residuals: Vec<f64>,
    /// Total effective degrees of freedom, intercept included.
    pub edf: f64,
    pub rss: f64,
    pub r2: f64,
    pub adj_r2: f64,
    pub gcv: f64,
    /// RSS plus the weighted penalties, in the internal scaling.
    pub penalized_rss: f64,
    /// True when a GCV search ended on the edge of the λ range.
    pub grid_fallback: bool,
    pub n_obs: usize,
}

impl GamFit {
    pub fn smooth(&self, column: &str) -> Option<&SmoothFit> {
        self.smooths.iter().find(|s| s.column == column)
    }

    /// Contribution of one smooth at each value of `x`.
    pub fn smooth_contribution(&self, column: &str, x: &[f64]) -> Option<Vec<f64>> {
        let s = self.smooth(column)?;
        Some(x.iter().map(|&v| s.basis.value(&s.coefficients, v)).collect())
    }
}

pub fn predict_gam(fit: &GamFit, x: &FeatureMatrix) -> Result<Vec<f64>> {
    let mut out = vec![fit.alpha; x.n_rows()];
    for (name, b) in fit.linear_names.iter().zip(&fit.linear_betas) {
        let col = x.column(name).ok_or_else(|| Error::MissingColumn(name.clone()))?;
        out.iter_mut().zip(col).for_each(|(o, v)| *o += b * v);
    }
    for s in &fit.smooths {
        let col = x.column(&s.column).ok_or_else(|| Error::MissingColumn(s.column.clone()))?;
        for (o, &v) in out.iter_mut().zip(col) {
            *o += s.basis.value(&s.coefficients, v);
        }
    }
    Ok(out)
}

/// Householder complement of `c`: a K×(K−1) matrix whose columns span the
/// vectors orthogonal to `c`.
fn null_space(c: &[f64]) -> DMatrix<f64> {
    let k = c.len();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut v = DVector::from_column_slice(c);
    v[0] += if c[0] >= 0.0 { norm } else { -norm };
    let vv = v.dot(&v);
    let h = DMatrix::<f64>::identity(k, k) - (&v * v.transpose()) * (2.0 / vv);
    h.columns(1, k - 1).into_owned()
}

/// One smooth after constraint and scaling.
struct Block {
    spec: SmoothSpec,
    basis: CrBasis,
    /// Maps block coefficients (scaled space) to knot values.
    to_knots: DMatrix<f64>,
    offset: usize,
    width: usize,
    /// Normalized penalty in the scaled block coordinates; `None` for a
    /// term forced linear.
    penalty: Option<DMatrix<f64>>,
}

struct Problem {
    n: usize,
    gram: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
    blocks: Vec<Block>,
}

struct Solution {
    beta: DVector<f64>,
    edf: f64,
    gcv: f64,
    /// Diagonal of the influence trace, per coefficient.
    trace_diag: Vec<f64>,
    penalized_rss: f64,
}

impl Problem {
    fn solve(&self, lambdas: &[f64]) -> Result<Solution> {
        let mut a = self.gram.clone();
        for (b, &l) in self.blocks.iter().zip(lambdas) {
            if let Some(s) = &b.penalty {
                if l > 0.0 {
                    let mut v = a.view_mut((b.offset, b.offset), (b.width, b.width));
                    v += s * l;
                }
            }
        }
        let chol = a.cholesky().ok_or_else(|| Error::RankDeficient {
            columns: self.blocks.iter().map(|b| b.spec.column.clone()).collect(),
        })?;
        let beta = chol.solve(&self.xty);
        let ag = chol.solve(&self.gram);
        let trace_diag: Vec<f64> = (0..ag.nrows()).map(|i| ag[(i, i)]).collect();
        let quad = (beta.transpose() * &self.gram * &beta)[(0, 0)];
        let rss = (self.yty - 2.0 * beta.dot(&self.xty) + quad).max(0.0);
        let mut pen = 0.0;
        for (b, &l) in self.blocks.iter().zip(lambdas) {
            if let Some(s) = &b.penalty {
                if l > 0.0 {
                    let bb = beta.rows(b.offset, b.width);
                    pen += l * (bb.transpose() * s * bb)[(0, 0)];
                }
            }
        }
        // the intercept is handled by centering and counts one degree
        let edf = trace_diag.iter().sum::<f64>() + 1.0;
        let n = self.n as f64;
        let gcv = if edf < n { n * rss / (n - edf).powi(2) } else { f64::INFINITY };
        Ok(Solution {
            beta,
            edf,
            gcv,
            trace_diag,
            penalized_rss: rss + pen,
        })
    }
}

fn golden_section(f: &mut impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { c } else { d })
}

pub fn fit_gam(x: &FeatureMatrix, y: &[f64], config: &GamConfig) -> Result<GamFit> {
    let n = x.n_rows();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("response contains non-finite values".into()));
    }
    let smooth_names: Vec<String> = config.smooth_terms.iter().map(|s| s.column.clone()).collect();
    for (i, s) in smooth_names.iter().enumerate() {
        if x.column(s).is_none() {
            return Err(Error::MissingColumn(s.clone()));
        }
        if smooth_names[..i].contains(s) {
            return Err(Error::InvalidInput(format!("column {s} listed twice as a smooth")));
        }
    }
    let linear_names: Vec<String> = x.column_names().into_iter().filter(|c| !smooth_names.contains(c)).collect();
    let n_coef: usize = 1 + linear_names.len() + config.smooth_terms.iter().map(|s| s.basis_dim).sum::<usize>();
    if n < 10 * n_coef {
        return Err(Error::TooShort {
            required: 10 * n_coef - 1,
            actual: n,
        });
    }
    let linear = x.select_columns(&linear_names)?;
    let bad = collinear_columns(&linear);
    if !bad.is_empty() {
        return Err(Error::RankDeficient { columns: bad });
    }

    // centered, RMS-scaled design; the intercept decouples
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut lin_means = Vec::new();
    let mut lin_scales = Vec::new();
    for c in linear.columns() {
        let m = mean(&c.values);
        let centered: Vec<f64> = c.values.iter().map(|v| v - m).collect();
        let s = (centered.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        lin_means.push(m);
        lin_scales.push(s);
        cols.push(centered.into_iter().map(|v| v / s).collect());
    }
    let mut blocks = Vec::new();
    for spec in &config.smooth_terms {
        let xs = x.column(&spec.column).unwrap();
        let basis = build_cr_basis(xs, spec.basis_dim)?;
        let raw = basis.design(xs);
        let forced_linear = spec.lambda == Some(f64::INFINITY);
        if let Some(l) = spec.lambda {
            if l.is_nan() || l < 0.0 {
                return Err(Error::InvalidInput(format!("smoothing weight for {} must be >= 0", spec.column)));
            }
        }
        let z = if forced_linear {
            let xm = mean(xs);
            DMatrix::from_iterator(spec.basis_dim, 1, basis.knots().iter().map(|k| k - xm))
        } else {
            let csum: Vec<f64> = (0..spec.basis_dim).map(|j| raw.column(j).sum()).collect();
            null_space(&csum)
        };
        let xz = &raw * &z;
        let scales: Vec<f64> = (0..xz.ncols())
            .map(|j| (xz.column(j).norm_squared() / n as f64).sqrt())
            .collect();
        if scales.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::RankDeficient {
                columns: vec![spec.column.clone()],
            });
        }
        let inv = DMatrix::from_diagonal(&DVector::from_iterator(scales.len(), scales.iter().map(|s| 1.0 / s)));
        let offset = cols.len();
        for j in 0..xz.ncols() {
            cols.push(xz.column(j).iter().map(|v| v / scales[j]).collect());
        }
        let penalty = if forced_linear {
            None
        } else {
            let s = &inv * z.transpose() * basis.penalty() * &z * &inv;
            Some(s)
        };
        blocks.push(Block {
            spec: spec.clone(),
            basis,
            to_knots: &z * &inv,
            offset,
            width: xz.ncols(),
            penalty,
        });
    }
    let p = cols.len();
    let design = DMatrix::from_fn(n, p, |i, j| cols[j][i]);
    drop(cols);
    let y_mean = mean(y);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let gram = design.tr_mul(&design);
    let xty = design.tr_mul(&yc);
    for b in &mut blocks {
        if let Some(s) = &b.penalty {
            let g = gram.view((b.offset, b.offset), (b.width, b.width));
            let ratio = g.norm() / s.norm();
            b.penalty = Some(s * ratio);
        }
    }
    let problem = Problem {
        n,
        gram,
        xty,
        yty: yc.norm_squared(),
        blocks,
    };

    let free: Vec<usize> = (0..problem.blocks.len())
        .filter(|&i| problem.blocks[i].spec.lambda.is_none())
        .collect();
    let mut lambdas: Vec<f64> = problem
        .blocks
        .iter()
        .map(|b| match b.spec.lambda {
            Some(l) if l.is_finite() => l,
            Some(_) => 0.0,
            None => 1.0,
        })
        .collect();
    let mut grid_fallback = false;
    for _cycle in 0..6 {
        let mut moved = false;
        for &s in &free {
            let old = lambdas[s].ln();
            let mut gcv_at = |rho: f64| -> Result<f64> {
                let mut l = lambdas.clone();
                l[s] = rho.exp();
                Ok(problem.solve(&l)?.gcv)
            };
            let (lo, hi) = LOG_LAMBDA_RANGE;
            let mut best = (f64::INFINITY, lo);
            for r in lo..=hi {
                let g = gcv_at(f64::from(r))?;
                if g < best.0 {
                    best = (g, r);
                }
            }
            let rho = if best.1 == lo || best.1 == hi {
                grid_fallback = true;
                log::debug!("GCV for {} has no interior minimum; using ln λ = {}", problem.blocks[s].spec.column, best.1);
                f64::from(best.1)
            } else {
                let c = f64::from(best.1);
                let r = golden_section(&mut gcv_at, c - 1.0, c + 1.0, 1e-4)?;
                if gcv_at(r)? <= best.0 { r } else { c }
            };
            if (rho - old).abs() > 1e-3 {
                moved = true;
            }
            lambdas[s] = rho.exp();
        }
        if !moved || free.len() < 2 {
            break;
        }
    }
    let sol = problem.solve(&lambdas)?;

    let n_lin = linear_names.len();
    let linear_betas: Vec<f64> = (0..n_lin).map(|j| sol.beta[j] / lin_scales[j]).collect();
    let alpha = y_mean - linear_betas.iter().zip(&lin_means).map(|(b, m)| b * m).sum::<f64>();
    let smooths = problem
        .blocks
        .iter()
        .zip(&lambdas)
        .map(|(b, &l)| {
            let coef = &b.to_knots * sol.beta.rows(b.offset, b.width);
            SmoothFit {
                column: b.spec.column.clone(),
                basis: b.basis.clone(),
                coefficients: coef.iter().copied().collect(),
                lambda: if b.penalty.is_none() { f64::INFINITY } else { l },
                edf: sol.trace_diag[b.offset..b.offset + b.width].iter().sum::<f64>() + 1.0,
            }
        })
        .collect();
    let mut fit = GamFit {
        alpha,
        linear_names,
        linear_betas,
        smooths,
        fitted: Vec::new(),
        residuals: Vec::new(),
        edf: sol.edf,
        rss: 0.0,
        r2: 0.0,
        adj_r2: 0.0,
        gcv: sol.gcv,
        penalized_rss: sol.penalized_rss,
        grid_fallback,
        n_obs: n,
    };
    fit.fitted = predict_gam(&fit, x)?;
    fit.residuals = y.iter().zip(&fit.fitted).map(|(a, b)| a - b).collect();
    fit.rss = fit.residuals.iter().map(|r| r * r).sum();
    let tss = problem.yty;
    fit.r2 = if tss > 0.0 { 1.0 - fit.rss / tss } else { 1.0 };
    fit.adj_r2 = adjusted_r2(fit.r2, n, fit.edf - 1.0);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::fit_ols;
    use chrono::NaiveDate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal, Uniform};
    use std::f64::consts::PI;

    fn t0() -> chrono::NaiveDateTime {
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    fn matrix(cols: Vec<(&str, Vec<f64>)>) -> FeatureMatrix {
        FeatureMatrix::from_named(t0(), cols.into_iter().map(|(n, v)| (n.to_string(), v)).collect()).unwrap()
    }

    fn sine_data(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Uniform::new(0.0, 1.0).unwrap();
        let e = Normal::new(0.0, 0.1).unwrap();
        let x: Vec<f64> = (0..n).map(|_| u.sample(&mut rng)).collect();
        let y = x.iter().map(|&v| (2.0 * PI * v).sin() + e.sample(&mut rng)).collect();
        (x, y)
    }

    #[test]
    fn null_space_is_orthogonal() {
        let c = [3.0, -1.0, 2.0, 0.5];
        let z = null_space(&c);
        assert_eq!(z.shape(), (4, 3));
        for j in 0..3 {
            let d: f64 = (0..4).map(|i| c[i] * z[(i, j)]).sum();
            assert!(d.abs() < 1e-12);
        }
        let ztz = z.transpose() * &z;
        assert!((ztz - DMatrix::<f64>::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn recovers_sine() {
        let (x, y) = sine_data(2000, 5);
        let fit = fit_gam(&matrix(vec![(TEMPERATURE, x)]), &y, &GamConfig::gam1()).unwrap();
        let grid: Vec<f64> = (0..=200).map(|i| 0.005 + 0.99 * i as f64 / 200.0).collect();
        let pred = predict_gam(&fit, &matrix(vec![(TEMPERATURE, grid.clone())])).unwrap();
        let rmse = (grid
            .iter()
            .zip(&pred)
            .map(|(g, p)| (p - (2.0 * PI * g).sin()).powi(2))
            .sum::<f64>()
            / grid.len() as f64)
            .sqrt();
        assert!(rmse < 0.05, "rmse {rmse}");
        let s = &fit.smooths[0];
        assert!(s.edf >= 2.0 && s.edf <= 10.0, "edf {}", s.edf);
        assert!(!fit.grid_fallback);
    }

    #[test]
    fn empty_smooth_set_is_ols() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = Normal::new(0.0, 1.0).unwrap();
        let a: Vec<f64> = (0..300).map(|i| i as f64 + e.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..300).map(|_| 20.0 + e.sample(&mut rng)).collect();
        let y: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 1.0 + 0.01 * p - 0.5 * q + e.sample(&mut rng)).collect();
        let x = matrix(vec![("a", a), ("b", b)]);
        let gam = fit_gam(&x, &y, &GamConfig::default()).unwrap();
        let ols = fit_ols(&x, &y).unwrap();
        assert!((gam.alpha - ols.alpha).abs() < 1e-10);
        for (g, o) in gam.linear_betas.iter().zip(&ols.betas) {
            assert!((g - o).abs() < 1e-10);
        }
        assert!((gam.adj_r2 - ols.adj_r2).abs() < 1e-10);
    }

    #[test]
    fn infinite_penalty_is_exactly_linear() {
        let (x, y) = sine_data(1000, 6);
        let mut cfg = GamConfig::gam1();
        cfg.smooth_terms[0].lambda = Some(f64::INFINITY);
        let fit = fit_gam(&matrix(vec![(TEMPERATURE, x.clone())]), &y, &cfg).unwrap();
        let s = &fit.smooths[0];
        assert!(s.basis.quadratic_penalty(&s.coefficients).abs() < 1e-10);
        let pts = [-1.0, 0.0, 0.3, 0.9, 2.5];
        let f: Vec<f64> = pts.iter().map(|&p| s.basis.value(&s.coefficients, p)).collect();
        let slope = (f[1] - f[0]) / 1.0;
        for (p, v) in pts.iter().zip(&f) {
            assert!((v - (f[1] + slope * p)).abs() < 1e-10);
        }
        assert!((s.edf - 2.0).abs() < 1e-8);
        // and it matches the OLS line
        let ols = fit_ols(&matrix(vec![(TEMPERATURE, x)]), &y).unwrap();
        assert!((slope - ols.betas[0]).abs() < 1e-8);
    }

    #[test]
    fn smooth_contribution_is_centered() {
        let (x, y) = sine_data(1000, 7);
        let xs: Vec<f64> = x.iter().map(|v| 30.0 * v - 5.0).collect();
        let fit = fit_gam(&matrix(vec![(TEMPERATURE, xs.clone())]), &y, &GamConfig::gam1()).unwrap();
        let c = fit.smooth_contribution(TEMPERATURE, &xs).unwrap();
        assert!(mean(&c).abs() < 1e-8);
        let pred = predict_gam(&fit, &matrix(vec![(TEMPERATURE, xs)])).unwrap();
        assert_eq!(pred, fit.fitted);
        for ((f, r), v) in fit.fitted.iter().zip(&fit.residuals).zip(&y) {
            assert!((f + r - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn gcv_minimum_matches_grid_scan() {
        let (x, y) = sine_data(800, 8);
        let xm = matrix(vec![(TEMPERATURE, x)]);
        let fit = fit_gam(&xm, &y, &GamConfig::gam1()).unwrap();
        let chosen = fit.smooths[0].lambda.ln();
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=160 {
            let rho = -8.0 + 0.1 * i as f64;
            let mut cfg = GamConfig::gam1();
            cfg.smooth_terms[0].lambda = Some(rho.exp());
            let g = fit_gam(&xm, &y, &cfg).unwrap().gcv;
            if g < best.0 {
                best = (g, rho);
            }
        }
        assert!((best.1 - chosen).abs() <= 0.1 + 1e-9, "grid {} vs chosen {}", best.1, chosen);
        assert!(fit.gcv <= best.0 + 1e-12 * best.0);
    }

    #[test]
    fn penalized_optimum_beats_linear_start() {
        let (x, y) = sine_data(600, 10);
        let xm = matrix(vec![(TEMPERATURE, x.clone())]);
        let fit = fit_gam(&xm, &y, &GamConfig::gam1()).unwrap();
        // start: intercept only, smooth coefficients zero
        let m = mean(&y);
        let start: f64 = y.iter().map(|v| (v - m).powi(2)).sum();
        assert!(fit.penalized_rss <= start);
        assert!(fit.r2 > 0.9);
    }

    #[test]
    fn gam2_and_noise_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = Uniform::new(0.0, 1.0).unwrap();
        let e = Normal::new(0.0, 0.1).unwrap();
        let n = 2000;
        let t: Vec<f64> = (0..n).map(|_| u.sample(&mut rng)).collect();
        let o: Vec<f64> = (0..n).map(|_| u.sample(&mut rng)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * t[i]).sin() + o[i].powi(2) + e.sample(&mut rng))
            .collect();
        let base = fit_gam(&matrix(vec![(TEMPERATURE, t.clone()), (OCCUPANCY, o.clone())]), &y, &GamConfig::gam2())
            .unwrap();
        assert_eq!(base.smooths.len(), 2);
        for s in &base.smooths {
            assert!((2.0..=10.0).contains(&s.edf));
        }
        let noise: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| e.sample(&mut rng)).collect()).collect();
        let with_noise = fit_gam(
            &matrix(vec![
                (TEMPERATURE, t),
                (OCCUPANCY, o),
                ("n1", noise[0].clone()),
                ("n2", noise[1].clone()),
                ("n3", noise[2].clone()),
            ]),
            &y,
            &GamConfig::gam2(),
        )
        .unwrap();
        assert!(with_noise.adj_r2 - base.adj_r2 <= 0.01);
    }

    #[test]
    fn errors() {
        let (x, y) = sine_data(200, 1);
        let xm = matrix(vec![(TEMPERATURE, x)]);
        assert!(matches!(fit_gam(&xm, &y, &GamConfig::gam2()), Err(Error::MissingColumn(_))));
        assert!(matches!(fit_gam(&xm, &y[..150], &GamConfig::gam1()), Err(Error::LengthMismatch { .. })));
        let fit = fit_gam(&xm, &y, &GamConfig::gam1()).unwrap();
        assert!(predict_gam(&fit, &matrix(vec![("other", vec![1.0])])).is_err());
        assert!(matches!(fit_gam(&xm.slice_rows(0..50).unwrap(), &y[..50], &GamConfig::gam1()), Err(Error::TooShort { .. })));
    }
}
