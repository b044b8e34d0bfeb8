//! Cubic regression spline basis parameterized by function values at the
//! knots, with the exact integrated-squared-second-derivative penalty.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KnotList", into = "KnotList")]
pub struct CrBasis {
    knots: Vec<f64>,
    /// Maps knot values to second derivatives at the knots (natural ends).
    f: DMatrix<f64>,
    penalty: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct KnotList {
    knots: Vec<f64>,
}

impl TryFrom<KnotList> for CrBasis {
    type Error = Error;

    fn try_from(k: KnotList) -> Result<Self> {
        CrBasis::from_knots(k.knots)
    }
}

impl From<CrBasis> for KnotList {
    fn from(b: CrBasis) -> Self {
        KnotList { knots: b.knots }
    }
}

/// Knots at `k` evenly spaced quantiles of the distinct values of `x`.
pub fn build_cr_basis(x: &[f64], k: usize) -> Result<CrBasis> {
    if k < 4 {
        return Err(Error::InvalidInput(format!("basis dimension must be at least 4, got {k}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("spline covariate has non-finite values".into()));
    }
    let mut u = x.to_vec();
    u.sort_by(f64::total_cmp);
    u.dedup();
    if u.len() < k {
        return Err(Error::InvalidInput(format!(
            "need at least {k} distinct covariate values for the spline basis, got {}",
            u.len()
        )));
    }
    let last = (u.len() - 1) as f64;
    let knots = (0..k)
        .map(|i| {
            let pos = last * i as f64 / (k - 1) as f64;
            let lo = pos.floor() as usize;
            let frac = pos - lo as f64;
            if frac == 0.0 {
                u[lo]
            } else {
                u[lo] + frac * (u[lo + 1] - u[lo])
            }
        })
        .collect();
    CrBasis::from_knots(knots)
}

impl CrBasis {
    pub fn from_knots(knots: Vec<f64>) -> Result<Self> {
        let k = knots.len();
        if k < 4 {
            return Err(Error::InvalidInput(format!("need at least 4 knots, got {k}")));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) || knots.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("knots must be finite and strictly increasing".into()));
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut d = DMatrix::<f64>::zeros(k - 2, k);
        let mut b = DMatrix::<f64>::zeros(k - 2, k - 2);
        for i in 0..k - 2 {
            d[(i, i)] = 1.0 / h[i];
            d[(i, i + 1)] = -1.0 / h[i] - 1.0 / h[i + 1];
            d[(i, i + 2)] = 1.0 / h[i + 1];
            b[(i, i)] = (h[i] + h[i + 1]) / 3.0;
            if i + 1 < k - 2 {
                b[(i, i + 1)] = h[i + 1] / 6.0;
                b[(i + 1, i)] = h[i + 1] / 6.0;
            }
        }
        let chol = b
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("degenerate knot spacing".into()))?;
        let bid = chol.solve(&d);
        let penalty = d.transpose() * &bid;
        let penalty = (&penalty + penalty.transpose()) * 0.5;
        let mut f = DMatrix::<f64>::zeros(k, k);
        f.view_mut((1, 0), (k - 2, k)).copy_from(&bid);
        Ok(Self { knots, f, penalty })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn basis_dim(&self) -> usize {
        self.knots.len()
    }

    /// `βᵀSβ = ∫ f''(x)² dx` over the knot range.
    pub fn penalty(&self) -> &DMatrix<f64> {
        &self.penalty
    }

    /// Row vector `r` with `f(x) = r·β`; linear beyond the boundary knots.
    pub fn evaluate_row(&self, x: f64) -> Vec<f64> {
        let k = self.knots.len();
        let mut row = vec![0.0; k];
        let (lo, hi) = (self.knots[0], self.knots[k - 1]);
        if x < lo {
            let d = self.derivative_row(0, lo);
            for (j, r) in row.iter_mut().enumerate() {
                *r = (x - lo) * d[j];
            }
            row[0] += 1.0;
            return row;
        }
        if x > hi {
            let d = self.derivative_row(k - 2, hi);
            for (j, r) in row.iter_mut().enumerate() {
                *r = (x - hi) * d[j];
            }
            row[k - 1] += 1.0;
            return row;
        }
        let j = self.segment(x);
        let (x0, x1) = (self.knots[j], self.knots[j + 1]);
        let h = x1 - x0;
        let (am, ap) = ((x1 - x) / h, (x - x0) / h);
        let cm = ((x1 - x).powi(3) / h - h * (x1 - x)) / 6.0;
        let cp = ((x - x0).powi(3) / h - h * (x - x0)) / 6.0;
        row[j] += am;
        row[j + 1] += ap;
        for (c, r) in row.iter_mut().enumerate() {
            *r += cm * self.f[(j, c)] + cp * self.f[(j + 1, c)];
        }
        row
    }

    /// Derivative of the interpolant on segment `j`, evaluated at `x`.
    fn derivative_row(&self, j: usize, x: f64) -> Vec<f64> {
        let (x0, x1) = (self.knots[j], self.knots[j + 1]);
        let h = x1 - x0;
        let dcm = (-3.0 * (x1 - x).powi(2) / h + h) / 6.0;
        let dcp = (3.0 * (x - x0).powi(2) / h - h) / 6.0;
        let mut row: Vec<f64> = (0..self.knots.len())
            .map(|c| dcm * self.f[(j, c)] + dcp * self.f[(j + 1, c)])
            .collect();
        row[j] -= 1.0 / h;
        row[j + 1] += 1.0 / h;
        row
    }

    fn segment(&self, x: f64) -> usize {
        let k = self.knots.len();
        match self.knots.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(k - 2),
            Err(i) => (i - 1).min(k - 2),
        }
    }

    pub fn design(&self, x: &[f64]) -> DMatrix<f64> {
        let k = self.knots.len();
        let mut m = DMatrix::<f64>::zeros(x.len(), k);
        for (i, &v) in x.iter().enumerate() {
            for (j, r) in self.evaluate_row(v).into_iter().enumerate() {
                m[(i, j)] = r;
            }
        }
        m
    }

    pub fn value(&self, coefficients: &[f64], x: f64) -> f64 {
        self.evaluate_row(x).iter().zip(coefficients).map(|(a, b)| a * b).sum()
    }

    pub fn quadratic_penalty(&self, coefficients: &[f64]) -> f64 {
        let b = DVector::from_column_slice(coefficients);
        (b.transpose() * &self.penalty * &b)[(0, 0)]
    }
}
