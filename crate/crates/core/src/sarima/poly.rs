//! Lag polynomials and the partial-autocorrelation reparameterization that
//! keeps AR parts stationary and MA parts invertible.

/// Coefficients `c` of `1 - c_1 B - … - c_k B^k` from partial
/// autocorrelations in (-1, 1), by the Levinson recursion.
pub fn pacf_to_ar(r: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(r.len());
    for (k, &rk) in r.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - rk * prev[k - 1 - j];
        }
        phi.push(rk);
    }
    phi
}

/// Inverse of [`pacf_to_ar`] (step-down recursion). `None` when the
/// polynomial is not stationary.
pub fn ar_to_pacf(phi: &[f64]) -> Option<Vec<f64>> {
    let mut a = phi.to_vec();
    let mut r = vec![0.0; phi.len()];
    for k in (0..phi.len()).rev() {
        let rk = a[k];
        if !(rk.abs() < 1.0) {
            return None;
        }
        r[k] = rk;
        let denom = 1.0 - rk * rk;
        let prev: Vec<f64> = (0..k).map(|j| (a[j] + rk * a[k - 1 - j]) / denom).collect();
        a = prev;
    }
    Some(r)
}

pub fn is_stationary(phi: &[f64]) -> bool {
    ar_to_pacf(phi).is_some()
}

/// `1 + θ_1 B + …` is invertible exactly when `1 - (-θ_1) B - …` is
/// stationary.
pub fn is_invertible(theta: &[f64]) -> bool {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    is_stationary(&neg)
}

/// Unconstrained value to AR coefficients.
pub fn transform_ar(u: &[f64]) -> Vec<f64> {
    let r: Vec<f64> = u.iter().map(|v| v.tanh()).collect();
    pacf_to_ar(&r)
}

pub fn transform_ma(u: &[f64]) -> Vec<f64> {
    transform_ar(u).into_iter().map(|v| -v).collect()
}

/// AR coefficients to unconstrained values; non-stationary input is shrunk
/// towards zero first.
pub fn untransform_ar(phi: &[f64]) -> Vec<f64> {
    let mut c = phi.to_vec();
    for _ in 0..60 {
        if let Some(r) = ar_to_pacf(&c) {
            if r.iter().all(|v| v.abs() < 0.99) {
                return r.iter().map(|v| v.atanh()).collect();
            }
        }
        c.iter_mut().for_each(|v| *v *= 0.8);
    }
    vec![0.0; phi.len()]
}

pub fn untransform_ma(theta: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    untransform_ar(&neg)
}

/// Sparse expansion of `(1 - Σ a_i B^i)(1 - Σ s_j B^{jm})` written as
/// `1 - Σ c_k B^k`; returns the nonzero `(k, c_k)`.
pub fn expand_ar(ar: &[f64], sar: &[f64], m: usize) -> Vec<(usize, f64)> {
    // product polynomial with unit leading term
    let mut poly = vec![0.0; ar.len() + sar.len() * m + 1];
    for (i, a) in std::iter::once(1.0).chain(ar.iter().map(|v| -v)).enumerate() {
        for (j, s) in std::iter::once(1.0).chain(sar.iter().map(|v| -v)).enumerate() {
            poly[i + j * m] += a * s;
        }
    }
    poly.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| **c != 0.0)
        .map(|(k, c)| (k, -c))
        .collect()
}

/// Sparse expansion of `(1 + Σ θ_i B^i)(1 + Σ Θ_j B^{jm})` as `1 + Σ c_k B^k`.
pub fn expand_ma(ma: &[f64], sma: &[f64], m: usize) -> Vec<(usize, f64)> {
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    expand_ar(&neg(ma), &neg(sma), m)
        .into_iter()
        .map(|(k, c)| (k, -c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ar2_round_trip() {
        let phi = [0.5, 0.3];
        let r = ar_to_pacf(&phi).unwrap();
        let back = pacf_to_ar(&r);
        assert!((back[0] - 0.5).abs() < 1e-14 && (back[1] - 0.3).abs() < 1e-14);
        assert!(!is_stationary(&[1.2]));
        assert!(!is_stationary(&[0.5, 0.6]));
        assert!(is_invertible(&[0.5]));
        assert!(!is_invertible(&[-1.5]));
    }

    #[test]
    fn expansion() {
        // (1 - 0.5B)(1 - 0.6B^3) = 1 - 0.5B - 0.6B^3 + 0.3B^4
        let e = expand_ar(&[0.5], &[0.6], 3);
        assert_eq!(e, vec![(1, 0.5), (3, 0.6), (4, -0.3)]);
        // (1 + 0.4B)(1 + 0.2B^2) = 1 + 0.4B + 0.2B^2 + 0.08B^3
        let e = expand_ma(&[0.4], &[0.2], 2);
        assert_eq!(e.len(), 3);
        assert!((e[2].1 - 0.08).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn transformed_polynomials_are_valid(u in proptest::collection::vec(-4.0f64..4.0, 1..6)) {
            prop_assert!(is_stationary(&transform_ar(&u)));
            prop_assert!(is_invertible(&transform_ma(&u)));
            let back = untransform_ar(&transform_ar(&u));
            if u.iter().all(|v| v.tanh().abs() < 0.99) {
                for (a, b) in u.iter().zip(&back) {
                    prop_assert!((a - b).abs() < 1e-8);
                }
            }
        }
    }
}
