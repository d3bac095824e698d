//! Least-squares removal of the regulator: fit
//! `value(tau) = c_{-2} / tau^2 + c_0 + c_2 tau^2 + ...` and keep `c_0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Singular values below this fraction of the largest make the fit rank deficient.
const RANK_TOLERANCE: f64 = 1e-13;
/// Largest acceptable fit residual relative to `max |value|`.
const RESIDUAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TauFit {
    /// `c_0`, the regulator-free limit.
    pub limit: f64,
    /// Coefficients in the order of `powers`.
    pub coefficients: Vec<f64>,
    /// Exponents of the basis: `-2, 0, 2, 4, ...`.
    pub powers: Vec<i32>,
    /// Largest absolute deviation of the fit from a sample.
    pub residual: f64,
    /// Sensitivity of `limit` to each sample: `limit = sum w_i value_i`.
    pub limit_weights: Vec<f64>,
}

impl TauFit {
    pub fn coefficient(&self, power: i32) -> Option<f64> {
        self.powers
            .iter()
            .position(|&p| p == power)
            .map(|i| self.coefficients[i])
    }
}

/// Basis exponents for a fit with `fit_order + 1` terms.
pub fn basis_powers(fit_order: usize) -> Vec<i32> {
    std::iter::once(-2)
        .chain((0..fit_order as i32).map(|j| 2 * j))
        .collect()
}

fn failure(reason: impl Into<String>, samples: &[(f64, f64)]) -> Error {
    Error::Extrapolation {
        reason: reason.into(),
        samples: samples.to_vec(),
    }
}

/// Fit without the residual check.
pub(crate) fn fit(samples: &[(f64, f64)], fit_order: usize) -> Result<TauFit> {
    if fit_order == 0 {
        return Err(Error::InvalidArgument(
            "fit_order must be at least 1".into(),
        ));
    }
    let powers = basis_powers(fit_order);
    let m = powers.len();
    if samples.len() < m {
        return Err(failure(
            format!(
                "{} samples cannot determine {m} coefficients",
                samples.len()
            ),
            samples,
        ));
    }
    for (i, &(tau, value)) in samples.iter().enumerate() {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(failure(format!("tau must be positive, got {tau}"), samples));
        }
        if !value.is_finite() {
            return Err(failure(
                format!("non-finite sample at tau = {tau}"),
                samples,
            ));
        }
        if samples[..i].iter().any(|&(t, _)| t == tau) {
            return Err(failure(format!("duplicate tau {tau}"), samples));
        }
    }

    let n = samples.len();
    let mut a = DMatrix::from_fn(n, m, |i, j| samples[i].0.powi(powers[j]));
    let scale: Vec<f64> = (0..m).map(|j| a.column(j).norm()).collect();
    for (j, s) in scale.iter().enumerate() {
        a.column_mut(j).unscale_mut(*s);
    }
    let b = DVector::from_iterator(n, samples.iter().map(|s| s.1));

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOLERANCE * smax) {
        return Err(failure(
            format!("rank-deficient fit (condition {:e})", smax / smin),
            samples,
        ));
    }
    let pinv = svd
        .pseudo_inverse(0.0)
        .map_err(|e| failure(e.to_string(), samples))?;
    let scaled = &pinv * &b;
    let coefficients: Vec<f64> = scaled.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let residual = (&a * &scaled - &b).amax();
    let c0 = powers
        .iter()
        .position(|&p| p == 0)
        .expect("basis has a constant");
    let limit_weights = pinv.row(c0).iter().map(|w| w / scale[c0]).collect();

    Ok(TauFit {
        limit: coefficients[c0],
        coefficients,
        powers,
        residual,
        limit_weights,
    })
}

/// Fit the regulated samples and return the `tau -> 0` limit.
pub fn extrapolate_tau(samples: &[(f64, f64)], fit_order: usize) -> Result<TauFit> {
    let result = fit(samples, fit_order)?;
    let size = samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
    if result.residual > RESIDUAL_TOLERANCE * size {
        return Err(failure(
            format!(
                "fit residual {:e} exceeds {RESIDUAL_TOLERANCE:e} of max |value| {size:e}",
                result.residual
            ),
            samples,
        ));
    }
    Ok(result)
}
