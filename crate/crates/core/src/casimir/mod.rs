//! Casimir energies, by two independent routes.
//!
//! * [`casimir_green_method`] integrates the trace of the inhomogeneous part of
//!   the Green function along the positive imaginary `k` axis.
//! * [`casimir_mode_sum`] sums `k_n / 2` over a computed spectrum with an
//!   exponential cutoff and removes the Weyl divergence.
//!
//! Both produce a regulated energy `E(tau)` on a grid of regulator values and
//! hand it to [`extrapolate_tau`] for the `tau -> 0` limit.

mod extrapolate;
mod green;
mod modesum;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::greens::trace_gamma;
use crate::scattering::CompositeAmplitudes;

pub use extrapolate::{basis_powers, extrapolate_tau, TauFit};
pub use green::{
    casimir_green_method, casimir_green_two_vertex, default_kappa_max, TwoVertexConfig,
};
pub use modesum::{
    casimir_mode_sum, casimir_mode_sum_graph, casimir_mode_sum_with_cutoff, MIN_CUTOFF_TAU,
    SPECTRUM_CUTOFF_TAU,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CasimirMethod {
    GreenTrace,
    ModeSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationConfig {
    /// Strictly decreasing regulator values.
    pub tau_values: Vec<f64>,
    pub quadrature_tol: f64,
    /// Upper end of the imaginary-axis integration. `None` picks it from the
    /// bond length and `quadrature_tol`.
    pub kappa_max: Option<f64>,
    /// The fit uses `fit_order + 1` terms: `tau^-2` and `fit_order` even powers from `tau^0`.
    pub fit_order: usize,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        RegularizationConfig {
            tau_values: geometric_taus(0.2, std::f64::consts::FRAC_1_SQRT_2, 8),
            quadrature_tol: 1e-10,
            kappa_max: None,
            fit_order: 5,
        }
    }
}

/// `first, first * ratio, first * ratio^2, ...`
pub fn geometric_taus(first: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| first * ratio.powi(j as i32)).collect()
}

impl RegularizationConfig {
    /// Geometric grid from `tau_max` down to `tau_min`.
    pub fn with_tau_range(tau_max: f64, tau_min: f64, steps: usize) -> Result<Self> {
        if !(tau_min > 0.0 && tau_max > tau_min && tau_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < tau_min < tau_max, got {tau_min} and {tau_max}"
            )));
        }
        if steps < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 3 tau values, got {steps}"
            )));
        }
        let ratio = (tau_min / tau_max).powf(1.0 / (steps - 1) as f64);
        let mut taus = geometric_taus(tau_max, ratio, steps);
        taus[steps - 1] = tau_min;
        Ok(RegularizationConfig {
            tau_values: taus,
            ..Default::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.tau_values.len() < 3 {
            return bad(format!(
                "need at least 3 tau values, got {}",
                self.tau_values.len()
            ));
        }
        if self.tau_values.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad("tau values must be positive and finite".into());
        }
        if self.tau_values.windows(2).any(|w| w[1] >= w[0]) {
            return bad("tau values must be strictly decreasing".into());
        }
        if !(self.quadrature_tol > 0.0 && self.quadrature_tol < 1.0) {
            return bad(format!(
                "quadrature_tol must lie in (0, 1), got {}",
                self.quadrature_tol
            ));
        }
        if let Some(kmax) = self.kappa_max {
            if !(kmax > 0.0 && kmax.is_finite()) {
                return bad(format!("kappa_max must be positive, got {kmax}"));
            }
        }
        if self.fit_order == 0 {
            return bad("fit_order must be at least 1".into());
        }
        if self.tau_values.len() < self.fit_order + 1 {
            return bad(format!(
                "fit_order {} needs at least {} tau values",
                self.fit_order,
                self.fit_order + 1
            ));
        }
        Ok(())
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CasimirResult {
    pub energy: f64,
    /// Fit coefficients in the order of `fit_powers`. For the mode sum the
    /// `tau^-2` entry is that of the unsubtracted half-sum.
    pub fit_coefficients: Vec<f64>,
    pub fit_powers: Vec<i32>,
    /// `(tau, E(tau))` in the order of the configured tau values.
    pub per_tau_samples: Vec<(f64, f64)>,
    pub method: CasimirMethod,
    pub estimated_error: f64,
    pub fit_residual: f64,
    pub total_length: f64,
    pub fit_order: usize,
    pub quadrature_tol: Option<f64>,
    /// Imaginary-axis truncation actually used (Green method).
    pub kappa_max: Option<f64>,
    /// Spectral cutoff of the Weyl subtraction (mode sum).
    pub spectral_cutoff: Option<f64>,
}

impl CasimirResult {
    /// Fitted coefficient of `1 / tau^2`.
    pub fn divergence_coefficient(&self) -> f64 {
        self.fit_coefficients[0]
    }
}

/// Extrapolate and estimate the error of the limit from the change against a
/// fit one order lower plus the propagated per-sample errors.
pub(crate) fn finish(
    samples: Vec<(f64, f64)>,
    sample_errors: &[f64],
    cfg: &RegularizationConfig,
    method: CasimirMethod,
    total_length: f64,
) -> Result<CasimirResult> {
    let fit = extrapolate_tau(&samples, cfg.fit_order)?;
    let mut estimated_error: f64 = fit
        .limit_weights
        .iter()
        .zip(sample_errors)
        .map(|(w, e)| w.abs() * e)
        .sum();
    if cfg.fit_order >= 2 {
        if let Ok(lower) = extrapolate::fit(&samples, cfg.fit_order - 1) {
            estimated_error += (fit.limit - lower.limit).abs();
        }
    }
    let rounding: f64 = fit
        .limit_weights
        .iter()
        .zip(&samples)
        .map(|(w, s)| (w * s.1).abs())
        .sum::<f64>()
        * 4.0
        * f64::EPSILON;
    estimated_error += rounding;

    Ok(CasimirResult {
        energy: fit.limit,
        fit_coefficients: fit.coefficients,
        fit_powers: fit.powers,
        per_tau_samples: samples,
        method,
        estimated_error,
        fit_residual: fit.residual,
        total_length,
        fit_order: cfg.fit_order,
        quadrature_tol: None,
        kappa_max: None,
        spectral_cutoff: None,
    })
}

/// The regulated trace integrand of the two-vertex graph,
/// ```text
/// (trace_gamma(k) - ell / (2ik) - R / (2k^2)) exp(ik tau),
/// ```
/// with the free-line and the surface term removed. What remains vanishes
/// when `S = R = 0` and decays like `ell exp(-2 kappa ell) / kappa` at
/// `k = i kappa`.
pub fn casimir_integrand(k: Complex64, tau: f64, ca: &CompositeAmplitudes) -> Result<Complex64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tau must be non-negative, got {tau}"
        )));
    }
    let trace = trace_gamma(k, ca)?;
    let free = ca.ell / (2.0 * I * k);
    let surface = ca.r_big / (2.0 * k * k);
    Ok((trace - free - surface) * (I * k * tau).exp())
}
