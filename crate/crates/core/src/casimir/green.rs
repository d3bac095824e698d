use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::{casimir_integrand, finish, CasimirMethod, CasimirResult, RegularizationConfig};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexCoupling};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::scattering::CompositeAmplitudes;

/// A single bond of length `length` with the same scale-free condition at
/// both ends: the configuration the closed-form trace covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoVertexConfig {
    pub length: f64,
    pub coupling: VertexCoupling,
}

impl TwoVertexConfig {
    pub fn new(length: f64, coupling: VertexCoupling) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bond length must be positive, got {length}"
            )));
        }
        if !coupling.is_scale_free() {
            return Err(Error::Unsupported(
                "green method supports Kirchhoff or Dirichlet ends only".into(),
            ));
        }
        Ok(TwoVertexConfig { length, coupling })
    }

    pub fn from_graph(g: &Graph) -> Result<Self> {
        let diagnostics = g.validate();
        if !diagnostics.is_empty() {
            return Err(Error::InvalidGraph(
                diagnostics.iter().map(ToString::to_string).collect(),
            ));
        }
        g.require_zero_potential()?;
        let reducible = g.is_compact() && g.vertices.len() == 2 && g.bonds.len() == 1;
        if !reducible {
            return Err(Error::Unsupported(
                "green method supports two-vertex reduction only".into(),
            ));
        }
        let (a, b) = (g.vertices[0].coupling, g.vertices[1].coupling);
        if a != b {
            return Err(Error::Unsupported(
                "green method needs identical end conditions".into(),
            ));
        }
        Self::new(g.bonds[0].length, a)
    }

    /// Reflection amplitude of either end.
    pub fn end_reflection(&self) -> f64 {
        match self.coupling {
            VertexCoupling::Dirichlet => -1.0,
            _ => 1.0,
        }
    }

    pub fn amplitudes(&self, k: Complex64) -> Result<CompositeAmplitudes> {
        CompositeAmplitudes::reflecting_bond(
            Complex64::new(self.end_reflection(), 0.0),
            self.length,
            k,
        )
    }
}

/// Imaginary-axis truncation. The integrand tail beyond `u / ell` is
/// `exp(-2u)(2u + 1) / (4 pi ell)`; `u` is taken where that drops below
/// `quadrature_tol / 100`, then doubled so that halving it stays converged.
pub fn default_kappa_max(length: f64, quadrature_tol: f64) -> f64 {
    let mut u = 1.0;
    while tail_bound(u) > 1e-2 * quadrature_tol {
        u += 0.25;
    }
    2.0 * u / length
}

fn tail_bound(u: f64) -> f64 {
    (-2.0 * u).exp() * (2.0 * u + 1.0) / (4.0 * PI)
}

pub fn casimir_green_method(g: &Graph, cfg: &RegularizationConfig) -> Result<CasimirResult> {
    casimir_green_two_vertex(&TwoVertexConfig::from_graph(g)?, cfg)
}

/// `E(tau) = (1/pi) int_0^kappa_max kappa^2 Re I(i kappa) cos(kappa tau) dkappa`
/// with `I` the subtracted integrand at `tau = 0`.
pub fn casimir_green_two_vertex(
    tv: &TwoVertexConfig,
    cfg: &RegularizationConfig,
) -> Result<CasimirResult> {
    cfg.validate()?;
    let ell = tv.length;
    let kappa_max = cfg
        .kappa_max
        .unwrap_or_else(|| default_kappa_max(ell, cfg.quadrature_tol));
    let opts = QuadratureOptions {
        abs_tol: 1e-2 * cfg.quadrature_tol / ell,
        rel_tol: cfg.quadrature_tol,
        max_segments: 4000,
    };
    let tail = tail_bound(kappa_max * ell) / ell;

    let per_tau = cfg
        .tau_values
        .par_iter()
        .map(|&tau| {
            let r = integrate(
                |kappa| {
                    let k = Complex64::new(0.0, kappa);
                    let v = casimir_integrand(k, 0.0, &tv.amplitudes(k)?)?;
                    Ok(kappa * kappa * v.re * (kappa * tau).cos())
                },
                0.0,
                kappa_max,
                opts,
            )?;
            Ok(((tau, r.value / PI), r.error_estimate / PI + tail))
        })
        .collect::<Result<Vec<_>>>()?;
    let (samples, errors): (Vec<_>, Vec<_>) = per_tau.into_iter().unzip();

    let mut result = finish(samples, &errors, cfg, CasimirMethod::GreenTrace, ell)?;
    result.quadrature_tol = Some(cfg.quadrature_tol);
    result.kappa_max = Some(kappa_max);
    Ok(result)
}
