//! Serialized shapes of the command outputs. Field order is the output order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::casimir::{CasimirMethod, CasimirResult};
use crate::greens::GreenDecomposition;
use crate::numfmt;
use crate::spectrum::SpectrumResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest<P> {
    pub command: String,
    pub graph_path: String,
    pub graph_sha256: String,
    pub parameters: P,
    pub tool_version: String,
}

#[derive(Debug, Serialize)]
pub struct ComplexJson {
    #[serde(serialize_with = "numfmt::serialize")]
    pub re: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

#[derive(Debug, Serialize)]
pub struct WeylAudit {
    #[serde(serialize_with = "numfmt::serialize")]
    pub k_max: f64,
    pub counted: usize,
    #[serde(serialize_with = "numfmt::serialize")]
    pub expected: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub max_deviation: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct SpectrumOutput<M> {
    pub manifest: M,
    #[serde(serialize_with = "numfmt::serialize_vec")]
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    #[serde(serialize_with = "numfmt::serialize_vec")]
    pub residuals: Vec<f64>,
    pub weyl_audit: WeylAudit,
    #[serde(serialize_with = "numfmt::serialize")]
    pub scan_step: f64,
}

impl<M> SpectrumOutput<M> {
    pub fn new(manifest: M, s: &SpectrumResult) -> Self {
        SpectrumOutput {
            manifest,
            eigenvalues: s.eigenvalues.clone(),
            multiplicities: s.multiplicities.clone(),
            residuals: s.residuals.clone(),
            weyl_audit: WeylAudit {
                k_max: s.k_max,
                counted: s.count(),
                expected: s.weyl_expected,
                max_deviation: s.weyl_deviation,
                bound: s.weyl_bound,
                passed: s.weyl_deviation <= s.weyl_bound,
            },
            scan_step: s.scan_step,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TauSample {
    #[serde(serialize_with = "numfmt::serialize")]
    pub tau: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub energy: f64,
}

#[derive(Debug, Serialize)]
pub struct CasimirJson {
    pub method: CasimirMethod,
    #[serde(serialize_with = "numfmt::serialize")]
    pub energy: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub estimated_error: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub divergence_coefficient: f64,
    pub fit_powers: Vec<i32>,
    #[serde(serialize_with = "numfmt::serialize_vec")]
    pub fit_coefficients: Vec<f64>,
    #[serde(serialize_with = "numfmt::serialize")]
    pub fit_residual: f64,
    pub fit_order: usize,
    pub samples: Vec<TauSample>,
    #[serde(serialize_with = "numfmt::serialize")]
    pub total_length: f64,
    #[serde(serialize_with = "numfmt::serialize_opt")]
    pub quadrature_tol: Option<f64>,
    #[serde(serialize_with = "numfmt::serialize_opt")]
    pub kappa_max: Option<f64>,
    #[serde(serialize_with = "numfmt::serialize_opt")]
    pub spectral_cutoff: Option<f64>,
    pub eigenvalue_count: Option<usize>,
}

impl CasimirJson {
    pub fn new(r: &CasimirResult, eigenvalue_count: Option<usize>) -> Self {
        CasimirJson {
            method: r.method,
            energy: r.energy,
            estimated_error: r.estimated_error,
            divergence_coefficient: r.divergence_coefficient(),
            fit_powers: r.fit_powers.clone(),
            fit_coefficients: r.fit_coefficients.clone(),
            fit_residual: r.fit_residual,
            fit_order: r.fit_order,
            samples: r
                .per_tau_samples
                .iter()
                .map(|&(tau, energy)| TauSample { tau, energy })
                .collect(),
            total_length: r.total_length,
            quadrature_tol: r.quadrature_tol,
            kappa_max: r.kappa_max,
            spectral_cutoff: r.spectral_cutoff,
            eigenvalue_count,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CasimirOutput<M> {
    pub manifest: M,
    pub results: Vec<CasimirJson>,
    /// `|green - modesum| / |modesum|` when both ran.
    #[serde(serialize_with = "numfmt::serialize_opt")]
    pub relative_difference: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct GreensOutput<M> {
    pub manifest: M,
    pub topology: &'static str,
    pub k: ComplexJson,
    #[serde(serialize_with = "numfmt::serialize")]
    pub x_initial: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub x_final: f64,
    pub lead_in: Option<usize>,
    pub lead_out: Option<usize>,
    pub total: ComplexJson,
    pub free_part: ComplexJson,
    pub gamma_part: ComplexJson,
}

impl<M> GreensOutput<M> {
    pub fn new(
        manifest: M,
        topology: &'static str,
        leads: Option<(usize, usize)>,
        d: &GreenDecomposition,
    ) -> Self {
        GreensOutput {
            manifest,
            topology,
            k: d.k.into(),
            x_initial: d.x_initial,
            x_final: d.x_final,
            lead_in: leads.map(|l| l.0),
            lead_out: leads.map(|l| l.1),
            total: d.total.into(),
            free_part: d.free_part.into(),
            gamma_part: d.gamma_part.into(),
        }
    }
}

/// JSON text with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("output serialization is infallible");
    bytes.push(b'\n');
    bytes
}
