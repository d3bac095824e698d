use std::f64::consts::PI;

use super::{finish, CasimirMethod, CasimirResult, RegularizationConfig};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectrum::find_eigenvalues;

/// Smallest admissible `cutoff * tau_min`; beyond it the neglected part of the
/// spectrum is below `exp(-30)` relative.
pub const MIN_CUTOFF_TAU: f64 = 30.0;

/// Default `cutoff * tau_min` used when the spectrum is computed here.
pub const SPECTRUM_CUTOFF_TAU: f64 = 36.0;

/// Mode sum of a compact graph: solves the spectrum up to `spectrum_k_max`,
/// checks it against the Weyl count and sums it. Also returns the number of
/// eigenvalues used, counted with multiplicity.
pub fn casimir_mode_sum_graph(
    g: &Graph,
    cfg: &RegularizationConfig,
    spectrum_k_max: f64,
    spectrum_tol: f64,
) -> Result<(CasimirResult, usize)> {
    cfg.validate()?;
    let s = find_eigenvalues(g, spectrum_k_max, spectrum_tol)?;
    if s.weyl_deviation > s.weyl_bound {
        return Err(Error::InsufficientSpectrum(format!(
            "Weyl audit failed up to k = {}: deviation {} exceeds {}",
            s.k_max, s.weyl_deviation, s.weyl_bound
        )));
    }
    let eigenvalues = s.with_multiplicity();
    let r = casimir_mode_sum_with_cutoff(&eigenvalues, g.total_length(), spectrum_k_max, cfg)?;
    Ok((r, eigenvalues.len()))
}

/// Mode sum over a spectrum assumed complete up to half a mean level spacing
/// above its largest entry.
pub fn casimir_mode_sum(
    eigenvalues: &[f64],
    total_len: f64,
    cfg: &RegularizationConfig,
) -> Result<CasimirResult> {
    let last = eigenvalues
        .last()
        .copied()
        .ok_or_else(|| Error::InsufficientSpectrum("empty eigenvalue list".into()))?;
    casimir_mode_sum_with_cutoff(eigenvalues, total_len, last + 0.5 * PI / total_len, cfg)
}

/// Mode sum over a spectrum complete on `(0, cutoff]`, eigenvalues repeated
/// by multiplicity:
/// ```text
/// E(tau) = 1/2 sum k_n exp(-k_n tau) - L/(2 pi) int_0^cutoff k exp(-k tau) dk
/// ```
/// The Weyl term is cut where the spectrum is, so that the tail beyond the
/// cutoff cancels to leading order. The reported `tau^-2` coefficient has
/// `L / (2 pi)` added back, i.e. it is that of the bare half-sum.
pub fn casimir_mode_sum_with_cutoff(
    eigenvalues: &[f64],
    total_len: f64,
    cutoff: f64,
    cfg: &RegularizationConfig,
) -> Result<CasimirResult> {
    cfg.validate()?;
    if eigenvalues.is_empty() {
        return Err(Error::InsufficientSpectrum("empty eigenvalue list".into()));
    }
    if !(total_len > 0.0 && total_len.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "total length must be positive, got {total_len}"
        )));
    }
    if eigenvalues.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
        return Err(Error::InvalidArgument(
            "eigenvalues must be positive and finite".into(),
        ));
    }
    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("eigenvalues must be sorted".into()));
    }
    let last = eigenvalues[eigenvalues.len() - 1];
    if !(cutoff >= last) {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff} lies below the largest eigenvalue {last}"
        )));
    }
    let tau_min = cfg.tau_min();
    if cutoff * tau_min < MIN_CUTOFF_TAU {
        return Err(Error::InsufficientSpectrum(format!(
            "spectrum up to k = {cutoff} is too short for tau = {tau_min}; need k >= {}",
            MIN_CUTOFF_TAU / tau_min
        )));
    }

    let weyl = total_len / (2.0 * PI);
    let mut samples = Vec::with_capacity(cfg.tau_values.len());
    let mut errors = Vec::with_capacity(cfg.tau_values.len());
    for &tau in &cfg.tau_values {
        // Summed from the top so the small terms accumulate first.
        let half_sum: f64 = 0.5
            * eigenvalues
                .iter()
                .rev()
                .map(|k| k * (-k * tau).exp())
                .sum::<f64>();
        let x = cutoff * tau;
        let truncated = -(-x).exp_m1() - x * (-x).exp();
        let energy = half_sum - weyl * truncated / (tau * tau);
        samples.push((tau, energy));
        // Level-count fluctuations at the cutoff stay O(1); their weight is the
        // last included term.
        errors.push(cutoff * (-x).exp() + eigenvalues.len() as f64 * f64::EPSILON * half_sum.abs());
    }

    let mut result = finish(samples, &errors, cfg, CasimirMethod::ModeSum, total_len)?;
    result.fit_coefficients[0] += weyl;
    result.spectral_cutoff = Some(cutoff);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> RegularizationConfig {
        RegularizationConfig::default()
    }

    fn ladder(spacing: f64, cutoff: f64) -> Vec<f64> {
        (1..)
            .map(|n| n as f64 * spacing)
            .take_while(|&k| k <= cutoff)
            .collect()
    }

    #[test]
    fn interval_oracle() {
        for ell in [0.5, 1.0, 2.0] {
            let cutoff = 40.0 / cfg().tau_min();
            let r = casimir_mode_sum_with_cutoff(&ladder(PI / ell, cutoff), ell, cutoff, &cfg())
                .unwrap();
            assert_relative_eq!(r.energy, -PI / (24.0 * ell), max_relative = 1e-8);
            assert_relative_eq!(
                r.divergence_coefficient(),
                ell / (2.0 * PI),
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn default_cutoff() {
        let eigs = ladder(PI, 40.0 / cfg().tau_min());
        let r = casimir_mode_sum(&eigs, 1.0, &cfg()).unwrap();
        assert_relative_eq!(r.energy, -PI / 24.0, max_relative = 1e-8);
    }

    #[test]
    fn star_oracle() {
        // {n pi} twice and {(n + 1/2) pi} once.
        let cutoff = 40.0 / cfg().tau_min();
        let mut eigs: Vec<f64> = ladder(PI, cutoff)
            .into_iter()
            .flat_map(|k| [k, k])
            .collect();
        eigs.extend(ladder(PI, cutoff).iter().map(|k| k - 0.5 * PI));
        eigs.sort_by(f64::total_cmp);
        let r = casimir_mode_sum_with_cutoff(&eigs, 3.0, cutoff, &cfg()).unwrap();
        assert_relative_eq!(r.energy, -PI / 16.0, max_relative = 1e-8);
        assert_relative_eq!(
            r.divergence_coefficient(),
            3.0 / (2.0 * PI),
            max_relative = 1e-6
        );
    }

    #[test]
    fn insufficient_spectrum() {
        assert!(matches!(
            casimir_mode_sum(&[], 1.0, &cfg()),
            Err(Error::InsufficientSpectrum(_))
        ));
        let eigs = ladder(PI, 100.0);
        assert!(matches!(
            casimir_mode_sum(&eigs, 1.0, &cfg()),
            Err(Error::InsufficientSpectrum(_))
        ));
    }

    #[test]
    fn malformed_spectrum() {
        assert!(casimir_mode_sum(&[2.0, 1.0], 1.0, &cfg()).is_err());
        assert!(casimir_mode_sum(&[-1.0], 1.0, &cfg()).is_err());
        assert!(casimir_mode_sum(&[1.0], 0.0, &cfg()).is_err());
    }
}
