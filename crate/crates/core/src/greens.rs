//! Exact Green functions of the free line, the open star and the two-vertex
//! graph, the bond wavefunction built from vertex values, and the closed-form
//! diagonal trace of the two-vertex Green function.
//!
//! All Green functions solve `G'' + k^2 G = delta(x - x')` and are normalized
//! so that the free kernel is `exp(ik|x - x'|) / (2ik)`; the derivative jump
//! across the source is 1.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scattering::{CompositeAmplitudes, VertexSMatrix};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Resonance tolerance on `|sin kL|` for [`bond_wavefunction`].
pub const RESONANCE_TOLERANCE: f64 = 1e-12;

/// A Green function value split into its free part and the inhomogeneous
/// remainder, `total = free_part + gamma_part`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenDecomposition {
    pub total: Complex64,
    pub free_part: Complex64,
    pub gamma_part: Complex64,
    pub k: Complex64,
    pub x_initial: f64,
    pub x_final: f64,
}

impl GreenDecomposition {
    fn from_total(
        total: Complex64,
        free_part: Complex64,
        k: Complex64,
        x_i: f64,
        x_f: f64,
    ) -> Self {
        GreenDecomposition {
            total,
            free_part,
            gamma_part: total - free_part,
            k,
            x_initial: x_i,
            x_final: x_f,
        }
    }
}

fn nonzero(k: Complex64) -> Result<()> {
    if k == Complex64::new(0.0, 0.0) {
        Err(Error::SingularWavenumber("Green function needs k != 0"))
    } else {
        Ok(())
    }
}

pub fn free_green(k: Complex64, x_i: f64, x_f: f64) -> Result<Complex64> {
    nonzero(k)?;
    Ok((I * k * (x_f - x_i).abs()).exp() / (2.0 * I * k))
}

/// Green function between leads `n` and `l` of an open star whose vertex has
/// scattering matrix `s`; coordinates run outward from the vertex.
pub fn star_green(
    n: usize,
    l: usize,
    k: Complex64,
    x_i: f64,
    x_f: f64,
    s: &VertexSMatrix,
) -> Result<GreenDecomposition> {
    nonzero(k)?;
    let s_nl = s.get(n, l).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "lead indices ({n}, {l}) out of range for a {}-lead star",
            s.dim
        ))
    })?;
    if !(x_i >= 0.0 && x_f >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lead coordinates must be non-negative, got x_i = {x_i}, x_f = {x_f}"
        )));
    }
    let free = if n == l {
        free_green(k, x_i, x_f)?
    } else {
        Complex64::new(0.0, 0.0)
    };
    let scattered = s_nl * (I * k * (x_f + x_i)).exp() / (2.0 * I * k);
    Ok(GreenDecomposition::from_total(
        free + scattered,
        free,
        k,
        x_i,
        x_f,
    ))
}

/// Green function on the bond `[0, ell]` of the two-vertex graph.
///
/// The direct and the once-around terms depend on `|x_f - x_i|`, which makes
/// the result reciprocal in `(x_i, x_f)`. For `x_f >= x_i` this coincides
/// with [`two_vertex_green_as_written`].
pub fn two_vertex_green(
    k: Complex64,
    x_i: f64,
    x_f: f64,
    ca: &CompositeAmplitudes,
) -> Result<GreenDecomposition> {
    two_vertex(k, x_i, x_f, ca, (x_f - x_i).abs())
}

/// The same four-term expression with the signed separation `x_f - x_i` in
/// the exponents. Only valid for `x_f >= x_i`; kept for comparison.
pub fn two_vertex_green_as_written(
    k: Complex64,
    x_i: f64,
    x_f: f64,
    ca: &CompositeAmplitudes,
) -> Result<GreenDecomposition> {
    two_vertex(k, x_i, x_f, ca, x_f - x_i)
}

fn two_vertex(
    k: Complex64,
    x_i: f64,
    x_f: f64,
    ca: &CompositeAmplitudes,
    separation: f64,
) -> Result<GreenDecomposition> {
    nonzero(k)?;
    let ell = ca.ell;
    for x in [x_i, x_f] {
        if !(0.0..=ell).contains(&x) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {x} outside the bond [0, {ell}]"
            )));
        }
    }
    pole_guard(ca)?;
    let (s, r) = (ca.s_big, ca.r_big);
    let phase = |x: f64| (I * k * x).exp();
    let e = phase(ell);
    let bracket = (1.0 - s * e) * phase(separation)
        + r * phase(x_f + x_i)
        + (s + (r * r - s * s) * e) * phase(ell - separation)
        + r * phase(2.0 * ell - x_f - x_i);
    let total = bracket / (2.0 * I * k * ca.g);
    Ok(GreenDecomposition::from_total(
        total,
        free_green(k, x_i, x_f)?,
        k,
        x_i,
        x_f,
    ))
}

fn pole_guard(ca: &CompositeAmplitudes) -> Result<()> {
    if ca.g.norm() == 0.0 || !ca.g.is_finite() {
        Err(Error::PoleProximity {
            magnitude: ca.f.norm(),
        })
    } else {
        Ok(())
    }
}

/// Bond wavefunction with vertex values `phi_i` at `x = 0` and `phi_j` at
/// `x = length` (zero magnetic potential).
pub fn bond_wavefunction(
    phi_i: Complex64,
    phi_j: Complex64,
    k: f64,
    length: f64,
    x: f64,
) -> Result<Complex64> {
    if !(0.0..=length).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "coordinate {x} outside the bond [0, {length}]"
        )));
    }
    let denom = (k * length).sin();
    if denom.abs() < RESONANCE_TOLERANCE {
        return Err(Error::ResonantBond {
            k,
            magnitude: denom.abs(),
        });
    }
    Ok((phi_i * (k * (length - x)).sin() + phi_j * (k * x).sin()) / denom)
}

/// Closed-form `integral_0^ell G(x, x) dx` of the two-vertex Green function:
/// ```text
/// -[(1 + (R^2 - S^2) e^{2ik ell}) ik ell + (e^{2ik ell} - 1) R] / (2 k^2 g)
/// ```
/// This includes the free-line contribution `ell / (2ik)`.
pub fn trace_gamma(k: Complex64, ca: &CompositeAmplitudes) -> Result<Complex64> {
    nonzero(k)?;
    pole_guard(ca)?;
    let ell = ca.ell;
    let e2 = (2.0 * I * k * ell).exp();
    let (s, r) = (ca.s_big, ca.r_big);
    let numer = (1.0 + (r * r - s * s) * e2) * I * k * ell + (e2 - 1.0) * r;
    Ok(-numer / (2.0 * k * k * ca.g))
}
