//! Vertex scattering amplitudes and the composite amplitudes of the
//! two-vertex graph.
//!
//! At a vertex of valency `N` with coupling strength `gamma` a wave arriving
//! on one bond is reflected with
//!
//! ```text
//! R = (gamma - (N - 2) i k) / (N i k - gamma)
//! ```
//!
//! and transmitted into each of the other `N - 1` bonds with
//! `T = 2 i k / (N i k - gamma)`. Dirichlet vertices reflect with `R = -1`
//! exactly and transmit nothing.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::VertexCoupling;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance on `|f|` below which an evaluation point is treated as
/// a pole of the composite amplitudes.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Reflection and transmission amplitude at one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RTPair {
    pub r: Complex64,
    pub t: Complex64,
    pub valency: usize,
    pub coupling: VertexCoupling,
    pub k: f64,
}

impl RTPair {
    /// `|R|^2 + (N - 1)|T|^2`, which is 1 on the real axis.
    pub fn flux(&self) -> f64 {
        self.r.norm_sqr() + (self.valency as f64 - 1.0) * self.t.norm_sqr()
    }
}

/// `(R, T)` at a possibly complex wavenumber.
pub fn reflection_transmission(
    valency: usize,
    coupling: VertexCoupling,
    k: Complex64,
) -> Result<(Complex64, Complex64)> {
    if valency == 0 {
        return Err(Error::InvalidArgument(
            "vertex valency must be at least 1".into(),
        ));
    }
    if k == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularWavenumber(
            "vertex amplitudes degenerate at k = 0",
        ));
    }
    let gamma = match coupling {
        VertexCoupling::Dirichlet => {
            return Ok((Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)))
        }
        VertexCoupling::Kirchhoff => 0.0,
        VertexCoupling::Delta(g) => g,
    };
    let n = valency as f64;
    let ik = I * k;
    let denom = n * ik - gamma;
    if denom.norm() == 0.0 {
        return Err(Error::PoleProximity { magnitude: 0.0 });
    }
    let r = (gamma - (n - 2.0) * ik) / denom;
    let t = 2.0 * ik / denom;
    Ok((r, t))
}

pub fn vertex_reflection_transmission(
    valency: usize,
    coupling: VertexCoupling,
    k: f64,
) -> Result<RTPair> {
    let (r, t) = reflection_transmission(valency, coupling, Complex64::new(k, 0.0))?;
    Ok(RTPair {
        r,
        t,
        valency,
        coupling,
        k,
    })
}

/// `N x N` vertex scattering matrix: `R` on the diagonal, `T` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSMatrix {
    pub dim: usize,
    pub entries: DMatrix<Complex64>,
    /// Wavenumber the matrix was evaluated at. Real for the physical matrix;
    /// complex values come from [`VertexSMatrix::at_complex`].
    pub k: Complex64,
}

impl VertexSMatrix {
    pub fn at_complex(valency: usize, coupling: VertexCoupling, k: Complex64) -> Result<Self> {
        let (r, t) = reflection_transmission(valency, coupling, k)?;
        let entries = DMatrix::from_fn(valency, valency, |i, j| if i == j { r } else { t });
        Ok(VertexSMatrix {
            dim: valency,
            entries,
            k,
        })
    }

    pub fn get(&self, n: usize, l: usize) -> Option<Complex64> {
        (n < self.dim && l < self.dim).then(|| self.entries[(n, l)])
    }

    /// `max(|S S^+ - 1|, |S^+ S - 1|)` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let id = DMatrix::<Complex64>::identity(self.dim, self.dim);
        let adj = self.entries.adjoint();
        let a = &self.entries * &adj - &id;
        let b = &adj * &self.entries - &id;
        a.iter()
            .chain(b.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

pub fn build_vertex_smatrix(
    valency: usize,
    coupling: VertexCoupling,
    k: f64,
) -> Result<VertexSMatrix> {
    VertexSMatrix::at_complex(valency, coupling, Complex64::new(k, 0.0))
}

/// The amplitudes `S`, `R` (written `s_big`, `r_big`) and the denominator
/// `f = 2ik g` that parameterize the two-vertex Green function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeAmplitudes {
    pub s_big: Complex64,
    pub r_big: Complex64,
    pub f: Complex64,
    pub g: Complex64,
    pub ell: f64,
    pub k: Complex64,
}

impl CompositeAmplitudes {
    /// Composite amplitudes of a symmetric vertex family with single-vertex
    /// amplitudes `(r, t)`, evaluated with the closed-form expressions
    /// ```text
    /// f = 2ik [1 - R e - (R+T)^2 e^2 - (2T^3 + RT^2 - 2R^2 T - R^3) e^3]
    /// S = T^2 e^2 {(R+T)(1 - R e) + 2T^2 e} / f
    /// R = -{R - R^2 e + (T^3 - 2R^2 T - R^3) e^2
    ///       + (R^4 + 2R^3 T - 2R^2 T^2 - 3R T^3 + 2T^4) e^3} / f
    /// ```
    /// with `e = exp(i k ell)`.
    pub fn from_rt(r: Complex64, t: Complex64, ell: f64, k: Complex64) -> Result<Self> {
        check_ell(ell)?;
        if k == Complex64::new(0.0, 0.0) {
            return Err(Error::SingularWavenumber(
                "composite amplitudes need k != 0",
            ));
        }
        let e = (I * k * ell).exp();
        let e2 = e * e;
        let e3 = e2 * e;
        let (r2, t2) = (r * r, t * t);
        let (r3, t3) = (r2 * r, t2 * t);

        let bracket = [
            Complex64::new(1.0, 0.0),
            -r * e,
            -(r + t) * (r + t) * e2,
            -(2.0 * t3 + r * t2 - 2.0 * r2 * t - r3) * e3,
        ];
        let g: Complex64 = bracket.iter().sum();
        let two_ik = 2.0 * I * k;
        check_pole(g, &bracket)?;
        let f = two_ik * g;

        let s_big = t2 * e2 * ((r + t) * (1.0 - r * e) + 2.0 * t2 * e) / f;
        let r_big = -(r - r2 * e
            + (t3 - 2.0 * r2 * t - r3) * e2
            + (r2 * r2 + 2.0 * r3 * t - 2.0 * r2 * t2 - 3.0 * r * t3 + 2.0 * t2 * t2) * e3)
            / f;
        Ok(CompositeAmplitudes {
            s_big,
            r_big,
            f,
            g,
            ell,
            k,
        })
    }

    /// Flux-normalized amplitudes of a bare bond of length `ell` whose two
    /// ends reflect with the dimensionless amplitude `r_end`: `S = 0`,
    /// `R = r_end` and `g = 1 - r_end^2 exp(2 i k ell)`, the multiple
    /// reflection denominator. This is the form the Casimir engine uses.
    pub fn reflecting_bond(r_end: Complex64, ell: f64, k: Complex64) -> Result<Self> {
        check_ell(ell)?;
        if k == Complex64::new(0.0, 0.0) {
            return Err(Error::SingularWavenumber(
                "composite amplitudes need k != 0",
            ));
        }
        let e2 = (2.0 * I * k * ell).exp();
        let bracket = [Complex64::new(1.0, 0.0), -r_end * r_end * e2];
        let g: Complex64 = bracket.iter().sum();
        check_pole(g, &bracket)?;
        Ok(CompositeAmplitudes {
            s_big: Complex64::new(0.0, 0.0),
            r_big: r_end,
            f: 2.0 * I * k * g,
            g,
            ell,
            k,
        })
    }

    /// Amplitudes set by hand, for algebraic checks. `g` is taken as given
    /// and `f = 2ik g`.
    pub fn from_parts(
        s_big: Complex64,
        r_big: Complex64,
        g: Complex64,
        ell: f64,
        k: Complex64,
    ) -> Self {
        CompositeAmplitudes {
            s_big,
            r_big,
            f: 2.0 * I * k * g,
            g,
            ell,
            k,
        }
    }
}

pub fn composite_amplitudes(rt: &RTPair, ell: f64, k: Complex64) -> Result<CompositeAmplitudes> {
    CompositeAmplitudes::from_rt(rt.r, rt.t, ell, k)
}

fn check_ell(ell: f64) -> Result<()> {
    if ell.is_finite() && ell > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "bond length must be positive, got {ell}"
        )))
    }
}

fn check_pole(g: Complex64, terms: &[Complex64]) -> Result<()> {
    let scale = terms.iter().map(|z| z.norm()).fold(1.0, f64::max);
    // |f| = |2k||g|, so the relative test reduces to one on g.
    if g.norm() < POLE_TOLERANCE * scale {
        Err(Error::PoleProximity {
            magnitude: g.norm(),
        })
    } else {
        Ok(())
    }
}
