//! Eigenvalues of compact quantum graphs.
//!
//! Every bond carries two directed copies. A wave on the directed bond
//! `i -> j` picks up `exp(ik L)` on the way and is then scattered at `j`:
//! back onto `j -> i` with the vertex reflection amplitude, onto every other
//! bond leaving `j` with the transmission amplitude. With `S(k)` that
//! routing matrix and `D(k) = diag(exp(ik L_b))`, the eigenvalues are the
//! positive zeros of `det(I - S(k) D(k))`.
//!
//! On the real axis `U = S D` is unitary, so
//! `det(I - U) / sqrt(det U) = (-4)^B prod sin(theta_j / 2)` is real up to a
//! constant phase. The scan brackets sign changes of that phase-stripped
//! function and, separately, local minima of the smallest singular value of
//! `I - U`, which also catches roots of even multiplicity.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexCoupling};
use crate::scattering::reflection_transmission;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Scan refinements attempted when the Weyl audit fails.
const MAX_RESCANS: usize = 3;

pub fn dirichlet_eigenvalues(length: f64, n_max: usize) -> Vec<f64> {
    (1..=n_max).map(|n| n as f64 * PI / length).collect()
}

/// Leading Weyl term `total_length * k / pi` of the eigenvalue counting function.
pub fn weyl_count(g: &Graph, k: f64) -> f64 {
    g.total_length() * k / PI
}

#[derive(Debug, Clone, Copy)]
struct DirectedBond {
    end: usize,
    reverse: usize,
    length: f64,
}

#[derive(Debug, Clone, Copy)]
struct VertexData {
    valency: usize,
    coupling: VertexCoupling,
}

/// Bond-scattering data of a compact graph, ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct SecularSystem {
    bonds: Vec<DirectedBond>,
    outgoing: Vec<Vec<usize>>,
    vertices: Vec<VertexData>,
    total_length: f64,
}

impl SecularSystem {
    pub fn new(g: &Graph) -> Result<Self> {
        let diagnostics = g.validate();
        if !diagnostics.is_empty() {
            return Err(Error::InvalidGraph(
                diagnostics.iter().map(ToString::to_string).collect(),
            ));
        }
        if !g.is_compact() {
            return Err(Error::Unsupported("spectrum requires compact graph".into()));
        }
        g.require_zero_potential()?;
        if g.bonds.is_empty() {
            return Err(Error::Unsupported(
                "spectrum requires at least one bond".into(),
            ));
        }

        let index = |id| g.vertex_index(id).expect("validated graph");
        let mut bonds = Vec::with_capacity(2 * g.bonds.len());
        let mut outgoing = vec![Vec::new(); g.vertices.len()];
        for (b, bond) in g.bonds.iter().enumerate() {
            let (u, v) = (index(bond.from), index(bond.to));
            bonds.push(DirectedBond {
                end: v,
                reverse: 2 * b + 1,
                length: bond.length,
            });
            bonds.push(DirectedBond {
                end: u,
                reverse: 2 * b,
                length: bond.length,
            });
            outgoing[u].push(2 * b);
            outgoing[v].push(2 * b + 1);
        }
        let vertices = g
            .vertices
            .iter()
            .map(|v| VertexData {
                valency: g.valency(v.id),
                coupling: v.coupling,
            })
            .collect();
        Ok(SecularSystem {
            bonds,
            outgoing,
            vertices,
            total_length: g.total_length(),
        })
    }

    pub fn dim(&self) -> usize {
        self.bonds.len()
    }

    /// `I - S(k) D(k)`.
    pub fn matrix(&self, k: f64) -> Result<DMatrix<Complex64>> {
        let amplitudes = self
            .vertices
            .iter()
            .map(|v| reflection_transmission(v.valency, v.coupling, Complex64::new(k, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        let n = self.dim();
        let mut m = DMatrix::<Complex64>::identity(n, n);
        for (d, bond) in self.bonds.iter().enumerate() {
            let (r, t) = amplitudes[bond.end];
            let phase = (I * k * bond.length).exp();
            for &out in &self.outgoing[bond.end] {
                let sigma = if out == bond.reverse { r } else { t };
                m[(out, d)] -= sigma * phase;
            }
        }
        Ok(m)
    }

    pub fn determinant(&self, k: f64) -> Result<Complex64> {
        Ok(self.matrix(k)?.determinant())
    }

    /// Real-valued secular function: the determinant divided by a continuous
    /// branch of `sqrt(det U)`.
    pub fn phase_stripped(&self, k: f64) -> Result<f64> {
        let det = self.determinant(k)?;
        let mut root = (I * k * self.total_length).exp();
        for v in &self.vertices {
            root *= sqrt_vertex_det(v, k);
        }
        let z = det / root;
        // z lies on the real or the imaginary axis; a fixed permutation sign
        // decides which.
        Ok(z.re + z.im)
    }

    /// Singular values of `I - S D`, ascending.
    pub fn singular_values(&self, k: f64) -> Result<Vec<f64>> {
        let mut s: Vec<f64> = self.matrix(k)?.singular_values().iter().copied().collect();
        s.sort_by(f64::total_cmp);
        Ok(s)
    }
}

/// Continuous square root of the determinant of one vertex scattering matrix.
/// Its eigenvalues are `-1` (`N - 1` times) and `(gamma + Nik) / (Nik - gamma)`.
fn sqrt_vertex_det(v: &VertexData, k: f64) -> Complex64 {
    let n = v.valency as i32;
    match v.coupling {
        VertexCoupling::Dirichlet => I.powi(n),
        VertexCoupling::Kirchhoff | VertexCoupling::Delta(_) => {
            let gamma = v.coupling.gamma().unwrap_or(0.0);
            let z = Complex64::new(gamma, v.valency as f64 * k);
            I.powi(n) * z / z.norm()
        }
    }
}

/// `det(I - S_bond(k) D(k))` for a compact graph.
pub fn secular_function(g: &Graph, k: f64) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "k must be positive, got {k}"
        )));
    }
    SecularSystem::new(g)?.determinant(k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Distinct eigenvalues, strictly increasing.
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// `|det(I - S D)|` at each root.
    pub residuals: Vec<f64>,
    pub k_max: f64,
    pub tol: f64,
    /// `total_length * k_max / pi`.
    pub weyl_expected: f64,
    /// `max |N(k) - total_length * k / pi|` over `(0, k_max]`.
    pub weyl_deviation: f64,
    /// Bound the audit was checked against (`V + B`).
    pub weyl_bound: f64,
    pub scan_step: f64,
}

impl SpectrumResult {
    /// Number of eigenvalues counted with multiplicity.
    pub fn count(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Eigenvalues repeated according to multiplicity.
    pub fn with_multiplicity(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&k, &m)| std::iter::repeat_n(k, m))
            .collect()
    }

    /// Eigenvalues `<= k`, with multiplicity.
    pub fn counting(&self, k: f64) -> usize {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .take_while(|(&e, _)| e <= k)
            .map(|(_, &m)| m)
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    k: f64,
    stripped: f64,
    sigma_min: f64,
}

#[derive(Debug, Clone, Copy)]
struct Root {
    k: f64,
    sigma_min: f64,
}

/// All eigenvalues in `(0, k_max]`, located to `tol`.
pub fn find_eigenvalues(g: &Graph, k_max: f64, tol: f64) -> Result<SpectrumResult> {
    if !(k_max > 0.0 && k_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "k_max must be positive, got {k_max}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let system = SecularSystem::new(g)?;
    let bound = (g.vertices.len() + g.bonds.len()) as f64;

    let mut step = PI / (8.0 * system.total_length);
    let mut result = scan(&system, k_max, tol, step, bound)?;
    for _ in 0..MAX_RESCANS {
        if result.weyl_deviation <= bound {
            break;
        }
        step *= 0.5;
        result = scan(&system, k_max, tol, step, bound)?;
    }
    Ok(result)
}

fn scan(
    system: &SecularSystem,
    k_max: f64,
    tol: f64,
    step: f64,
    bound: f64,
) -> Result<SpectrumResult> {
    let n = (k_max / step).ceil() as usize;
    let k_start = 1e-3 * step.min(k_max);
    let grid: Vec<f64> = (0..=n)
        .map(|j| {
            if j == 0 {
                k_start
            } else {
                (j as f64 * step).min(k_max)
            }
        })
        .collect();
    let samples = grid
        .par_iter()
        .map(|&k| {
            Ok(Sample {
                k,
                stripped: system.phase_stripped(k)?,
                sigma_min: system.singular_values(k)?[0],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let accept = (10.0 * tol).max(1e-9);
    let mut brackets = Vec::new();
    for w in samples.windows(2) {
        if w[0].stripped == 0.0 {
            brackets.push((w[0].k, w[0].k, true));
        } else if w[0].stripped * w[1].stripped < 0.0 {
            brackets.push((w[0].k, w[1].k, true));
        }
    }
    if let Some(last) = samples.last() {
        if last.stripped == 0.0 {
            brackets.push((last.k, last.k, true));
        }
    }
    for w in samples.windows(3) {
        if w[1].sigma_min <= w[0].sigma_min && w[1].sigma_min <= w[2].sigma_min {
            brackets.push((w[0].k, w[2].k, false));
        }
    }
    if let [.., a, b] = samples.as_slice() {
        // A root sitting right at k_max shows up as a boundary minimum.
        if b.sigma_min < a.sigma_min && b.sigma_min < accept {
            brackets.push((a.k, b.k, false));
        }
    }

    let mut roots = brackets
        .par_iter()
        .map(|&(a, b, sign_change)| {
            let k = if a == b {
                a
            } else if sign_change {
                bisect(|k| system.phase_stripped(k), a, b)?
            } else {
                golden_min(|k| Ok(system.singular_values(k)?[0]), a, b)?
            };
            Ok(Root {
                k,
                sigma_min: system.singular_values(k)?[0],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    roots.retain(|r| r.sigma_min <= accept && r.k > 0.0 && r.k <= k_max);
    roots.sort_by(|a, b| a.k.total_cmp(&b.k));

    let merge = (100.0 * tol).max(1e-9);
    let mut distinct: Vec<Root> = Vec::new();
    for r in roots {
        match distinct.last_mut() {
            Some(prev) if r.k - prev.k <= merge * prev.k.max(1.0) => {
                if r.sigma_min < prev.sigma_min {
                    *prev = r;
                }
            }
            _ => distinct.push(r),
        }
    }

    let mut eigenvalues = Vec::with_capacity(distinct.len());
    let mut multiplicities = Vec::with_capacity(distinct.len());
    let mut residuals = Vec::with_capacity(distinct.len());
    for r in &distinct {
        let sv = system.singular_values(r.k)?;
        eigenvalues.push(r.k);
        multiplicities.push(sv.iter().filter(|&&s| s <= accept).count().max(1));
        residuals.push(system.determinant(r.k)?.norm());
    }

    let slope = system.total_length / PI;
    let mut below = 0usize;
    let mut deviation: f64 = 0.0;
    for (&k, &m) in eigenvalues.iter().zip(&multiplicities) {
        deviation = deviation.max((below as f64 - slope * k).abs());
        below += m;
        deviation = deviation.max((below as f64 - slope * k).abs());
    }
    deviation = deviation.max((below as f64 - slope * k_max).abs());

    Ok(SpectrumResult {
        eigenvalues,
        multiplicities,
        residuals,
        k_max,
        tol,
        weyl_expected: slope * k_max,
        weyl_deviation: deviation,
        weyl_bound: bound,
        scan_step: step,
    })
}

/// Bisection to machine precision on a bracketed sign change.
fn bisect(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let mut fa = f(a)?;
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return Ok(if fa.abs() <= f(b)?.abs() { a } else { b });
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
}

/// Golden-section minimization; the targets here are V-shaped, which this
/// resolves down to rounding level.
fn golden_min(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { x1 } else { x2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dirichlet_formula() {
        let e = dirichlet_eigenvalues(PI, 3);
        for (got, want) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_eq!(dirichlet_eigenvalues(1.0, 1), vec![PI]);
        assert_eq!(dirichlet_eigenvalues(2.0, 2), vec![PI / 2.0, PI]);
    }

    #[test]
    fn weyl_term() {
        let interval = Graph::interval(1.0, VertexCoupling::Dirichlet);
        assert_abs_diff_eq!(weyl_count(&interval, PI), 1.0, epsilon = 1e-15);
        let star = Graph::star(3, 1.0, VertexCoupling::Kirchhoff, VertexCoupling::Dirichlet);
        assert_abs_diff_eq!(weyl_count(&star, PI), 3.0, epsilon = 1e-15);
        assert_eq!(
            weyl_count(&Graph::interval(2.0, VertexCoupling::Dirichlet), 0.0),
            0.0
        );
    }

    #[test]
    fn interval_secular_function() {
        let g = Graph::interval(1.0, VertexCoupling::Dirichlet);
        for n in 1..=4 {
            assert!(secular_function(&g, n as f64 * PI).unwrap().norm() < 1e-12);
            assert!(secular_function(&g, n as f64 * PI + 0.3).unwrap().norm() > 1e-3);
        }
        // det(I - U) = 1 - exp(2ik).
        let k = 0.77;
        let want = 1.0 - (2.0 * I * k).exp();
        assert_abs_diff_eq!(
            (secular_function(&g, k).unwrap() - want).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn secular_function_rejects_bad_input() {
        let g = Graph::interval(1.0, VertexCoupling::Dirichlet);
        assert!(matches!(
            secular_function(&g, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        let open = Graph::open_star(3, VertexCoupling::Kirchhoff);
        assert!(matches!(
            secular_function(&open, 1.0),
            Err(Error::Unsupported(_))
        ));
        let mut flux = g.clone();
        flux.bonds[0].potential = 0.1;
        assert!(matches!(
            secular_function(&flux, 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn phase_stripped_is_real_and_matches_modulus() {
        let g = Graph::star(
            3,
            1.0,
            VertexCoupling::Delta(0.7),
            VertexCoupling::Dirichlet,
        );
        let sys = SecularSystem::new(&g).unwrap();
        for k in [0.3, 1.1, 2.9, 7.4] {
            let z = sys.phase_stripped(k).unwrap();
            assert_abs_diff_eq!(z.abs(), sys.determinant(k).unwrap().norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn interval_spectrum() {
        let g = Graph::interval(1.0, VertexCoupling::Dirichlet);
        let s = find_eigenvalues(&g, 10.0, 1e-10).unwrap();
        assert_eq!(s.multiplicities, vec![1, 1, 1]);
        for (n, k) in s.eigenvalues.iter().enumerate() {
            assert_abs_diff_eq!(*k, (n + 1) as f64 * PI, epsilon = 1e-10);
        }
        assert!(find_eigenvalues(&g, 0.5, 1e-10)
            .unwrap()
            .eigenvalues
            .is_empty());
    }

    #[test]
    fn neumann_interval_excludes_zero_mode() {
        let g = Graph::interval(2.0, VertexCoupling::Kirchhoff);
        let s = find_eigenvalues(&g, 7.0, 1e-10).unwrap();
        let want = dirichlet_eigenvalues(2.0, 4);
        assert_eq!(s.eigenvalues.len(), 4);
        for (a, b) in s.eigenvalues.iter().zip(want) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn star_spectrum_with_degeneracy() {
        let g = Graph::star(3, 1.0, VertexCoupling::Kirchhoff, VertexCoupling::Dirichlet);
        let s = find_eigenvalues(&g, 5.0, 1e-10).unwrap();
        let want = [(PI / 2.0, 1), (PI, 2), (1.5 * PI, 1)];
        assert_eq!(s.eigenvalues.len(), 3, "{s:?}");
        for ((k, m), (wk, wm)) in s.eigenvalues.iter().zip(&s.multiplicities).zip(want) {
            assert_abs_diff_eq!(*k, wk, epsilon = 1e-10);
            assert_eq!(*m, wm);
        }
        assert_eq!(s.count(), 4);
        assert!(s.residuals.iter().all(|&r| r <= 1e-10));
    }

    #[test]
    fn argument_checks() {
        let g = Graph::interval(1.0, VertexCoupling::Dirichlet);
        assert!(find_eigenvalues(&g, 0.0, 1e-10).is_err());
        assert!(find_eigenvalues(&g, 1.0, 0.0).is_err());
    }
}
