//! Globally adaptive 7/15-point Gauss-Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol * |I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values the integrator can accumulate.
pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_segments: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub segments: usize,
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<T, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<T>>
where
    T: Integrand,
    F: FnMut(f64) -> Result<T>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut k15 = fc * WGK[7];
    let mut g7 = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let sum = f(center - dx)? + f(center + dx)?;
        k15 = k15 + sum * w;
        if j % 2 == 1 {
            g7 = g7 + sum * WG[j / 2];
        }
    }
    let value = k15 * half;
    let error = ((k15 - g7) * half).magnitude();
    if !value.magnitude().is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(Segment { a, b, value, error })
}

/// Integrate `f` over `[a, b]`. The integrand may fail, in which case the
/// first error is returned.
pub fn integrate<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    opts: QuadratureOptions,
) -> Result<QuadratureResult<T>>
where
    T: Integrand,
    F: FnMut(f64) -> Result<T>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(
            "integration bounds must be finite".into(),
        ));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: T::zero(),
            error_estimate: 0.0,
            evaluations: 0,
            segments: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, a, b)?;
    let mut total = first.value;
    let mut error = first.error;
    heap.push(first);
    let mut evaluations = 15;

    while error > opts.abs_tol.max(opts.rel_tol * total.magnitude()) {
        if heap.len() >= opts.max_segments {
            return Err(Error::Quadrature(format!(
                "segment limit {} reached with error estimate {error:e}",
                opts.max_segments
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature(format!(
                "interval around {mid} cannot be subdivided further"
            )));
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        evaluations += 30;
        total = total - worst.value + left.value + right.value;
        error = error - worst.error + left.error + right.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the running updates.
    let value = heap.iter().fold(T::zero(), |acc, s| acc + s.value);
    let error_estimate = heap.iter().map(|s| s.error).sum();
    Ok(QuadratureResult {
        value,
        error_estimate,
        evaluations,
        segments: heap.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact_on_one_segment() {
        let r = integrate(
            |x: f64| Ok(x.powi(6) - 3.0 * x),
            0.0,
            2.0,
            QuadratureOptions::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.value, 128.0 / 7.0 - 6.0, epsilon = 1e-12);
        assert_eq!(r.segments, 1);
    }

    #[test]
    fn peaked_and_oscillatory() {
        let opts = QuadratureOptions::default();
        let r = integrate(|x: f64| Ok(1.0 / (1e-4 + x * x)), -1.0, 1.0, opts).unwrap();
        assert_abs_diff_eq!(r.value, 2.0 * (1.0f64 / 1e-2).atan() / 1e-2, epsilon = 1e-8);
        let r = integrate(
            |x: f64| Ok(Complex64::new(0.0, 30.0 * x).exp()),
            0.0,
            PI,
            opts,
        )
        .unwrap();
        let want = (Complex64::new(0.0, 30.0 * PI).exp() - 1.0) / Complex64::new(0.0, 30.0);
        assert_abs_diff_eq!((r.value - want).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn integrand_errors_propagate() {
        let r: Result<QuadratureResult<f64>> = integrate(
            |_| Err(Error::PoleProximity { magnitude: 0.0 }),
            0.0,
            1.0,
            QuadratureOptions::default(),
        );
        assert!(matches!(r, Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn segment_limit() {
        let opts = QuadratureOptions {
            max_segments: 4,
            ..Default::default()
        };
        let r = integrate(|x: f64| Ok(x.abs().sqrt()), -1.0, 1.0, opts);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
