//! C interface to `qgraph`.
//!
//! Graphs and spectra are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns a
//! [`QgStatus`]; on failure the message is available from
//! [`qg_last_error_message`] on the same thread.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qgraph::casimir::{
    casimir_green_method, casimir_mode_sum_graph, CasimirResult, RegularizationConfig,
    SPECTRUM_CUTOFF_TAU,
};
use qgraph::{Error, Graph, SpectrumResult, VertexCoupling};

/// Opaque graph handle.
pub struct QgGraph {
    graph: Graph,
}

/// Opaque spectrum handle.
pub struct QgSpectrum {
    result: SpectrumResult,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    InvalidGraph = 4,
    InvalidArgument = 5,
    Unsupported = 6,
    Pole = 7,
    InsufficientSpectrum = 8,
    Extrapolation = 9,
    Quadrature = 10,
    OutOfRange = 11,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QgCouplingKind {
    Kirchhoff = 0,
    Dirichlet = 1,
    Delta = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QgComplex {
    pub re: f64,
    pub im: f64,
}

/// Regulator settings. `tau_steps` values are spaced geometrically from
/// `tau_max` down to `tau_min`. `kappa_max <= 0` selects the automatic
/// truncation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QgRegularization {
    pub tau_max: f64,
    pub tau_min: f64,
    pub tau_steps: usize,
    pub quadrature_tol: f64,
    pub kappa_max: f64,
    pub fit_order: usize,
    pub spectrum_tol: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QgCasimir {
    pub energy: f64,
    pub estimated_error: f64,
    pub divergence_coefficient: f64,
    pub fit_residual: f64,
    /// Eigenvalues used by the mode sum, with multiplicity. Zero for the
    /// Green method.
    pub eigenvalue_count: usize,
}

struct Failure {
    status: QgStatus,
    message: String,
}

impl Failure {
    fn new(status: QgStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Syntax { .. } => QgStatus::Syntax,
            Error::InvalidGraph(_) => QgStatus::InvalidGraph,
            Error::InvalidArgument(_) | Error::SingularWavenumber(_) => QgStatus::InvalidArgument,
            Error::Unsupported(_) => QgStatus::Unsupported,
            Error::PoleProximity { .. } | Error::ResonantBond { .. } => QgStatus::Pole,
            Error::InsufficientSpectrum(_) => QgStatus::InsufficientSpectrum,
            Error::Extrapolation { .. } => QgStatus::Extrapolation,
            Error::Quadrature(_) => QgStatus::Quadrature,
        };
        Failure::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QgStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let message = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure::new(QgStatus::Panic, format!("panic: {message}")))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            QgStatus::Ok
        }
        Err(f) => {
            set_last_error(f.message);
            f.status
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller promises `p` is null or points to a live `T`.
    unsafe { p.as_ref() }
        .ok_or_else(|| Failure::new(QgStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller promises `p` is null or points to writable storage.
    unsafe { p.as_mut() }
        .ok_or_else(|| Failure::new(QgStatus::NullPointer, format!("{what} is null")))
}

fn coupling(kind: QgCouplingKind, gamma: f64) -> VertexCoupling {
    match kind {
        QgCouplingKind::Kirchhoff => VertexCoupling::Kirchhoff,
        QgCouplingKind::Dirichlet => VertexCoupling::Dirichlet,
        QgCouplingKind::Delta => VertexCoupling::Delta(gamma),
    }
}

impl From<QgComplex> for Complex64 {
    fn from(z: QgComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for QgComplex {
    fn from(z: Complex64) -> Self {
        QgComplex { re: z.re, im: z.im }
    }
}

impl QgRegularization {
    fn config(&self) -> Result<RegularizationConfig, Failure> {
        let mut cfg =
            RegularizationConfig::with_tau_range(self.tau_max, self.tau_min, self.tau_steps)?;
        cfg.quadrature_tol = self.quadrature_tol;
        cfg.kappa_max = (self.kappa_max > 0.0).then_some(self.kappa_max);
        cfg.fit_order = self.fit_order;
        cfg.validate()?;
        if !(self.spectrum_tol > 0.0) {
            return Err(Failure::new(
                QgStatus::InvalidArgument,
                "spectrum_tol must be positive",
            ));
        }
        Ok(cfg)
    }
}

fn regularization(p: *const QgRegularization) -> Result<(RegularizationConfig, f64), Failure> {
    // SAFETY: as in `non_null`; null selects the defaults.
    match unsafe { p.as_ref() } {
        Some(r) => Ok((r.config()?, r.spectrum_tol)),
        None => Ok((
            RegularizationConfig::default(),
            qg_regularization_default().spectrum_tol,
        )),
    }
}

fn casimir_summary(r: &CasimirResult, eigenvalue_count: usize) -> QgCasimir {
    QgCasimir {
        energy: r.energy,
        estimated_error: r.estimated_error,
        divergence_coefficient: r.divergence_coefficient(),
        fit_residual: r.fit_residual,
        eigenvalue_count,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into the library on this
/// thread.
#[no_mangle]
pub extern "C" fn qg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parse a graph from NUL-terminated JSON text.
///
/// # Safety
/// `json` must be null or a valid C string; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_from_json(
    json: *const c_char,
    out: *mut *mut QgGraph,
) -> QgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(Failure::new(QgStatus::NullPointer, "json is null"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure::new(QgStatus::InvalidUtf8, e.to_string()))?;
        let graph = qgraph::parse_graph(text)?;
        *out = Box::into_raw(Box::new(QgGraph { graph }));
        Ok(())
    })
}

/// Release a graph. Null is ignored.
///
/// # Safety
/// `graph` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_free(graph: *mut QgGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Copy of `graph` with every bond length multiplied by `factor`.
///
/// # Safety
/// `graph` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_scaled(
    graph: *const QgGraph,
    factor: f64,
    out: *mut *mut QgGraph,
) -> QgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let g = &non_null(graph, "graph")?.graph;
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Failure::new(
                QgStatus::InvalidArgument,
                format!("scale factor must be positive, got {factor}"),
            ));
        }
        *out = Box::into_raw(Box::new(QgGraph {
            graph: g.scaled(factor),
        }));
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qg_graph_total_length(graph: *const QgGraph, out: *mut f64) -> QgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = non_null(graph, "graph")?.graph.total_length();
        Ok(())
    })
}

/// Eigenvalues of a compact graph in `(0, k_max]`, refined to `tol`.
///
/// # Safety
/// `graph` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qg_spectrum_compute(
    graph: *const QgGraph,
    k_max: f64,
    tol: f64,
    out: *mut *mut QgSpectrum,
) -> QgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let g = &non_null(graph, "graph")?.graph;
        let result = qgraph::find_eigenvalues(g, k_max, tol)?;
        *out = Box::into_raw(Box::new(QgSpectrum { result }));
        Ok(())
    })
}

/// Number of distinct eigenvalues; zero for a null handle.
///
/// # Safety
/// `spectrum` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qg_spectrum_len(spectrum: *const QgSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.result.eigenvalues.len())
}

/// The `index`-th distinct eigenvalue and its multiplicity. Either output
/// may be null.
///
/// # Safety
/// `spectrum` must be null or a live handle; outputs null or writable.
#[no_mangle]
pub unsafe extern "C" fn qg_spectrum_get(
    spectrum: *const QgSpectrum,
    index: usize,
    k: *mut f64,
    multiplicity: *mut usize,
) -> QgStatus {
    guard(|| {
        let s = &non_null(spectrum, "spectrum")?.result;
        let Some(&value) = s.eigenvalues.get(index) else {
            return Err(Failure::new(
                QgStatus::OutOfRange,
                format!(
                    "index {index} out of range for {} eigenvalues",
                    s.eigenvalues.len()
                ),
            ));
        };
        if let Some(k) = k.as_mut() {
            *k = value;
        }
        if let Some(m) = multiplicity.as_mut() {
            *m = s.multiplicities[index];
        }
        Ok(())
    })
}

/// Largest deviation of the counting function from the Weyl term, and the
/// bound it is audited against.
///
/// # Safety
/// `spectrum` must be null or a live handle; outputs null or writable.
#[no_mangle]
pub unsafe extern "C" fn qg_spectrum_weyl(
    spectrum: *const QgSpectrum,
    deviation: *mut f64,
    bound: *mut f64,
) -> QgStatus {
    guard(|| {
        let s = &non_null(spectrum, "spectrum")?.result;
        *out_ptr(deviation, "deviation")? = s.weyl_deviation;
        *out_ptr(bound, "bound")? = s.weyl_bound;
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qg_spectrum_free(spectrum: *mut QgSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Default regulator settings.
#[no_mangle]
pub extern "C" fn qg_regularization_default() -> QgRegularization {
    let cfg = RegularizationConfig::default();
    QgRegularization {
        tau_max: cfg.tau_values[0],
        tau_min: cfg.tau_min(),
        tau_steps: cfg.tau_values.len(),
        quadrature_tol: cfg.quadrature_tol,
        kappa_max: cfg.kappa_max.unwrap_or(0.0),
        fit_order: cfg.fit_order,
        spectrum_tol: 1e-10,
    }
}

/// Casimir energy by mode summation over the graph spectrum. A null `reg`
/// selects the defaults.
///
/// # Safety
/// `graph` must be null or a live handle; `reg` null or valid; `out` null
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn qg_casimir_mode_sum(
    graph: *const QgGraph,
    reg: *const QgRegularization,
    out: *mut QgCasimir,
) -> QgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g = &non_null(graph, "graph")?.graph;
        let (cfg, spectrum_tol) = regularization(reg)?;
        let k_max = SPECTRUM_CUTOFF_TAU / cfg.tau_min();
        let (r, count) = casimir_mode_sum_graph(g, &cfg, k_max, spectrum_tol)?;
        *out = casimir_summary(&r, count);
        Ok(())
    })
}

/// Casimir energy from the trace of the Green function on the imaginary
/// axis. Single bonds with identical Kirchhoff or Dirichlet ends only.
///
/// # Safety
/// As [`qg_casimir_mode_sum`].
#[no_mangle]
pub unsafe extern "C" fn qg_casimir_green(
    graph: *const QgGraph,
    reg: *const QgRegularization,
    out: *mut QgCasimir,
) -> QgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g = &non_null(graph, "graph")?.graph;
        let (cfg, _) = regularization(reg)?;
        let r = casimir_green_method(g, &cfg)?;
        *out = casimir_summary(&r, 0);
        Ok(())
    })
}

/// Reflection and transmission amplitudes of a vertex of the given valency.
/// `gamma` is read only for `QG_COUPLING_KIND_DELTA`.
///
/// # Safety
/// `r` and `t` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qg_vertex_rt(
    valency: usize,
    kind: QgCouplingKind,
    gamma: f64,
    k: QgComplex,
    r: *mut QgComplex,
    t: *mut QgComplex,
) -> QgStatus {
    guard(|| {
        let (r, t) = (out_ptr(r, "r")?, out_ptr(t, "t")?);
        let (rv, tv) =
            qgraph::scattering::reflection_transmission(valency, coupling(kind, gamma), k.into())?;
        *r = rv.into();
        *t = tv.into();
        Ok(())
    })
}

/// Free-line Green function `exp(ik|x_f - x_i|) / (2ik)`.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qg_free_green(
    k: QgComplex,
    x_i: f64,
    x_f: f64,
    out: *mut QgComplex,
) -> QgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = qgraph::free_green(k.into(), x_i, x_f)?.into();
        Ok(())
    })
}
