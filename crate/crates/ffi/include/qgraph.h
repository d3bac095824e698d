#ifndef QGRAPH_H
#define QGRAPH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QgCouplingKind {
  QG_COUPLING_KIND_KIRCHHOFF = 0,
  QG_COUPLING_KIND_DIRICHLET = 1,
  QG_COUPLING_KIND_DELTA = 2,
} QgCouplingKind;

typedef enum QgStatus {
  QG_STATUS_OK = 0,
  QG_STATUS_NULL_POINTER = 1,
  QG_STATUS_INVALID_UTF8 = 2,
  QG_STATUS_SYNTAX = 3,
  QG_STATUS_INVALID_GRAPH = 4,
  QG_STATUS_INVALID_ARGUMENT = 5,
  QG_STATUS_UNSUPPORTED = 6,
  QG_STATUS_POLE = 7,
  QG_STATUS_INSUFFICIENT_SPECTRUM = 8,
  QG_STATUS_EXTRAPOLATION = 9,
  QG_STATUS_QUADRATURE = 10,
  QG_STATUS_OUT_OF_RANGE = 11,
  QG_STATUS_PANIC = 99,
} QgStatus;

/**
 * Opaque graph handle.
 */
typedef struct QgGraph QgGraph;

/**
 * Opaque spectrum handle.
 */
typedef struct QgSpectrum QgSpectrum;

/**
 * Regulator settings. `tau_steps` values are spaced geometrically from
 * `tau_max` down to `tau_min`. `kappa_max <= 0` selects the automatic
 * truncation.
 */
typedef struct QgRegularization {
  double tau_max;
  double tau_min;
  size_t tau_steps;
  double quadrature_tol;
  double kappa_max;
  size_t fit_order;
  double spectrum_tol;
} QgRegularization;

typedef struct QgCasimir {
  double energy;
  double estimated_error;
  double divergence_coefficient;
  double fit_residual;
  /**
   * Eigenvalues used by the mode sum, with multiplicity. Zero for the
   * Green method.
   */
  size_t eigenvalue_count;
} QgCasimir;

typedef struct QgComplex {
  double re;
  double im;
} QgComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qg_version(void);

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call into the library on this
 * thread.
 */
const char *qg_last_error_message(void);

/**
 * Parse a graph from NUL-terminated JSON text.
 *
 * # Safety
 * `json` must be null or a valid C string; `out` must be null or writable.
 */
enum QgStatus qg_graph_from_json(const char *json, struct QgGraph **out);

/**
 * Release a graph. Null is ignored.
 *
 * # Safety
 * `graph` must be null or a handle from this library not yet freed.
 */
void qg_graph_free(struct QgGraph *graph);

/**
 * Copy of `graph` with every bond length multiplied by `factor`.
 *
 * # Safety
 * `graph` must be null or a live handle; `out` must be null or writable.
 */
enum QgStatus qg_graph_scaled(const struct QgGraph *graph, double factor, struct QgGraph **out);

/**
 * # Safety
 * `graph` must be null or a live handle; `out` must be null or writable.
 */
enum QgStatus qg_graph_total_length(const struct QgGraph *graph, double *out);

/**
 * Eigenvalues of a compact graph in `(0, k_max]`, refined to `tol`.
 *
 * # Safety
 * `graph` must be null or a live handle; `out` must be null or writable.
 */
enum QgStatus qg_spectrum_compute(const struct QgGraph *graph,
                                  double k_max,
                                  double tol,
                                  struct QgSpectrum **out);

/**
 * Number of distinct eigenvalues; zero for a null handle.
 *
 * # Safety
 * `spectrum` must be null or a live handle.
 */
size_t qg_spectrum_len(const struct QgSpectrum *spectrum);

/**
 * The `index`-th distinct eigenvalue and its multiplicity. Either output
 * may be null.
 *
 * # Safety
 * `spectrum` must be null or a live handle; outputs null or writable.
 */
enum QgStatus qg_spectrum_get(const struct QgSpectrum *spectrum,
                              size_t index,
                              double *k,
                              size_t *multiplicity);

/**
 * Largest deviation of the counting function from the Weyl term, and the
 * bound it is audited against.
 *
 * # Safety
 * `spectrum` must be null or a live handle; outputs null or writable.
 */
enum QgStatus qg_spectrum_weyl(const struct QgSpectrum *spectrum, double *deviation, double *bound);

/**
 * # Safety
 * `spectrum` must be null or a handle from this library not yet freed.
 */
void qg_spectrum_free(struct QgSpectrum *spectrum);

/**
 * Default regulator settings.
 */
struct QgRegularization qg_regularization_default(void);

/**
 * Casimir energy by mode summation over the graph spectrum. A null `reg`
 * selects the defaults.
 *
 * # Safety
 * `graph` must be null or a live handle; `reg` null or valid; `out` null
 * or writable.
 */
enum QgStatus qg_casimir_mode_sum(const struct QgGraph *graph,
                                  const struct QgRegularization *reg,
                                  struct QgCasimir *out);

/**
 * Casimir energy from the trace of the Green function on the imaginary
 * axis. Single bonds with identical Kirchhoff or Dirichlet ends only.
 *
 * # Safety
 * As [`qg_casimir_mode_sum`].
 */
enum QgStatus qg_casimir_green(const struct QgGraph *graph,
                               const struct QgRegularization *reg,
                               struct QgCasimir *out);

/**
 * Reflection and transmission amplitudes of a vertex of the given valency.
 * `gamma` is read only for `QG_COUPLING_KIND_DELTA`.
 *
 * # Safety
 * `r` and `t` must be null or writable.
 */
enum QgStatus qg_vertex_rt(size_t valency,
                           enum QgCouplingKind kind,
                           double gamma,
                           struct QgComplex k,
                           struct QgComplex *r,
                           struct QgComplex *t);

/**
 * Free-line Green function `exp(ik|x_f - x_i|) / (2ik)`.
 *
 * # Safety
 * `out` must be null or writable.
 */
enum QgStatus qg_free_green(struct QgComplex k, double x_i, double x_f, struct QgComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QGRAPH_H */
