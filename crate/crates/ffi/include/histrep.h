#ifndef HISTREP_H
#define HISTREP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HrStatus {
  HR_STATUS_OK = 0,
  /**
   * The computation ran and found a violated check.
   */
  HR_STATUS_VIOLATION = 1,
  HR_STATUS_INVALID_INPUT = 2,
  /**
   * Dimension below three where the representation theorems apply.
   */
  HR_STATUS_DIMENSION_EXCLUDED = 3,
  HR_STATUS_NULL_POINTER = 4,
  HR_STATUS_BUFFER_TOO_SMALL = 5,
  HR_STATUS_INTERNAL = 6,
} HrStatus;

/**
 * Opaque decoherence functional.
 */
typedef struct HrFunctional HrFunctional;

typedef struct HrAxiomReport {
  double hermiticity_residual;
  double positivity_min;
  double normalization_residual;
  double orthoadditivity_residual;
  bool passed;
} HrAxiomReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *hr_last_error(void);

/**
 * Builds a functional from scenario JSON text.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum HrStatus hr_functional_from_scenario(const char *json, struct HrFunctional **out);

/**
 * `d(p,q) = ⟨pψ, qψ⟩` for a unit vector `ψ` of length `dim`.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `dim` doubles; `out` must be valid.
 */
enum HrStatus hr_functional_pure_state(const double *re,
                                       const double *im,
                                       size_t dim,
                                       struct HrFunctional **out);

/**
 * `d(p,q) = tr((p⊗q)X)` for `X` of size `dim² × dim²`. The operator
 * conditions are checked; a failing operator yields `Violation`.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `dim⁴` doubles; `out` must be valid.
 */
enum HrStatus hr_functional_operator(const double *re,
                                     const double *im,
                                     size_t dim,
                                     struct HrFunctional **out);

/**
 * # Safety
 * `f` must be null or a handle from this library not yet freed.
 */
void hr_functional_free(struct HrFunctional *f);

/**
 * Hilbert-space dimension, or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t hr_functional_dim(const struct HrFunctional *f);

/**
 * `d(p,q)` for projections given as `dim × dim` row-major matrices.
 *
 * # Safety
 * Matrix buffers must hold `dim²` doubles; `out_re`/`out_im` must be valid.
 */
enum HrStatus hr_evaluate(const struct HrFunctional *f,
                          const double *p_re,
                          const double *p_im,
                          const double *q_re,
                          const double *q_im,
                          double *out_re,
                          double *out_im);

/**
 * Sampled axiom check. Returns `Violation` when any axiom fails; the report
 * is filled either way.
 *
 * # Safety
 * `f` must be a live handle and `out` valid.
 */
enum HrStatus hr_check_axioms(const struct HrFunctional *f,
                              size_t samples,
                              uint64_t seed,
                              double tolerance,
                              struct HrAxiomReport *out);

/**
 * Writes the `dim² × dim²` ILS operator row-major into `out_re`/`out_im`
 * (each of length `len ≥ dim⁴`) and its trace norm into `trace_norm`.
 *
 * # Safety
 * Output buffers must hold `len` doubles; `trace_norm` may be null.
 */
enum HrStatus hr_extract_ils(const struct HrFunctional *f,
                             double *out_re,
                             double *out_im,
                             size_t len,
                             double *trace_norm);

/**
 * Sampled `sup |β(p_ξ)|` over unit vectors of the algebraic tensor product.
 *
 * # Safety
 * `f` must be a live handle and `out_sup` valid.
 */
enum HrStatus hr_tracial_bound_probe(const struct HrFunctional *f,
                                     size_t samples,
                                     uint64_t seed,
                                     double *out_sup);

/**
 * Runs the command-line interface with `argv` (excluding the program
 * name). The primary output is returned in `out_text`, to be released with
 * [`hr_string_free`]; the process-style exit code goes to `exit_code`.
 *
 * # Safety
 * `argv` must hold `argc` valid NUL-terminated strings; outputs must be valid.
 */
enum HrStatus hr_run_command(const char *const *argv,
                             size_t argc,
                             char **out_text,
                             int32_t *exit_code);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void hr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HISTREP_H */
