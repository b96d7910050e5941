#ifndef REPHASE_H
#define REPHASE_H

/* Generated by cbindgen from rephase-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which route produces a response field.
 */
typedef enum RpProvenance {
  /**
   * Closed-form second-cumulant expression.
   */
  RP_PROVENANCE_EXACT = 0,
  /**
   * Ground-state-projector approximation (diagonal pathways only).
   */
  RP_PROVENANCE_RDM = 1,
  /**
   * Master-equation propagation (fixed-step RK4).
   */
  RP_PROVENANCE_PROPAGATED = 2,
} RpProvenance;

/**
 * Status code returned by every entry point.
 */
typedef enum RpStatus {
  RP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RP_STATUS_NULL_POINTER = 1,
  /**
   * Parameter validation failed (bad sizes, indices, negative values…).
   */
  RP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Arguments outside the mathematical domain (negative times, table
   * range exceeded).
   */
  RP_STATUS_OUT_OF_DOMAIN = 3,
  /**
   * The requested quantity is not defined for this pathway.
   */
  RP_STATUS_UNSUPPORTED_PATHWAY = 4,
  /**
   * An internal invariant failed; report this as a bug.
   */
  RP_STATUS_INTERNAL = 5,
} RpStatus;

/**
 * Opaque engine handle.
 */
typedef struct RpEngine RpEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build an engine for a multilevel system on an overdamped-Brownian-
 * oscillator bath.
 *
 * `omega_cm` and `dipole` are arrays of `n_levels` entries. `correlation`
 * may be null (uncorrelated levels) or an `n_levels²` row-major matrix of
 * coefficients in [−1, 1] with unit diagonal. `pathway_i` / `pathway_j`
 * are 1-based level indices of the rephasing pathway. `lambda_cm = 0`
 * gives the bath-free limit.
 *
 * # Safety
 * `omega_cm` and `dipole` must point to `n_levels` doubles;
 * `correlation`, when non-null, to `n_levels * n_levels` doubles. On
 * success `*out` owns the engine and must be released with
 * [`rp_engine_free`].
 */
enum RpStatus rp_engine_new_obo(const double *omega_cm,
                                const double *dipole,
                                size_t n_levels,
                                const double *correlation,
                                size_t pathway_i,
                                size_t pathway_j,
                                double lambda_cm,
                                double tau_corr_fs,
                                double temperature_k,
                                double rotating_frame_cm,
                                struct RpEngine **out);

/**
 * Release an engine. Passing null is a no-op.
 *
 * # Safety
 * `engine` must be null or a pointer obtained from an engine constructor
 * that has not been freed yet.
 */
void rp_engine_free(struct RpEngine *engine);

/**
 * Optical coherence ρ_ig(t) of `level` (1-based).
 *
 * # Safety
 * `engine` must be a live engine; `re`/`im` must be writable.
 */
enum RpStatus rp_engine_linear_coherence(const struct RpEngine *engine,
                                         size_t level,
                                         double t_fs,
                                         double *re,
                                         double *im);

/**
 * Exact rephasing response R₂(t, T, τ) for the engine's pathway.
 *
 * # Safety
 * `engine` must be a live engine; `re`/`im` must be writable.
 */
enum RpStatus rp_engine_r2_exact(const struct RpEngine *engine,
                                 double tau_fs,
                                 double t_wait_fs,
                                 double t_fs,
                                 double *re,
                                 double *im);

/**
 * Ground-state-projector response; defined for diagonal pathways only.
 *
 * # Safety
 * `engine` must be a live engine; `re`/`im` must be writable.
 */
enum RpStatus rp_engine_r2_rdm(const struct RpEngine *engine,
                               double tau_fs,
                               double t_wait_fs,
                               double t_fs,
                               double *re,
                               double *im);

/**
 * Second-interval relaxation coefficient 𝒦₂(T, τ), rad/fs.
 *
 * # Safety
 * `engine` must be a live engine; `re`/`im` must be writable.
 */
enum RpStatus rp_engine_k2(const struct RpEngine *engine,
                           double t_wait_fs,
                           double tau_fs,
                           double *re,
                           double *im);

/**
 * Third-interval relaxation coefficient 𝒦₃(t, T, τ), rad/fs.
 *
 * # Safety
 * `engine` must be a live engine; `re`/`im` must be writable.
 */
enum RpStatus rp_engine_k3(const struct RpEngine *engine,
                           double t_fs,
                           double t_wait_fs,
                           double tau_fs,
                           double *re,
                           double *im);

/**
 * Sweep the response over a (τ, t) grid at one waiting time, filling the
 * caller's `tau_count * t_count` buffers row-major (τ outer, t inner).
 * `rk_step_fs` only matters for `RP_PROVENANCE_PROPAGATED`.
 *
 * # Safety
 * `engine` must be a live engine; `out_re` and `out_im` must point to
 * `tau_count * t_count` writable doubles each.
 */
enum RpStatus rp_engine_response_field(const struct RpEngine *engine,
                                       enum RpProvenance provenance,
                                       double tau_step_fs,
                                       size_t tau_count,
                                       double t_step_fs,
                                       size_t t_count,
                                       double t_wait_fs,
                                       double rk_step_fs,
                                       double *out_re,
                                       double *out_im);

/**
 * Line-broadening function g(t) of the OBO model (standalone, no engine).
 *
 * # Safety
 * `re`/`im` must be writable.
 */
enum RpStatus rp_obo_g(double lambda_cm,
                       double tau_corr_fs,
                       double temperature_k,
                       double t_fs,
                       double *re,
                       double *im);

/**
 * First derivative ġ(t) of the OBO line-broadening function, rad/fs.
 *
 * # Safety
 * `re`/`im` must be writable.
 */
enum RpStatus rp_obo_gdot(double lambda_cm,
                          double tau_corr_fs,
                          double temperature_k,
                          double t_fs,
                          double *re,
                          double *im);

/**
 * Static human-readable description of a status code.
 */
const char *rp_status_message(enum RpStatus status);

/**
 * Library version as a static nul-terminated string.
 */
const char *rp_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* REPHASE_H */
