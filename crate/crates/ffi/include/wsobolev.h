#ifndef WSOBOLEV_H
#define WSOBOLEV_H

/* Generated by cbindgen from the wsobolev-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible FFI call.
 */
typedef enum WsStatus {
  /**
   * Success.
   */
  WS_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  WS_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  WS_STATUS_INVALID_UTF8 = 2,
  /**
   * Invalid configuration or input (bad JSON, bad measure, bad field).
   */
  WS_STATUS_INVALID_INPUT = 3,
  /**
   * A mathematical invariant failed while computing.
   */
  WS_STATUS_INVARIANT_VIOLATION = 4,
  /**
   * Unexpected internal failure.
   */
  WS_STATUS_INTERNAL = 5,
} WsStatus;

/**
 * Opaque handle to a scalar field.
 */
typedef struct WsField WsField;

/**
 * Opaque handle to a structured measure.
 */
typedef struct WsMeasure WsMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len` bytes). Returns the full message length in bytes.
 */
uintptr_t ws_last_error_message(char *buf, uintptr_t len);

/**
 * Build a measure from a catalog id (see the CLI `--list-catalog`).
 *
 * On success writes a new handle to `out`; release with `ws_measure_free`.
 */
enum WsStatus ws_measure_catalog(const char *id, struct WsMeasure **out);

/**
 * Build a measure from a JSON measure spec.
 */
enum WsStatus ws_measure_from_json(const char *json, struct WsMeasure **out);

/**
 * Release a measure handle. NULL is a no-op.
 */
void ws_measure_free(struct WsMeasure *handle);

/**
 * Ambient dimension of the measure; 0 on NULL.
 */
uintptr_t ws_measure_dim(const struct WsMeasure *handle);

/**
 * Total quadrature mass of the measure at the default resolution.
 */
enum WsStatus ws_measure_mass(const struct WsMeasure *handle, double *out);

/**
 * Build a field of ambient dimension `dim` from a JSON field spec.
 */
enum WsStatus ws_field_from_json(const char *json, uintptr_t dim, struct WsField **out);

/**
 * Release a field handle. NULL is a no-op.
 */
void ws_field_free(struct WsField *handle);

/**
 * Evaluate the field at a point of length `dim`.
 */
enum WsStatus ws_field_value(const struct WsField *handle,
                             const double *point,
                             uintptr_t dim,
                             double *out);

/**
 * Evaluate the analytic gradient at a point; `out` must hold `dim` values.
 */
enum WsStatus ws_field_gradient(const struct WsField *handle,
                                const double *point,
                                uintptr_t dim,
                                double *out);

/**
 * E_lip(f; p) = ½ ∫ lip_p(f)² dμ at the default resolution.
 * `p` is 1, 2, or 0 for the ∞-norm.
 */
enum WsStatus ws_energy_lip(const struct WsMeasure *measure,
                            const struct WsField *field,
                            uint32_t p,
                            double *out);

/**
 * Projected-gradient energy ½ ∫ |π_{V(μ,x)} ∇f|² dμ at the default
 * resolution.
 */
enum WsStatus ws_energy_projected(const struct WsMeasure *measure,
                                  const struct WsField *field,
                                  double *out);

/**
 * Parallelogram defect E(f+g) + E(f−g) − 2E(f) − 2E(g) of the Lipschitz
 * energy. `p` as in `ws_energy_lip`.
 */
enum WsStatus ws_parallelogram_defect(const struct WsMeasure *measure,
                                      const struct WsField *f,
                                      const struct WsField *g,
                                      uint32_t p,
                                      double *out);

/**
 * Closability verdict for the measure's Sobolev form from the transversal
 * vanishing-sequence probe: writes 1 for NOT_CLOSABLE (with a replayable
 * witness), 0 for NO_COUNTEREXAMPLE_FOUND.
 */
enum WsStatus ws_closability_probe(const struct WsMeasure *measure, int32_t *out_not_closable);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WSOBOLEV_H */
