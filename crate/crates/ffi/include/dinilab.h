#ifndef DINILAB_H
#define DINILAB_H

/* This file is generated by cbindgen from the dinilab-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum {
  DINILAB_OK = 0,
  DINILAB_ERR_CONFIG = 2,
  DINILAB_ERR_NUMERIC = 3,
  DINILAB_ERR_NULL_ARG = 4,
  DINILAB_ERR_UTF8 = 5,
  DINILAB_ERR_BUFFER = 6,
  DINILAB_ERR_PANIC = 7,
} DinilabStatus;

// Opaque handle to a catalog solution case.
typedef struct DinilabCase DinilabCase;

// Opaque handle to a boundary domain.
typedef struct DinilabDomain DinilabDomain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. The pointer stays
// valid until the next failing call on the same thread.
const char *dinilab_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *dinilab_version(void);

// Opens a named catalog case (`imz_kappa<k>` or `disk_eigen_k<k>_m<m>`).
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
DinilabStatus dinilab_case_open(const char *name, DinilabCase **out);

// Frees a case handle (accepts NULL).
//
// # Safety
// `case` must come from `dinilab_case_open` and not be freed twice.
void dinilab_case_free(DinilabCase *case_);

// M bound of the case (alpha defaults to sqrt(M)).
//
// # Safety
// `case` must be a valid handle.
double dinilab_case_m_bound(const DinilabCase *case_);

// Known vanishing order of the case.
//
// # Safety
// `case` must be a valid handle.
uint32_t dinilab_case_kappa(const DinilabCase *case_);

// Frequency trace at the case's anchor: fills h_out, i_out, n_out (each of
// length `len`) for the given ascending radii. Pass `alpha` <= -1 to use
// the default sqrt(M).
//
// # Safety
// All array pointers must reference `len` valid doubles.
DinilabStatus dinilab_case_trace(const DinilabCase *case_,
                                 const double *radii,
                                 uintptr_t len,
                                 double alpha,
                                 double *h_out,
                                 double *i_out,
                                 double *n_out);

// Fits the adjusted-frequency monotonicity constants over the given radii.
// Writes (C1, C2, max_violation); fails with a numeric status when no
// constants in [0, 1e3]^2 work.
//
// # Safety
// Pointer arguments must be valid; `radii` must reference `len` doubles.
DinilabStatus dinilab_case_monotonicity(const DinilabCase *case_,
                                        const double *radii,
                                        uintptr_t len,
                                        double alpha,
                                        double *c1_out,
                                        double *c2_out,
                                        double *violation_out);

// Vanishing order via the dyadic iteration from r0 over q_max halvings.
//
// # Safety
// `case` and `order_out` must be valid pointers.
DinilabStatus dinilab_case_order(const DinilabCase *case_,
                                 double r0,
                                 uintptr_t q_max,
                                 double *order_out);

// Weighted height H(r) of the case at its anchor; `alpha` <= -1 selects
// the default sqrt(M).
//
// # Safety
// `case` and `out` must be valid pointers.
DinilabStatus dinilab_case_height(const DinilabCase *case_, double r, double alpha, double *out);

// Opens a domain from its JSON catalog spec, e.g.
// `{"kind": "power", "beta": 0.5, "R0": 0.4}`.
//
// # Safety
// `spec_json` must be NUL-terminated; `out` must be valid.
DinilabStatus dinilab_domain_open_json(const char *spec_json, DinilabDomain **out);

// Frees a domain handle (accepts NULL).
//
// # Safety
// `domain` must come from `dinilab_domain_open_json`, freed once.
void dinilab_domain_free(DinilabDomain *domain);

// Largest dyadic radius with Lambda below 1/1000.
//
// # Safety
// `domain` must be a valid handle.
double dinilab_domain_r0_effective(const DinilabDomain *domain);

// Lambda(r): the normal-oscillation majorant floored by sqrt(r).
//
// # Safety
// `domain` and `out` must be valid pointers.
DinilabStatus dinilab_domain_lambda(const DinilabDomain *domain, double r, double *out);

// Star-shapedness margin over `samples` boundary points: writes the
// normalized (min, max) and whether both lie inside [1/2, 10].
//
// # Safety
// Pointer arguments must be valid.
DinilabStatus dinilab_domain_star_margin(const DinilabDomain *domain,
                                         double r,
                                         uintptr_t samples,
                                         double *min_out,
                                         double *max_out,
                                         bool *pass_out);

// Serializes the constants ledger for (lambda, K) over the domain into a
// caller buffer as JSON. `written` receives the required byte count
// (excluding the NUL); returns the buffer status when `buf_len` is too
// small, leaving `written` set so the caller can retry.
//
// # Safety
// `buf` must reference `buf_len` writable bytes (may be NULL to query the
// size); `written` must be valid.
DinilabStatus dinilab_ledger_json(const DinilabDomain *domain,
                                  double lambda,
                                  double lipschitz_k,
                                  char *buf,
                                  uintptr_t buf_len,
                                  uintptr_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DINILAB_H */
