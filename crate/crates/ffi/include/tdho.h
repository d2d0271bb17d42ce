#ifndef TDHO_H
#define TDHO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum TdhoStatus {
  TDHO_STATUS_OK = 0,
  TDHO_STATUS_NULL_POINTER = 1,
  TDHO_STATUS_INVALID_ARGUMENT = 2,
  TDHO_STATUS_PARSE = 3,
  TDHO_STATUS_DOMAIN = 4,
  TDHO_STATUS_CAUSTIC = 5,
  TDHO_STATUS_NUMERIC = 6,
  TDHO_STATUS_PANIC = 7,
} TdhoStatus;

// The fundamental pair (u, v) on a time window.
typedef struct TdhoPair TdhoPair;

// A frequency profile ω²(t).
typedef struct TdhoProfile TdhoProfile;

// Values of u, u̇, v, v̇ at one time.
typedef struct TdhoPairState {
  double u;
  double udot;
  double v;
  double vdot;
} TdhoPairState;

// One kernel amplitude. `caustic_flag` is 1 when a caustic lies inside the
// window, so the sign of the prefactor is unverified.
typedef struct TdhoKernelValue {
  double re;
  double im;
  double modulus;
  double phase;
  int32_t caustic_flag;
} TdhoKernelValue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL if it succeeded.
// The pointer stays valid until the next call into this library from the
// same thread.
const char *tdho_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *tdho_version(void);

// Parses a profile from its JSON description, e.g.
// `{"type":"exp_decay","omega0":1,"alpha":0.5}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum TdhoStatus tdho_profile_from_json(const char *json, struct TdhoProfile **out);

// Releases a profile. NULL is ignored.
//
// # Safety
// `profile` must come from [`tdho_profile_from_json`] and not be used afterwards.
void tdho_profile_free(struct TdhoProfile *profile);

// Smooth part of ω²(t), steps included (right-continuous).
//
// # Safety
// `profile` must be a live handle and `out` a valid pointer.
enum TdhoStatus tdho_profile_omega_squared(const struct TdhoProfile *profile,
                                           double t,
                                           double *out);

// Solves for the fundamental pair on [t_a, t_b] with local tolerance `tol`.
//
// # Safety
// `profile` must be a live handle and `out` a valid pointer.
enum TdhoStatus tdho_pair_solve(const struct TdhoProfile *profile,
                                double t_a,
                                double t_b,
                                double tol,
                                struct TdhoPair **out);

// Releases a pair. NULL is ignored.
//
// # Safety
// `pair` must come from [`tdho_pair_solve`] and not be used afterwards.
void tdho_pair_free(struct TdhoPair *pair);

// u, u̇, v, v̇ at `t`. At a δ pulse time the post-kick derivatives are returned.
//
// # Safety
// `pair` must be a live handle and `out` a valid pointer.
enum TdhoStatus tdho_pair_state(const struct TdhoPair *pair, double t, struct TdhoPairState *out);

// Largest |u v̇ − u̇ v − 1| over the audit samples; negative for a NULL handle.
//
// # Safety
// `pair` must be a live handle or NULL.
double tdho_pair_wronskian_drift(const struct TdhoPair *pair);

// K(q_a, t_a; q_b, t_b) by the caustic-robust formula. Solves the classical
// problem internally.
//
// # Safety
// `profile` must be a live handle and `out` a valid pointer.
enum TdhoStatus tdho_kernel_robust(const struct TdhoProfile *profile,
                                   double mass,
                                   double q_a,
                                   double t_a,
                                   double q_b,
                                   double t_b,
                                   struct TdhoKernelValue *out);

// J_ν(x) for ν ≥ 0, x ≥ 0.
//
// # Safety
// `out` must be a valid pointer.
enum TdhoStatus tdho_bessel_j(double nu, double x, double *out);

// Conical function P_{−1/2+iμ}(x) for x in (−1, 1].
//
// # Safety
// `out` must be a valid pointer.
enum TdhoStatus tdho_legendre_p_conical(double mu, double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TDHO_H */
