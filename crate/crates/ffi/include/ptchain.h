#ifndef PTCHAIN_H
#define PTCHAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PtcStatus {
  PTC_STATUS_OK = 0,
  PTC_STATUS_USAGE = 1,
  PTC_STATUS_CONSISTENCY = 2,
  PTC_STATUS_NOT_CONVERGED = 3,
  PTC_STATUS_REFUSED = 4,
  PTC_STATUS_NEAR_DEFECTIVE = 5,
  PTC_STATUS_VERIFICATION = 6,
  PTC_STATUS_IO = 7,
  PTC_STATUS_NULL_POINTER = 8,
  PTC_STATUS_BUFFER_TOO_SMALL = 9,
  PTC_STATUS_PANIC = 10,
} PtcStatus;

typedef enum PtcVerdict {
  PTC_VERDICT_REAL_SIMPLE = 0,
  PTC_VERDICT_REAL_DEGENERATE = 1,
  PTC_VERDICT_COMPLEX = 2,
} PtcVerdict;

/**
 * Opaque chain handle.
 */
typedef struct PtcChain PtcChain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread (empty after success).
 * Owned by the library; valid until the next call on this thread.
 */
const char *ptc_last_error(void);

/**
 * Symmetrized chain of dimension `n` from `n / 2` coupling values listed
 * central first.
 *
 * # Safety
 * `couplings` must point to `len` NUL-terminated strings; `out` must be writable.
 */
enum PtcStatus ptc_chain_symmetrized(size_t n,
                                     const char *const *couplings,
                                     size_t len,
                                     struct PtcChain **out);

/**
 * Symmetrized chain from `n / 2` squared couplings listed central first.
 *
 * # Safety
 * As for [`ptc_chain_symmetrized`].
 */
enum PtcStatus ptc_chain_symmetrized_squared(size_t n,
                                             const char *const *squared,
                                             size_t len,
                                             struct PtcChain **out);

/**
 * General PT chain from `len` coupling values in chain order (dimension `len + 1`).
 *
 * # Safety
 * As for [`ptc_chain_symmetrized`].
 */
enum PtcStatus ptc_chain_general_pt(const char *const *couplings,
                                    size_t len,
                                    struct PtcChain **out);

/**
 * Arbitrary tridiagonal matrix of dimension `n`: `n` diagonal entries and
 * `n - 1` super- and sub-diagonal entries.
 *
 * # Safety
 * `diag` must hold `n` strings, `sup` and `sub` `n - 1` each; `out` must be writable.
 */
enum PtcStatus ptc_chain_tridiagonal(size_t n,
                                     const char *const *diag,
                                     const char *const *sup,
                                     const char *const *sub,
                                     struct PtcChain **out);

/**
 * Releases a chain. Null is ignored.
 *
 * # Safety
 * `chain` must come from a `ptc_chain_*` constructor and not be used afterwards.
 */
void ptc_chain_free(struct PtcChain *chain);

/**
 * Matrix dimension, or 0 for a null handle.
 *
 * # Safety
 * `chain` must be null or a live handle.
 */
size_t ptc_chain_dim(const struct PtcChain *chain);

/**
 * Exact spectral verdict.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
enum PtcStatus ptc_classify(const struct PtcChain *chain, enum PtcVerdict *out);

/**
 * Numeric eigenvalues, sorted by real part; `re` and `im` must each hold
 * `cap >= dim` doubles.
 *
 * # Safety
 * `re` and `im` must be writable for `cap` elements.
 */
enum PtcStatus ptc_eigenvalues(const struct PtcChain *chain, double *re, double *im, size_t cap);

/**
 * Closed-form squared EEP couplings (central first) into `out`, which
 * must hold `cap >= n / 2` values.
 *
 * # Safety
 * `out` must be writable for `cap` elements.
 */
enum PtcStatus ptc_eep_squared_couplings(size_t n, uint64_t *out, size_t cap);

/**
 * Exact EEP verification; `passed` is set to 1 when every check holds.
 * A failed check is reported through `passed`, not the status.
 *
 * # Safety
 * `passed` must be writable.
 */
enum PtcStatus ptc_eep_verify(size_t n, int *passed);

/**
 * Metric operator at a real-simple point. `weights` may be null (all
 * ones); otherwise it holds `dim` positive values. `theta` receives the
 * `dim * dim` matrix row-major; `residual` and `min_eigenvalue` may be null.
 *
 * # Safety
 * Pointers must be valid for the stated sizes.
 */
enum PtcStatus ptc_metric(const struct PtcChain *chain,
                          const double *weights,
                          double *theta,
                          size_t cap,
                          double *residual,
                          double *min_eigenvalue);

/**
 * Runs a job given as a JSON configuration (the `ptchain --config`
 * schema, including `command`). The payload is returned in `out_body`
 * (release with [`ptc_string_free`]) and the command's exit code in
 * `exit_code` (0 success, 2 verification failure).
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; outputs must be writable.
 */
enum PtcStatus ptc_run_job(const char *config_json, char **out_body, int *exit_code);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void ptc_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *ptc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PTCHAIN_H */
