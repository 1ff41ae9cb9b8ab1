#ifndef ISOPERIM_H
#define ISOPERIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum IsoStatus {
  ISO_STATUS_OK = 0,
  ISO_STATUS_NULL_POINTER = 1,
  /*
   Domain error or invalid query.
   */
  ISO_STATUS_INVALID_ARGUMENT = 2,
  ISO_STATUS_BUDGET_EXCEEDED = 3,
  /*
   Two exact computations disagreed; a library bug.
   */
  ISO_STATUS_INCONSISTENT = 4,
  /*
   A string argument was not valid UTF-8 or not a number.
   */
  ISO_STATUS_BAD_STRING = 5,
  ISO_STATUS_PANIC = 6,
} IsoStatus;

/*
 Noise models for [`iso_stab`] and [`iso_gamma_exact`].
 */
typedef enum IsoModel {
  ISO_MODEL_SPHERE = 0,
  ISO_MODEL_BALL = 1,
  ISO_MODEL_IID = 2,
  /*
   Oracle only: `sum_{i<=r} P(i)`.
   */
  ISO_MODEL_CDF = 3,
} IsoModel;

/*
 A subset of the hypercube.
 */
typedef struct IsoCode IsoCode;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after success.
 The pointer stays valid until the next library call on this thread.
 */
const char *iso_last_error(void);

/*
 Library version as a static string.
 */
const char *iso_version(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void iso_string_free(char *s);

/*
 Builds a code from `len` point indices in `[0, 2^n)`.

 # Safety
 `indices` must point to `len` readable values (or be null when `len` is
 0); `out` must be writable.
 */
enum IsoStatus iso_code_from_indices(uint32_t n,
                                     const uint32_t *indices,
                                     size_t len,
                                     struct IsoCode **out);

/*
 `{1}^k x {-1,1}^(n-k)`.

 # Safety
 `out` must be writable.
 */
enum IsoStatus iso_code_subcube(uint32_t n, uint32_t k, struct IsoCode **out);

/*
 Points within distance `radius` of the all-ones point.

 # Safety
 `out` must be writable.
 */
enum IsoStatus iso_code_hamming_ball(uint32_t n, uint32_t radius, struct IsoCode **out);

/*
 Releases a code. Null is ignored.

 # Safety
 `code` must come from this library and not have been freed.
 */
void iso_code_free(struct IsoCode *code);

/*
 Dimension and size of a code.

 # Safety
 `code` must be a live handle; out-pointers may be null.
 */
enum IsoStatus iso_code_info(const struct IsoCode *code, uint32_t *out_n, uint64_t *out_size);

/*
 Copies up to `cap` point indices (ascending) into `buf` and stores the
 full count in `out_len`. Call with `cap = 0` to size the buffer.

 # Safety
 `code` must be a live handle; `buf` must have room for `cap` values;
 `out_len` must be writable.
 */
enum IsoStatus iso_code_indices(const struct IsoCode *code,
                                uint32_t *buf,
                                size_t cap,
                                size_t *out_len);

/*
 Noise stability of a code. `r` is the radius for sphere and ball noise;
 `beta` (`"p/q"` or decimal) is the flip probability for iid noise and
 ignored otherwise.

 # Safety
 `code` must be a live handle; `beta` must be a C string when `model` is
 iid; out-pointers may be null.
 */
enum IsoStatus iso_stab(const struct IsoCode *code,
                        enum IsoModel model,
                        uint32_t r,
                        const char *beta,
                        char **out_text,
                        double *out_value);

/*
 Upper bound on ball-noise stability for sets of size `m` (decimal
 string); `exact` nonzero solves the LP instead of using the closed form.

 # Safety
 `m` must be a C string; out-pointers may be null.
 */
enum IsoStatus iso_lp_upper_bound(uint32_t n,
                                  uint32_t r,
                                  const char *m,
                                  int exact,
                                  char **out_text,
                                  double *out_value);

/*
 `max(psi, 0)` and the maximizing index (0 when the candidate set is empty).

 # Safety
 `m` must be a C string; out-pointers may be null.
 */
enum IsoStatus iso_psi_plus(uint32_t n,
                            uint32_t r,
                            const char *m,
                            char **out_text,
                            double *out_value,
                            uint32_t *out_argmax);

/*
 Exhaustive optimum over all size-`m` subsets with its witness. `budget`
 caps the number of subsets (0 means the library default).

 # Safety
 `m` must be a C string, `beta` a C string when `model` is iid;
 out-pointers may be null. A returned witness must be freed.
 */
enum IsoStatus iso_gamma_exact(uint32_t n,
                               uint32_t r,
                               const char *m,
                               enum IsoModel model,
                               const char *beta,
                               uint64_t budget,
                               char **out_text,
                               double *out_value,
                               struct IsoCode **out_witness);

/*
 `K_k^(n)(x)` as a decimal string.

 # Safety
 `out_text` must be writable.
 */
enum IsoStatus iso_krawtchouk(uint32_t n, uint32_t k, int64_t x, char **out_text);

/*
 Gaussian quadrant probability `P[Z1 > t, Z2 > t]` with `P[Z1 > t] = alpha`.

 # Safety
 `out` must be writable.
 */
enum IsoStatus iso_gaussian_quadrant(double alpha, double rho, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISOPERIM_H */
