#ifndef RANKCALM_H
#define RANKCALM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcStatus {
  RC_STATUS_OK = 0,
  RC_STATUS_NULL_POINTER = 1,
  RC_STATUS_INVALID_ARGUMENT = 2,
  RC_STATUS_DIMENSION = 3,
  RC_STATUS_PARSE = 4,
  RC_STATUS_NON_CONVERGENCE = 5,
  RC_STATUS_PRECONDITION = 6,
  RC_STATUS_REFUSED = 7,
  RC_STATUS_IO = 8,
  RC_STATUS_PANIC = 9,
} RcStatus;

typedef enum RcOutcome {
  RC_OUTCOME_TRIVIAL_INTERSECTION = 0,
  RC_OUTCOME_WITNESS_FOUND = 1,
  RC_OUTCOME_INCONCLUSIVE = 2,
} RcOutcome;

// Opaque dense matrix.
typedef struct RcMatrix RcMatrix;

// Opaque constraint set.
typedef struct RcSet RcSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rc_version(void);

// Message of the last failed call on this thread, or NULL. Valid until
// the next call into the library on the same thread.
const char *rc_last_error_message(void);

// Copies `rows * cols` row-major values. A nonzero `symmetric` requests
// symmetric storage, which needs a square input symmetric within 1e-12.
//
// # Safety
// `data` must point to `rows * cols` readable doubles; `out_matrix`
// must be writable.
enum RcStatus rc_matrix_new(size_t rows,
                            size_t cols,
                            const double *data,
                            int32_t symmetric,
                            struct RcMatrix **out_matrix);

// # Safety
// `m` must come from this library and not be freed twice. NULL is ignored.
void rc_matrix_free(struct RcMatrix *m);

// # Safety
// `m` must be a live handle or NULL (which yields 0).
size_t rc_matrix_rows(const struct RcMatrix *m);

// # Safety
// `m` must be a live handle or NULL (which yields 0).
size_t rc_matrix_cols(const struct RcMatrix *m);

// Writes the entries row-major into `buf`, which holds `len` doubles.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum RcStatus rc_matrix_copy_data(const struct RcMatrix *m, double *buf, size_t len);

// Builds a set from a key=value block such as `family = correlation\nn = 3`.
// Relative data-file paths resolve against the working directory.
//
// # Safety
// `text` must be a NUL-terminated string; `out_set` must be writable.
enum RcStatus rc_set_parse(const char *text, struct RcSet **out_set);

// # Safety
// `s` must come from this library and not be freed twice. NULL is ignored.
void rc_set_free(struct RcSet *s);

// Sum of the r largest singular values.
//
// # Safety
// `m` must be a live handle; `out_value` must be writable.
enum RcStatus rc_kyfan_norm(const struct RcMatrix *m, size_t r, double *out_value);

// θ_r = ‖X‖_* − ‖X‖_(r).
//
// # Safety
// `m` must be a live handle; `out_value` must be writable.
enum RcStatus rc_rank_residual(const struct RcMatrix *m, size_t r, double *out_value);

// η_r = ‖X‖_* − H_r(X).
//
// # Safety
// `m` must be a live handle; `out_value` must be writable.
enum RcStatus rc_truncated_residual(const struct RcMatrix *m, size_t r, double *out_value);

// Nearest point of the set; `tol` bounds the inner iterations where no
// closed form exists.
//
// # Safety
// `s` and `m` must be live handles; `out_matrix` must be writable.
enum RcStatus rc_project_set(const struct RcSet *s,
                             const struct RcMatrix *m,
                             double tol,
                             struct RcMatrix **out_matrix);

// Checks criterion 1 or 2 at a point of Γ_r with automatic method choice.
//
// # Safety
// `s` and `m` must be live handles; `out_outcome` must be writable.
enum RcStatus rc_check_criterion(const struct RcSet *s,
                                 size_t r,
                                 const struct RcMatrix *m,
                                 uint32_t criterion,
                                 enum RcOutcome *out_outcome);

// Frobenius distance from X to Ω ∩ {rank ≤ r}, by enumeration where Γ_r is
// finite and by seeded alternating projections otherwise.
//
// # Safety
// `s` and `m` must be live handles; `out_value` must be writable.
enum RcStatus rc_dist_to_gamma(const struct RcSet *s,
                               size_t r,
                               const struct RcMatrix *m,
                               uint64_t seed,
                               double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANKCALM_H */
