#ifndef MOMENTVAR_H
#define MOMENTVAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MvMethod {
  MV_METHOD_GD = 0,
  MV_METHOD_WILLINK = 1,
  MV_METHOD_CUMULANT = 2,
} MvMethod;

typedef enum MvStatus {
  MV_STATUS_OK = 0,
  MV_STATUS_NULL_POINTER = 1,
  MV_STATUS_INVALID_UTF8 = 2,
  MV_STATUS_INVALID_ARGUMENT = 3,
  MV_STATUS_PARSE = 4,
  MV_STATUS_DOMAIN = 5,
  MV_STATUS_PANIC = 6,
} MvStatus;

// Opaque moment vector.
typedef struct MvMomentVector MvMomentVector;

// One census row plus the certified rank.
typedef struct MvDefectRow {
  uint64_t n;
  uint64_t k;
  uint32_t d;
  uint64_t par;
  uint64_t ambient;
  uint64_t expected;
  uint64_t dim;
  uint64_t delta;
  uint64_t par_minus_dim;
} MvDefectRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or null. Owned by the
// library; valid until the next call on the same thread.
const char *mv_last_error_message(void);

const char *mv_version(void);

uint64_t mv_default_prime(void);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void mv_string_free(char *s);

// Moments up to order `d` of the mixture described by `params_json`.
//
// # Safety
// `params_json` must be a NUL-terminated string; `out` must be writable.
enum MvStatus mv_moments_from_params_json(const char *params_json,
                                          uint32_t d,
                                          struct MvMomentVector **out);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum MvStatus mv_moments_from_json(const char *json, struct MvMomentVector **out);

// # Safety
// `m` must be a live handle; `out` must be writable. Free the result with
// `mv_string_free`.
enum MvStatus mv_moments_to_json(const struct MvMomentVector *m, char **out);

// # Safety
// `m` must be a live handle or null.
uint64_t mv_moments_n(const struct MvMomentVector *m);

// # Safety
// `m` must be a live handle or null.
uint32_t mv_moments_d(const struct MvMomentVector *m);

// Number of stored moments, including m_0.
//
// # Safety
// `m` must be a live handle or null.
uint64_t mv_moments_len(const struct MvMomentVector *m);

// # Safety
// `m` must be null or a handle from this library, freed once.
void mv_moments_free(struct MvMomentVector *m);

// Whether `m` lies on the Gaussian moment variety of its `n` and `d`.
//
// # Safety
// `m` must be a live handle; `is_member` must be writable.
enum MvStatus mv_check_membership(const struct MvMomentVector *m,
                                  enum MvMethod method,
                                  bool *is_member);

// Dimension of the k-th secant of the Gaussian moment variety. `prime == 0`
// selects the default prime.
//
// # Safety
// `out` must be writable.
enum MvStatus mv_secant_dimension(uint64_t n,
                                  uint32_t d,
                                  uint64_t k,
                                  uint64_t prime,
                                  uint64_t seed,
                                  uint32_t trials,
                                  struct MvDefectRow *out);

// # Safety
// `out` must be writable.
enum MvStatus mv_dim_formula_d3(int64_t n, int64_t k, int64_t *out);

// # Safety
// `out` must be writable.
enum MvStatus mv_defect_identity_d3(int64_t n, int64_t k, int64_t *out);

// # Safety
// `out` must be writable.
enum MvStatus mv_conjecture_eleven_defect(int64_t n, int64_t r, int64_t *out);

// # Safety
// `out` must be writable.
enum MvStatus mv_degree_sec2_g1(int64_t d, int64_t *out);

// # Safety
// `out` must be writable.
enum MvStatus mv_degree_sec2_x(int64_t d, int64_t *out);

// # Safety
// `out` must be writable.
enum MvStatus mv_degree_sec3_x(int64_t d, int64_t *out);

// Recovers a two-component mixture from moments of order three, given the
// first coordinates of both means as rational strings. The result is the
// parameter JSON with an extra `residual` field.
//
// # Safety
// `m` must be a live handle, `mu11`/`mu21` NUL-terminated strings and `out`
// writable. Free the result with `mv_string_free`.
enum MvStatus mv_recover_json(const struct MvMomentVector *m,
                              const char *mu11,
                              const char *mu21,
                              char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOMENTVAR_H */
