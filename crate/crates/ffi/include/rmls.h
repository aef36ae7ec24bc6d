#ifndef RMLS_H
#define RMLS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RmlsMode {
  RMLS_MODE_GENERAL = 0,
  RMLS_MODE_POSITIVE_DEFINITE = 1,
} RmlsMode;

typedef enum RmlsStatus {
  RMLS_STATUS_OK = 0,
  RMLS_STATUS_NULL_POINTER = 1,
  RMLS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Input failed a mathematical precondition such as Hermiticity or norm.
   */
  RMLS_STATUS_VALIDATION = 3,
  /**
   * Post-selection exhausted its attempts.
   */
  RMLS_STATUS_POST_SELECTION = 4,
  RMLS_STATUS_IO = 5,
  /**
   * Output buffer shorter than required; nothing was written.
   */
  RMLS_STATUS_BUFFER_TOO_SMALL = 6,
  RMLS_STATUS_PANIC = 7,
} RmlsStatus;

typedef enum RmlsVariant {
  RMLS_VARIANT_GROUND_STATE = 0,
  RMLS_VARIANT_GAP_AMPLIFIED = 1,
} RmlsVariant;

/**
 * Opaque instance handle.
 */
typedef struct RmlsInstance RmlsInstance;

typedef struct RmlsEnsembleSummary {
  /**
   * Trace distance of the reduced output to `|x><x|`.
   */
  double error;
  double expected_total_time;
  double full_space_fidelity;
  uintptr_t q;
} RmlsEnsembleSummary;

typedef struct RmlsGateCost {
  double tau;
  uint64_t segments;
  uint32_t truncation_order;
  uint64_t queries;
} RmlsGateCost;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failed call on this thread; empty after a
 * success. Valid until the next `rmls_*` call on this thread.
 */
const char *rmls_last_error(void);

/**
 * Generates an instance with `2^n` rows, at most `d` nonzeros per row and
 * condition number within `kappa_tol` of `kappa`, drawing at most
 * `max_attempts` candidates (0 selects the library default).
 *
 * # Safety
 * `out` must be valid for writes; on success it receives a new handle.
 */
enum RmlsStatus rmls_instance_generate(uint32_t n,
                                       uintptr_t d,
                                       double kappa,
                                       double kappa_tol,
                                       uint64_t seed,
                                       uintptr_t max_attempts,
                                       struct RmlsInstance **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum RmlsStatus rmls_instance_load(const char *path, struct RmlsInstance **out);

/**
 * # Safety
 * `inst` must be a live handle and `path` a NUL-terminated string.
 */
enum RmlsStatus rmls_instance_save(const struct RmlsInstance *inst, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `inst` must be null or a handle not yet freed.
 */
void rmls_instance_free(struct RmlsInstance *inst);

/**
 * # Safety
 * `inst` must be a live handle and `out` valid for writes.
 */
enum RmlsStatus rmls_instance_kappa(const struct RmlsInstance *inst, double *out);

/**
 * Dimension `N` of the linear system.
 *
 * # Safety
 * `inst` must be a live handle and `out` valid for writes.
 */
enum RmlsStatus rmls_instance_dim(const struct RmlsInstance *inst, uintptr_t *out);

/**
 * Writes the normalized solution `|x>` as separate real and imaginary parts.
 *
 * # Safety
 * `re` and `im` must each be valid for `len` writes.
 */
enum RmlsStatus rmls_instance_exact_solution(const struct RmlsInstance *inst,
                                             double *re,
                                             double *im,
                                             uintptr_t len);

/**
 * Runs `n_rep` repetitions over a `q`-step schedule on the global thread pool.
 *
 * # Safety
 * `inst` must be a live handle and `out` valid for writes.
 */
enum RmlsStatus rmls_run_ensemble(const struct RmlsInstance *inst,
                                  enum RmlsVariant variant,
                                  enum RmlsMode mode,
                                  uintptr_t q,
                                  uintptr_t n_rep,
                                  uint64_t master_seed,
                                  struct RmlsEnsembleSummary *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum RmlsStatus rmls_s_of_v(double v, double kappa, double *out);

/**
 * # Safety
 * `v_a` and `v_b` must be valid for writes.
 */
enum RmlsStatus rmls_v_bounds(double kappa, double *v_a, double *v_b);

/**
 * `(1-s)^2 + (s/kappa)^2`.
 */
double rmls_gap_lower_bound(double s, double kappa);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum RmlsStatus rmls_gate_cost(double total_time,
                               uintptr_t d,
                               double epsilon,
                               struct RmlsGateCost *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RMLS_H */
