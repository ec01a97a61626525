/* C interface to the topovec persistent-homology library. */

#ifndef TOPOVEC_H
#define TOPOVEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Subsample strategy selector: 0 = uniform random, 1 = greedy max-min.
 */
#define TV_SUBSAMPLE_RANDOM 0

#define TV_SUBSAMPLE_MAXMIN 1

/**
 * Statistic selector: 0 = L2 norm of the mean difference, 1 = sup norm.
 */
#define TV_STAT_L2_MEAN_DIFF 0

#define TV_STAT_SUP_MEAN_DIFF 1

/**
 * Result of every fallible call. Non-zero means failure; the reason is
 * available from `tv_last_error_message` on the same thread.
 */
typedef enum tv_status {
  TV_OK = 0,
  /**
   * Invalid argument or precondition violation.
   */
  TV_ARGUMENT = 1,
  /**
   * Unreadable, malformed, or empty input data.
   */
  TV_DATA = 2,
  /**
   * Internal invariant failure.
   */
  TV_INTERNAL = 3,
  /**
   * A required pointer was null.
   */
  TV_NULL_POINTER = 4,
} tv_status;

/**
 * Opaque point-cloud handle.
 */
typedef struct tv_cloud tv_cloud;

/**
 * Opaque handle to the persistence diagrams of one filtration,
 * one diagram per homology degree.
 */
typedef struct tv_diagram_set tv_diagram_set;

/**
 * Opaque handle to the persistence landscape of one diagram.
 */
typedef struct tv_landscape tv_landscape;

/**
 * Outcome of a two-sample permutation test.
 */
typedef struct tv_test_result {
  /**
   * Observed statistic between the two groups as given.
   */
  double statistic;
  /**
   * Proportion of splits scoring at least the observed statistic.
   */
  double p_value;
  /**
   * Splits evaluated (all of them when exhaustive is nonzero).
   */
  uint64_t n_permutations;
  /**
   * 1 when every split was enumerated, 0 for Monte Carlo sampling.
   */
  int32_t exhaustive;
  uint64_t seed;
} tv_test_result;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *tv_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tv_version(void);

/**
 * Load a point cloud from a CSV file of comma-separated coordinates,
 * one point per row. `skip_header` skips the first row.
 */
enum tv_status tv_cloud_load(const char *path, bool skip_header, struct tv_cloud **out);

/**
 * Build a cloud from a row-major coordinate buffer of
 * `n_points * dim` doubles.
 */
enum tv_status tv_cloud_from_coords(const double *coords,
                                    size_t n_points,
                                    size_t dim,
                                    struct tv_cloud **out);

/**
 * Sample a noisy circle with optional uniform outliers (seeded).
 */
enum tv_status tv_cloud_sample_circle(size_t n,
                                      double radius,
                                      double noise_sd,
                                      size_t outliers,
                                      uint64_t seed,
                                      struct tv_cloud **out);

/**
 * Sample a wedge of `k` circles, `n_per` points on each.
 */
enum tv_status tv_cloud_sample_wedge(size_t k,
                                     size_t n_per,
                                     double radius,
                                     double noise_sd,
                                     size_t outliers,
                                     uint64_t seed,
                                     struct tv_cloud **out);

/**
 * Number of points, or 0 for a null handle.
 */
size_t tv_cloud_len(const struct tv_cloud *cloud);

/**
 * Ambient dimension, or 0 for a null handle.
 */
size_t tv_cloud_dim(const struct tv_cloud *cloud);

/**
 * Subsample `m` points into a new cloud handle.
 */
enum tv_status tv_cloud_subsample(const struct tv_cloud *cloud,
                                  size_t m,
                                  uint32_t strategy,
                                  uint64_t seed,
                                  struct tv_cloud **out);

void tv_cloud_free(struct tv_cloud *cloud);

/**
 * Compute Vietoris-Rips persistence diagrams for degrees 0..=max_degree.
 * Filtration values are simplex diameters (largest pairwise distance).
 * A negative `max_value` means the cloud's largest pairwise distance.
 */
enum tv_status tv_persistence(const struct tv_cloud *cloud,
                              size_t max_dim,
                              double max_value,
                              size_t max_degree,
                              struct tv_diagram_set **out);

/**
 * Number of finite (birth, death) pairs in one degree; 0 if the degree
 * was not computed.
 */
size_t tv_diagram_point_count(const struct tv_diagram_set *set, size_t degree);

/**
 * Copy the finite pairs of one degree into `buffer` as birth,death pairs
 * (2 doubles per point). `capacity` is the buffer length in doubles;
 * `written` receives the number of doubles written.
 */
enum tv_status tv_diagram_points(const struct tv_diagram_set *set,
                                 size_t degree,
                                 double *buffer,
                                 size_t capacity,
                                 size_t *written);

/**
 * Number of essential (never-dying) classes in one degree.
 */
size_t tv_diagram_essential_count(const struct tv_diagram_set *set, size_t degree);

void tv_diagram_set_free(struct tv_diagram_set *set);

/**
 * Copy the descending degree-0 death vector into `buffer`. When `buffer`
 * is null, only reports the required length through `written`.
 */
enum tv_status tv_death_vector(const struct tv_diagram_set *set,
                               double *buffer,
                               size_t capacity,
                               size_t *written);

/**
 * Build the exact piecewise-linear landscape of one homology degree.
 */
enum tv_status tv_landscape_build(const struct tv_diagram_set *set,
                                  size_t degree,
                                  struct tv_landscape **out);

/**
 * Number of nonzero landscape functions.
 */
size_t tv_landscape_count(const struct tv_landscape *ls);

/**
 * λ_k(t) for 1-based k; 0 beyond the last function or for a null handle.
 */
double tv_landscape_evaluate(const struct tv_landscape *ls, size_t k, double t);

/**
 * Evaluate λ_1..λ_k on the grid t = a, a+delta, …, a+m·delta and write the
 * k·(m+1) values function-by-function into `buffer`.
 */
enum tv_status tv_landscape_vectorize(const struct tv_landscape *ls,
                                      size_t k,
                                      double a,
                                      double delta,
                                      size_t m,
                                      double *buffer,
                                      size_t capacity);

void tv_landscape_free(struct tv_landscape *ls);

/**
 * Two-sample permutation test over row-major feature vectors: the first
 * `n_a` rows form group A, the next `n_b` rows group B, each of `dim`
 * doubles. Exhaustive over all splits when feasible, else seeded Monte
 * Carlo with `n_permutations` draws.
 */
enum tv_status tv_permutation_test(const double *vectors,
                                   size_t n_a,
                                   size_t n_b,
                                   size_t dim,
                                   uint32_t statistic,
                                   size_t n_permutations,
                                   uint64_t seed,
                                   struct tv_test_result *out);

/**
 * Stratified k-fold cross-validated linear SVM accuracy over row-major
 * feature vectors with 0/1 labels. Writes the mean held-out accuracy.
 */
enum tv_status tv_cross_validate(const double *vectors,
                                 const uint8_t *labels,
                                 size_t rows,
                                 size_t dim,
                                 size_t folds,
                                 double lambda,
                                 size_t epochs,
                                 uint64_t seed,
                                 double *out_accuracy);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TOPOVEC_H */
