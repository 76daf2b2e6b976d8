#ifndef NIELSEN_SECTION_H
#define NIELSEN_SECTION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum NsStatus {
  NS_STATUS_OK = 0,
  NS_STATUS_NULL_POINTER = 1,
  NS_STATUS_INVALID_ARGUMENT = 2,
  NS_STATUS_FREE_GROUP = 3,
  NS_STATUS_CHART = 4,
  NS_STATUS_CURVE = 5,
  NS_STATUS_LOOP_CLASS = 6,
  NS_STATUS_CROSS_HOM = 7,
  NS_STATUS_MOD_GROUP = 8,
  NS_STATUS_CONFIG = 9,
  /**
   * `ns_verify` ran but at least one check did not pass.
   */
  NS_STATUS_CHECK_FAILED = 10,
  NS_STATUS_PANIC = 11,
} NsStatus;

/**
 * An automorphism of `F_n`.
 */
typedef struct NsAuto NsAuto;

/**
 * A chart diffeomorphism `F_{i,j}`, `G_j` or sphere twist.
 */
typedef struct NsChartMap NsChartMap;

/**
 * A mapping class `(t, φ)`.
 */
typedef struct NsMappingClass NsMappingClass;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Free with `ns_string_free`.
 */
char *ns_last_error(void);

void ns_string_free(char *s);

/**
 * Static version string; do not free.
 */
const char *ns_version(void);

enum NsStatus ns_auto_identity(size_t rank, struct NsAuto **out);

/**
 * `R_{i,j}: a_i ↦ a_i a_j`.
 */
enum NsStatus ns_auto_r(size_t i, size_t j, size_t rank, struct NsAuto **out);

/**
 * `I_j: a_j ↦ a_j⁻¹`.
 */
enum NsStatus ns_auto_inv(size_t j, size_t rank, struct NsAuto **out);

/**
 * `outer ∘ inner`.
 */
enum NsStatus ns_auto_compose(const struct NsAuto *outer,
                              const struct NsAuto *inner,
                              struct NsAuto **out);

enum NsStatus ns_auto_inverse(const struct NsAuto *a, struct NsAuto **out);

/**
 * Writes 1 to `out` when both automorphisms have the same generator images.
 */
enum NsStatus ns_auto_equal(const struct NsAuto *a, const struct NsAuto *b, int *out);

/**
 * Image of `a_k` as text such as `a1 a2^-1`.
 */
enum NsStatus ns_auto_image_text(const struct NsAuto *a, size_t k, char **out);

/**
 * Applies `a` to a word given as text such as `a1 a2^-1`.
 */
enum NsStatus ns_auto_apply_text(const struct NsAuto *a, const char *word, char **out);

/**
 * All generator images, as `a1↦a1a2, a2↦a2, ..`.
 */
enum NsStatus ns_auto_render(const struct NsAuto *a, char **out);

void ns_auto_free(struct NsAuto *a);

/**
 * A map with default profiles from a name such as `F1,2`, `G1` or `T1`.
 */
enum NsStatus ns_chart_map_new(const char *name, struct NsChartMap **out);

/**
 * `out[0..3] = F(p[0..3])` in chart coordinates.
 */
enum NsStatus ns_chart_map_apply(const struct NsChartMap *map, const double *p, double *out);

/**
 * `out[0..9]` = the Jacobian at `p`, row-major.
 */
enum NsStatus ns_chart_map_jacobian(const struct NsChartMap *map, const double *p, double *out);

void ns_chart_map_free(struct NsChartMap *map);

/**
 * The automorphism induced on `π₁`, read from crossing words. `samples = 0`
 * selects the default density.
 */
enum NsStatus ns_rho_of(const struct NsChartMap *map,
                        size_t rank,
                        size_t samples,
                        struct NsAuto **out);

/**
 * Writes the twist vector (`rank` bytes, each 0 or 1) to `out`.
 */
enum NsStatus ns_twisting_of(const struct NsChartMap *map, size_t rank, uint8_t *out);

/**
 * `Z/2` class of the loop through `count` row-major 3×3 matrices sampled
 * at `t = k / (count - 1)`, interpolated linearly in between.
 */
enum NsStatus ns_loop_class_sampled(const double *matrices, size_t count, int *out);

/**
 * `s(φ) = (0, φ)`.
 */
enum NsStatus ns_class_section(const struct NsAuto *a, struct NsMappingClass **out);

/**
 * Builds `(t, φ)` from `rank` twist bytes (0 or 1) and an automorphism of that rank.
 */
enum NsStatus ns_class_new(const uint8_t *twist,
                           const struct NsAuto *a,
                           struct NsMappingClass **out);

/**
 * The sphere twist about `A_k`.
 */
enum NsStatus ns_class_sphere_twist(size_t rank, size_t k, struct NsMappingClass **out);

enum NsStatus ns_class_multiply(const struct NsMappingClass *a,
                                const struct NsMappingClass *b,
                                struct NsMappingClass **out);

enum NsStatus ns_class_inverse(const struct NsMappingClass *a, struct NsMappingClass **out);

/**
 * `ρ`: the automorphism component.
 */
enum NsStatus ns_class_project(const struct NsMappingClass *a, struct NsAuto **out);

/**
 * Writes the twist component (`rank` bytes) to `out`.
 */
enum NsStatus ns_class_twist(const struct NsMappingClass *a, uint8_t *out);

enum NsStatus ns_class_is_identity(const struct NsMappingClass *a, int *out);

/**
 * Text form `twist=010 ; a1↦a1a2, ..`.
 */
enum NsStatus ns_class_render(const struct NsMappingClass *a, char **out);

void ns_class_free(struct NsMappingClass *a);

/**
 * Runs every check at default settings for rank `n` and seed `seed`. The
 * JSON report goes to `report` (may be NULL). Returns `CheckFailed` when a
 * check does not pass.
 */
enum NsStatus ns_verify(size_t n, uint64_t seed, char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NIELSEN_SECTION_H */
