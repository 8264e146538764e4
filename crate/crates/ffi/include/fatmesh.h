#ifndef FATMESH_H
#define FATMESH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values 2 to 6 match the command-line exit codes.
 */
typedef enum FmStatus {
  FM_STATUS_OK = 0,
  FM_STATUS_NULL_POINTER = 1,
  FM_STATUS_INPUT = 2,
  FM_STATUS_GEOMETRY = 3,
  FM_STATUS_PERTURBATION = 4,
  FM_STATUS_STRUCTURAL = 5,
  FM_STATUS_IO = 6,
  FM_STATUS_PANIC = 7,
} FmStatus;

/**
 * Opaque two-coloring of a complex's top simplices.
 */
typedef struct FmColoring FmColoring;

/**
 * Opaque simplicial complex.
 */
typedef struct FmComplex FmComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *fm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fm_version(void);

/**
 * Parses FMESH text.
 */
enum FmStatus fm_complex_parse(const char *text, struct FmComplex **out);

/**
 * Reads an FMESH file.
 */
enum FmStatus fm_complex_read_file(const char *path, struct FmComplex **out);

/**
 * Builds a complex from `num_vertices * ambient_dim` coordinates and
 * `num_simplices * vertices_per_simplex` vertex indices.
 */
enum FmStatus fm_complex_from_arrays(size_t ambient_dim,
                                     const double *coords,
                                     size_t num_vertices,
                                     const size_t *indices,
                                     size_t num_simplices,
                                     size_t vertices_per_simplex,
                                     struct FmComplex **out);

void fm_complex_free(struct FmComplex *c);

/**
 * Ambient dimension; 0 for a null handle.
 */
size_t fm_complex_ambient_dim(const struct FmComplex *c);

size_t fm_complex_num_vertices(const struct FmComplex *c);

size_t fm_complex_num_simplices(const struct FmComplex *c);

/**
 * Serializes to FMESH; release the string with [`fm_string_free`].
 */
enum FmStatus fm_complex_to_fmesh(const struct FmComplex *c, char **out);

void fm_string_free(char *s);

/**
 * Fatness of a simplex given as `num_points` points of dimension `dim`.
 */
enum FmStatus fm_simplex_fatness(const double *points, size_t num_points, size_t dim, double *out);

/**
 * Smallest fatness over the complex's top simplices.
 */
enum FmStatus fm_complex_min_fatness(const struct FmComplex *c, double *out);

/**
 * Number of validity violations (0 for a geometric simplicial complex).
 */
enum FmStatus fm_complex_validate(const struct FmComplex *c, size_t *violations);

/**
 * Merges `k2` into `k1` over the ball of radius `eps` about vertex `v0` of
 * `k1`. `self_test_instances == 0` selects the default.
 */
enum FmStatus fm_mash(const struct FmComplex *k1,
                      const struct FmComplex *k2,
                      double eps,
                      size_t v0,
                      uint64_t seed,
                      size_t self_test_instances,
                      struct FmComplex **merged,
                      double *fatness_after);

/**
 * Refines until interior codimension-two faces have even incidence.
 */
enum FmStatus fm_enforce_even_incidence(const struct FmComplex *c, struct FmComplex **out);

/**
 * Alternating two-coloring; fails with `Structural` on an odd cycle.
 */
enum FmStatus fm_two_color(const struct FmComplex *c, struct FmColoring **out);

/**
 * Color (+1 or -1) of a top simplex.
 */
enum FmStatus fm_coloring_get(const struct FmColoring *col, size_t simplex, int8_t *out);

void fm_coloring_free(struct FmColoring *col);

/**
 * Largest sampled dilatation of the assembled piecewise map.
 */
enum FmStatus fm_estimate_dilatation(const struct FmComplex *c,
                                     const struct FmColoring *col,
                                     size_t samples_per_simplex,
                                     uint64_t seed,
                                     double *global_k);

/**
 * Staircase triangulation of `base x [0, height]`; `base` holds `k + 1`
 * points of `R^k`.
 */
enum FmStatus fm_prism_triangulate(const double *base,
                                   size_t k,
                                   double height,
                                   struct FmComplex **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FATMESH_H */
