#ifndef BURGERS2D_H
#define BURGERS2D_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum B2dStatus {
  B2D_STATUS_OK = 0,
  B2D_STATUS_INVALID_ARGUMENT = 1,
  B2D_STATUS_CFL_VIOLATION = 2,
  B2D_STATUS_INTERNAL = 3,
  B2D_STATUS_SERIES_UNAVAILABLE = 4,
  B2D_STATUS_CONFIG = 5,
  B2D_STATUS_SNAPSHOT = 6,
  B2D_STATUS_IO = 7,
  B2D_STATUS_NULL_POINTER = 8,
  B2D_STATUS_PANIC = 9,
  /*
   Output buffer too small.
   */
  B2D_STATUS_BUFFER_TOO_SMALL = 10,
} B2dStatus;

/*
 Initial datum handle.
 */
typedef struct B2dDatum B2dDatum;

/*
 Cell-average field handle.
 */
typedef struct B2dField B2dField;

/*
 Mesh handle.
 */
typedef struct B2dGrid B2dGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread (empty after a success).
 Valid until the next call into the library from the same thread.
 */
const char *b2d_last_error(void);

/*
 Library version, static string.
 */
const char *b2d_version(void);

/*
 Uniform grid on `[x1_min, x1_max] × [x2_min, x2_max]` with `n1 × n2` cells.

 # Safety
 `out` must be a valid pointer to writable storage.
 */
enum B2dStatus b2d_grid_new(double x1_min,
                            double x1_max,
                            double x2_min,
                            double x2_max,
                            size_t n1,
                            size_t n2,
                            bool periodic,
                            struct B2dGrid **out);

/*
 # Safety
 `grid` must come from [`b2d_grid_new`] and not be freed twice; null is ignored.
 */
void b2d_grid_free(struct B2dGrid *grid);

/*
 # Safety
 `grid` must be a live handle; `n1`, `n2` writable.
 */
enum B2dStatus b2d_grid_dims(const struct B2dGrid *grid, size_t *n1, size_t *n2);

/*
 Smooth nonnegative bump of mass `mass` supported in `[-1/m, 1/m]²`.

 # Safety
 `out` must be writable.
 */
enum B2dStatus b2d_datum_dirac(double mass, uint32_t m, struct B2dDatum **out);

/*
 Horizontal cosine mollification of width `width` of the line measure
 with density `height` on `x2 ∈ [g_lo, g_hi]`.

 # Safety
 `out` must be writable.
 */
enum B2dStatus b2d_datum_line_measure(double g_lo,
                                      double g_hi,
                                      double height,
                                      double width,
                                      struct B2dDatum **out);

/*
 # Safety
 `datum` must be a live handle or null.
 */
void b2d_datum_free(struct B2dDatum *datum);

/*
 # Safety
 `datum` live; `mass` writable.
 */
enum B2dStatus b2d_datum_mass(const struct B2dDatum *datum, double *mass);

/*
 Cell averages of `datum` on `grid` by Gauss quadrature of the given order.

 # Safety
 Handles live; `out` writable.
 */
enum B2dStatus b2d_discretize(const struct B2dDatum *datum,
                              const struct B2dGrid *grid,
                              size_t order,
                              struct B2dField **out);

/*
 Field from `len = n1·n2` row-major values (x1 fastest).

 # Safety
 `values` must point to `len` readable doubles.
 */
enum B2dStatus b2d_field_from_values(const struct B2dGrid *grid,
                                     const double *values,
                                     size_t len,
                                     double t,
                                     struct B2dField **out);

/*
 # Safety
 `field` live or null.
 */
void b2d_field_free(struct B2dField *field);

/*
 # Safety
 `field` live; `len`, `t` writable.
 */
enum B2dStatus b2d_field_info(const struct B2dField *field, size_t *len, double *t);

/*
 Copies the values into `buf`, which must hold at least the field length.

 # Safety
 `buf` must point to `cap` writable doubles.
 */
enum B2dStatus b2d_field_copy_values(const struct B2dField *field, double *buf, size_t cap);

/*
 `‖u‖_p` over the grid; `p = INFINITY` gives the maximum norm.

 # Safety
 `field` live; `out` writable.
 */
enum B2dStatus b2d_lp_norm(const struct B2dField *field, double p, double *out);

/*
 `∫ u`.

 # Safety
 `field` live; `out` writable.
 */
enum B2dStatus b2d_field_mass(const struct B2dField *field, double *out);

/*
 Stable time step `cfl / (max|u|/h1 + max u²/h2)`, capped at `dt_max`.

 # Safety
 `field` live; `out` writable.
 */
enum B2dStatus b2d_cfl_dt(const struct B2dField *field, double cfl, double dt_max, double *out);

/*
 One step of length `dt` in place. Fails with `CflViolation` when `dt`
 exceeds the stable step.

 # Safety
 `field` live.
 */
enum B2dStatus b2d_step(struct B2dField *field, double dt);

/*
 Advances in place by `duration` with adaptive steps at the given CFL number.

 # Safety
 `field` live; `steps` writable or null.
 */
enum B2dStatus b2d_advance(struct B2dField *field, double duration, double cfl, size_t *steps);

/*
 Godunov flux of `u²/2`.

 # Safety
 `out` writable.
 */
enum B2dStatus b2d_flux_x1(double ul, double ur, double *out);

/*
 Upwind flux of `u³/3`.

 # Safety
 `out` writable.
 */
enum B2dStatus b2d_flux_x2(double ul, double ur, double *out);

/*
 Solves `(1 − c) t u² + c x1 u = x2` on the branch through `u = 0`.
 `found` is set to false (and `u` left untouched) when no real root exists.

 # Safety
 `u`, `found` writable.
 */
enum B2dStatus b2d_vss_eval(double c, double t, double x1, double x2, double *u, bool *found);

/*
 Runs an experiment from configuration text, writing artifacts to
 `out_dir` (or the configured directory when null). `failed` receives
 whether any enabled check failed.

 # Safety
 `config` must be a NUL-terminated UTF-8 string; `out_dir` NUL-terminated or null.
 */
enum B2dStatus b2d_run_config(const char *config, const char *out_dir, bool *failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BURGERS2D_H */
