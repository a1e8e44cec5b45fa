#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "burgers2d.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        B2dStatus s_ = (call);                                             \
        if (s_ != B2D_STATUS_OK) {                                         \
            fprintf(stderr, "%s -> %d: %s\n", #call, s_, b2d_last_error()); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    B2dGrid *grid = NULL;
    B2dDatum *datum = NULL;
    B2dField *field = NULL;
    double mass0, mass1, f, linf;
    size_t len, steps;
    double t;

    CHECK(b2d_grid_new(-1.0, 2.0, -0.5, 2.5, 48, 48, false, &grid));
    CHECK(b2d_datum_dirac(1.0, 4, &datum));
    CHECK(b2d_discretize(datum, grid, 3, &field));
    CHECK(b2d_field_mass(field, &mass0));
    CHECK(b2d_advance(field, 0.25, 0.5, &steps));
    CHECK(b2d_field_mass(field, &mass1));
    CHECK(b2d_lp_norm(field, INFINITY, &linf));
    CHECK(b2d_field_info(field, &len, &t));
    double *buf = malloc(len * sizeof(double));
    CHECK(b2d_field_copy_values(field, buf, len));
    CHECK(b2d_flux_x1(1.0, -1.0, &f));
    if (fabs(mass0 - 1.0) > 1e-10 || fabs(mass1 - 1.0) > 1e-10 || len != 48 * 48 || t != 0.25 || f != 0.5 ||
        steps == 0 || !(linf > 0.0)) {
        fprintf(stderr, "unexpected values\n");
        return 1;
    }
    if (b2d_grid_new(0.0, 1.0, 0.0, 1.0, 0, 4, false, &grid) != B2D_STATUS_INVALID_ARGUMENT) {
        return 1;
    }
    free(buf);
    b2d_field_free(field);
    b2d_datum_free(datum);
    b2d_grid_free(grid);
    printf("ok %s\n", b2d_version());
    return 0;
}
