#include <math.h>
#include <stdio.h>
#include "orediff.h"

int main(void) {
    OrediffDifferentiator *d = NULL;
    if (orediff_differentiator_new(1.0, 0.01, 41, 1.96, 0, &d) != OrediffStatus_Ok) {
        fprintf(stderr, "new failed: %s\n", orediff_last_error_message());
        return 1;
    }
    double y = 0.0, ys = 0.0, nhat = 0.0;
    uintptr_t ell = 0;
    for (int k = 0; k <= 300; k++) {
        double t = k * 0.01;
        if (orediff_differentiator_step(d, 0.25 * t * t + t, &y, &ys, &nhat, &ell) != OrediffStatus_Ok) {
            return 1;
        }
    }
    orediff_differentiator_free(d);
    if (fabs(y - (0.5 * 3.0 + 1.0)) > 0.005 + 1e-9) {
        fprintf(stderr, "y = %.12f\n", y);
        return 1;
    }
    if (orediff_differentiator_new(1.0, 0.01, 41, 0.5, 0, &d) != OrediffStatus_InvalidParameter) {
        return 1;
    }
    printf("ok %s\n", orediff_version());
    return 0;
}
