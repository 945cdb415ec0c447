#include <math.h>
#include <stdio.h>
#include <string.h>

#include "liouville_q.h"

int main(void) {
    LqContext *ctx = lq_context_new();
    LqComplex out;
    LqComplex x = {0.3, 0.0}, tau = {0.0, 0.5};
    if (lq_theta1(ctx, x, tau, &out) != LQ_OK) return 1;
    if (fabs(out.re - 1.0744053196400079) > 1e-13 || fabs(out.im) > 1e-13) return 2;

    LqComplex u = {1.0 / (0.1 * 0.09), 0.0}, p = {0.1, 0.0}, q = {0.3, 0.0};
    int32_t status = lq_ell_gamma(ctx, u, p, q, &out);
    if (status != 2 || lq_last_error() == NULL) return 3;

    LqSolution *sol = NULL;
    LqComplex v = {0.5, 0.0};
    if (lq_solve_ground(ctx, 1, v, 3, &sol) != LQ_OK || sol == NULL) return 4;
    char *json = NULL;
    if (lq_solution_to_json(sol, &json) != LQ_OK || strstr(json, "\"R0\"") == NULL) return 5;
    lq_string_free(json);
    lq_solution_free(sol);
    lq_context_free(ctx);
    printf("ok\n");
    return 0;
}
