/* Build: cc demo.c -I../include -L<target>/release -lm1bitcsl_ffi -o demo */
#include <stdio.h>
#include "m1bitcsl.h"

int main(void) {
    enum { N = 200 };
    double x_bar[N];
    char msg[256];
    M1Dataset *ds = NULL;
    M1Result *res = NULL;

    if (m1_synthesize(N, 120, 8, 10.0, 0.2, 7, 0, x_bar, &ds) != M1_STATUS_OK) {
        m1_last_error(msg, sizeof msg);
        fprintf(stderr, "synthesize: %s\n", msg);
        return 1;
    }
    size_t n, m1, m2;
    m1_dataset_dims(ds, &n, &m1, &m2);
    printf("N = %zu, M1 = %zu, M2 = %zu\n", n, m1, m2);

    M1SolverConfig cfg = m1_solver_config_default();
    if (m1_solve(ds, M1_PENALTY_MCP, 0.02, 10.0, NULL, 0, &cfg, &res) != M1_STATUS_OK) {
        m1_last_error(msg, sizeof msg);
        fprintf(stderr, "solve: %s\n", msg);
        m1_dataset_free(ds);
        return 1;
    }
    double x[N];
    m1_result_copy_x(res, x, N);
    size_t iterations;
    bool converged;
    double seconds;
    m1_result_info(res, &iterations, &converged, &seconds);

    double err = 0.0;
    for (size_t i = 0; i < N; i++) {
        err += (x[i] - x_bar[i]) * (x[i] - x_bar[i]);
    }
    printf("iterations %zu, converged %d, squared error %.4f\n", iterations, converged, err);

    m1_result_free(res);
    m1_dataset_free(ds);
    return 0;
}
