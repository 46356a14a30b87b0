/* C API of the adapttikh library: opaque handles plus error codes around
 * the C++ core. All functions returning at_status set a thread-local
 * message retrievable via at_last_error() on failure. Strings returned
 * through char** are heap-allocated; release them with at_string_free().
 */
#ifndef ADAPTTIKH_H
#define ADAPTTIKH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum at_status {
  AT_OK = 0,
  AT_ERR_INVALID_ARGUMENT = 1,
  AT_ERR_NUMERICAL = 2,
  AT_ERR_IO = 3,
  AT_ERR_INTERNAL = 4
} at_status;

typedef struct at_mesh at_mesh;
typedef struct at_solution at_solution;

const char* at_version(void);
const char* at_last_error(void);
void at_string_free(char* s);

/* ---- meshes ---- */

at_status at_mesh_create_disk(int n_boundary, double radius, int levels,
                              at_mesh** out);
at_status at_mesh_read(const char* path, at_mesh** out);
at_status at_mesh_write(const at_mesh* mesh, const char* path);
at_status at_mesh_refine_uniform(const at_mesh* mesh, at_mesh** out);
at_status at_mesh_refine_marked(const at_mesh* mesh, const int* triangle_ids,
                                int count, at_mesh** out);
int at_mesh_num_vertices(const at_mesh* mesh);
int at_mesh_num_triangles(const at_mesh* mesh);
double at_mesh_min_angle(const at_mesh* mesh);
double at_mesh_total_area(const at_mesh* mesh);
void at_mesh_free(at_mesh* mesh);

/* ---- benchmark formulas ---- */

double at_exact_state(double rho, double x, double y);
double at_exact_data(double rho, double alpha, double x, double y);
double at_exact_source_mass(double rho);

/* ---- configuration ---- */

/* Default configuration as JSON. */
at_status at_config_default(char** json_out);
/* Validates a configuration; rejects unknown keys naming the offender. */
at_status at_config_validate(const char* config_json);

/* ---- Tikhonov solves on the benchmark data ---- */

/* Solves one regularized problem ("l2" | "ivanov" | "measure") on the ring
 * benchmark data of the configuration. alpha_override > 0 replaces both the
 * data construction alpha and the solver alpha; mesh_levels_override >= 0
 * replaces the configured uniform refinement count. */
at_status at_solve_benchmark(const char* config_json, const char* regularizer,
                             double alpha_override, int mesh_levels_override,
                             at_solution** out);
at_status at_solution_summary_json(const at_solution* sol, char** json_out);
/* Estimator report of the solution (totals; optionally per-element data). */
at_status at_solution_report_json(const at_solution* sol, int with_elements,
                                  char** json_out);
void at_solution_free(at_solution* sol);

/* ---- studies and the adaptive loop ---- */

/* refinement: "uniform" | "adaptive"; levels >= 3. */
at_status at_rate_study(const char* config_json, const char* refinement,
                        int levels, char** csv_out, char** json_out);
/* deltas must be positive decreasing; NULL uses {4e-2, 2e-2, 1e-2, 5e-3}. */
at_status at_delta_study(const char* config_json, const double* deltas,
                         int n_deltas, int threads, char** csv_out,
                         char** json_out);
at_status at_run_adaptive(const char* config_json, const char* regularizer,
                          char** csv_out, char** json_out);

/* ---- the (sigma, gamma) lemma ---- */

int at_sigma_gamma_check(double sigma, double gamma);
/* Randomized implication test; JSON reports violations, a counterexample
 * when one exists, and whether the outcome is consistent with the check. */
at_status at_check_lemma(double sigma, double gamma, long long samples,
                         uint64_t seed, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* ADAPTTIKH_H */
