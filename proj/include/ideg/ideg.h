/* C interface to the degenerate parabolic verification toolkit. */
#ifndef IDEG_IDEG_H
#define IDEG_IDEG_H

#include <stddef.h>
#include <stdint.h>

#if defined(IDEG_BUILDING_LIBRARY)
#define IDEG_API __attribute__((visibility("default")))
#else
#define IDEG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ideg_status {
  IDEG_OK = 0,
  IDEG_INVALID_ARGUMENT = 1,
  IDEG_DOMAIN = 2,
  IDEG_SINGULAR_POINT = 3,
  IDEG_INVALID_MODEL = 4,
  IDEG_PRECONDITION = 5,
  IDEG_GEOMETRY = 6,
  IDEG_STEP_SIZE = 7,
  IDEG_CONFIG = 8,
  IDEG_IO = 9,
  IDEG_INTERNAL = 10
} ideg_status;

typedef struct ideg_coefficient ideg_coefficient;
typedef struct ideg_grid ideg_grid;
typedef struct ideg_field ideg_field;

/* Message of the last failing call on this thread ("" if none). */
IDEG_API const char* ideg_last_error(void);
/* For IDEG_CONFIG failures: the dotted key at fault ("" otherwise). */
IDEG_API const char* ideg_last_error_key(void);
IDEG_API const char* ideg_status_string(ideg_status status);
IDEG_API const char* ideg_version(void);

/* Coefficient models. theta < 0 selects the default (theta = K). */
IDEG_API ideg_status ideg_coefficient_power_law(double x0, double alpha, double theta,
                                                ideg_coefficient** out);
/* Table rows (x, a, a') with x0 on a node and a(x0) = 0. */
IDEG_API ideg_status ideg_coefficient_tabulated(double x0, const double* x, const double* a,
                                                const double* a_prime, size_t rows, double K,
                                                double theta, ideg_coefficient** out);
IDEG_API ideg_status ideg_coefficient_uniform(double x0, double value, ideg_coefficient** out);
IDEG_API void ideg_coefficient_destroy(ideg_coefficient* c);

IDEG_API ideg_status ideg_coefficient_a(const ideg_coefficient* c, double x, double* out);
IDEG_API ideg_status ideg_coefficient_a_prime(const ideg_coefficient* c, double x, double* out);
IDEG_API ideg_status ideg_coefficient_K(const ideg_coefficient* c, double* out);
/* 0 for weakly, 1 for strongly degenerate. */
IDEG_API ideg_status ideg_coefficient_class(const ideg_coefficient* c, int* out);
IDEG_API ideg_status ideg_c2_min(const ideg_coefficient* c, double* out);

/* Space-time grid; N is snapped upward so that x0 lies on a node. */
IDEG_API ideg_status ideg_grid_create(int N, int M, double T, double x0, ideg_grid** out);
IDEG_API void ideg_grid_destroy(ideg_grid* g);
IDEG_API int ideg_grid_N(const ideg_grid* g);
IDEG_API int ideg_grid_M(const ideg_grid* g);
IDEG_API double ideg_grid_T(const ideg_grid* g);
IDEG_API int ideg_grid_x0_index(const ideg_grid* g);

/* Fields are (M+1) x (N+1), time-major. */
IDEG_API ideg_status ideg_field_create(const ideg_grid* g, ideg_field** out);
IDEG_API void ideg_field_destroy(ideg_field* f);
IDEG_API ideg_status ideg_field_get(const ideg_field* f, int j, int i, double* out);
IDEG_API ideg_status ideg_field_set(ideg_field* f, int j, int i, double value);
/* Copies row j (N+1 values) into `out`. */
IDEG_API ideg_status ideg_field_row(const ideg_field* f, int j, double* out, size_t len);

/* u_t = (a u_x)_x - c u + chi_omega h with constant potential c. `h` may be NULL.
   Pass omega_lo = 0, omega_hi = 1 for chi = 1. */
IDEG_API ideg_status ideg_solve_forward(const ideg_coefficient* c, const ideg_grid* g,
                                        double potential, const double* u0, size_t len,
                                        const ideg_field* h, double omega_lo, double omega_hi,
                                        ideg_field** out);
/* v_t + (a v_x)_x - c v = h backward from v(T) = vT. `h` may be NULL. */
IDEG_API ideg_status ideg_solve_adjoint(const ideg_coefficient* c, const ideg_grid* g,
                                        double potential, const double* vT, size_t len,
                                        const ideg_field* h, ideg_field** out);

/* Runs a workflow subcommand. `config_path` may be NULL (built-in defaults); `overrides`
   holds n "dotted.key=value" strings; `out_dir` may be NULL (run.out_dir); `seed` < 0 keeps
   run.seed. On IDEG_OK, *all_pass tells whether every verdict passed and *summary_json (if
   not NULL) receives the JSON summary, to be released with ideg_string_free. */
IDEG_API ideg_status ideg_run(const char* subcommand, const char* config_path,
                              const char* const* overrides, size_t n, const char* out_dir,
                              int64_t seed, int* all_pass, char** summary_json);
/* Human-readable verdict lines of the last successful ideg_run on this thread. */
IDEG_API const char* ideg_last_summary_text(void);
IDEG_API void ideg_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* IDEG_IDEG_H */
