/*
 * C interface to the qhm library: quasi-Hermitian metrics, Dyson maps and
 * time evolution with time-dependent metrics.
 *
 * Matrices cross the boundary as row-major arrays of interleaved doubles
 * (re, im), so an n x n matrix occupies 2*n*n doubles. Every function
 * returns a qhm_status; on failure the message of the most recent error on
 * the calling thread is available from qhm_last_error().
 */
#ifndef QHM_QHM_H
#define QHM_QHM_H

#include <stddef.h>

#if defined(_WIN32)
#  define QHM_API __declspec(dllexport)
#elif defined(__GNUC__)
#  define QHM_API __attribute__((visibility("default")))
#else
#  define QHM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qhm_status {
    QHM_OK = 0,
    QHM_DOMAIN_ERROR,
    QHM_NOT_POSITIVE_DEFINITE,
    QHM_NOT_HERMITIAN,
    QHM_DIMENSION_MISMATCH,
    QHM_UNBOUND_PARAMETER,
    QHM_EVALUATION_ERROR,
    QHM_SYNTAX_ERROR,
    QHM_COMPLEX_SPECTRUM,
    QHM_DEGENERATE_SPECTRUM,
    QHM_DEFECTIVE_MATRIX,
    QHM_DEGENERATE_OBSERVABLE,
    QHM_OUT_OF_RANGE,
    QHM_SINGULAR_OMEGA,
    QHM_NON_HERMITIAN_PUSHFORWARD,
    QHM_COMPATIBILITY_VIOLATION,
    QHM_STEP_SIZE_UNDERFLOW,
    QHM_MISSING_SECTION,
    QHM_CONFLICTING_METRIC_MODES,
    QHM_INVALID_SCENARIO,
    QHM_UNSUPPORTED_FORMAT,
    QHM_IO_ERROR,
    QHM_INVALID_ARGUMENT = 100,
    QHM_INTERNAL_ERROR = 101
} qhm_status;

typedef struct qhm_scenario qhm_scenario;
typedef struct qhm_table qhm_table;

QHM_API const char* qhm_status_name(qhm_status status);

/* Message of the last failure on this thread ("" when none); position and
 * stage are reported separately. */
QHM_API const char* qhm_last_error(void);
/* Pipeline stage of the last failure: "parse", "model", "metric",
 * "evolution", "output" or "" when not applicable. */
QHM_API const char* qhm_last_error_stage(void);
/* 1-based position of the last parse failure; 0 when unknown. */
QHM_API size_t qhm_last_error_line(void);
QHM_API size_t qhm_last_error_column(void);

/* Exit code convention of the command-line tool for a failure stage:
 * 2 parse, 3 model/metric, 4 evolution, 1 otherwise. */
QHM_API int qhm_exit_code_for_stage(const char* stage);

/* Frees strings returned through char** out-parameters. */
QHM_API void qhm_string_free(char* s);

/* ---- scenarios ---------------------------------------------------------- */

QHM_API qhm_status qhm_scenario_parse(const char* text, size_t length, qhm_scenario** out);
QHM_API void qhm_scenario_free(qhm_scenario* scenario);

/* Builds operators and Omega(t) and checks per-node compatibility without integrating. */
QHM_API qhm_status qhm_scenario_validate(const qhm_scenario* scenario);

QHM_API qhm_status qhm_scenario_run(const qhm_scenario* scenario, qhm_table** out);

/* Output settings declared in the scenario's [output] section. The returned
 * pointers live as long as the scenario. */
QHM_API const char* qhm_scenario_output_path(const qhm_scenario* scenario);
QHM_API const char* qhm_scenario_output_format(const qhm_scenario* scenario);

/* Text reports for the metric family and biorthogonal spectrum of H(t0). */
QHM_API qhm_status qhm_scenario_describe_metric(const qhm_scenario* scenario, char** out);
QHM_API qhm_status qhm_scenario_describe_spectrum(const qhm_scenario* scenario, char** out);

/* ---- result tables ------------------------------------------------------ */

QHM_API void qhm_table_free(qhm_table* table);
QHM_API size_t qhm_table_rows(const qhm_table* table);
QHM_API size_t qhm_table_columns(const qhm_table* table);
QHM_API const char* qhm_table_column_name(const qhm_table* table, size_t column);
QHM_API double qhm_table_value(const qhm_table* table, size_t row, size_t column);

/* format is "csv" or "json". */
QHM_API qhm_status qhm_table_emit(const qhm_table* table, const char* format, char** out, size_t* length);

/* ---- two-level closed forms --------------------------------------------- */

/* out: 8 doubles (2x2 complex). */
QHM_API qhm_status qhm_am_hamiltonian(double r, double beta, double* out);
QHM_API qhm_status qhm_am_metric(double r, double beta, double Z, double f, double* out);
QHM_API qhm_status qhm_am_physical_hamiltonian(double beta, double Z, double* out);

/* ---- general matrices --------------------------------------------------- */

/* Writes up to `capacity` basis matrices (2*n*n doubles each) of the
 * Hermitian solution space of H^dagger Theta = Theta H; *dim receives the
 * full dimension even when it exceeds capacity. */
QHM_API qhm_status qhm_solve_intertwining(size_t n, const double* hamiltonian, double tol, size_t capacity,
                                          double* basis, size_t* dim);

/* Minimum eigenvalue and positive-definiteness of a Hermitian matrix. */
QHM_API qhm_status qhm_positivity_certificate(size_t n, const double* theta, double* min_eigenvalue,
                                              int* positive_definite);

/* kind: 0 Cholesky (upper triangular), 1 Hermitian square root. */
QHM_API qhm_status qhm_factor_metric(size_t n, const double* theta, int kind, double* omega, double* omega_inverse);

/* Real energies (ascending) of a quasi-Hermitian H and the biorthogonality
 * residual max |<<m|n> - delta_mn|. */
QHM_API qhm_status qhm_biorthogonal_energies(size_t n, const double* hamiltonian, double reality_tol,
                                             double* energies, double* residual);

#ifdef __cplusplus
}
#endif

#endif /* QHM_QHM_H */
