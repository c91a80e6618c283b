#include "qhm/qhm.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "qhm/factor.hpp"
#include "qhm/metric.hpp"
#include "qhm/model.hpp"
#include "qhm/scenario.hpp"
#include "qhm/spectral.hpp"

struct qhm_scenario {
    qhm::ScenarioFile file;
    std::string format_name;
};

struct qhm_table {
    qhm::ResultTable table;
};

namespace {

struct LastError {
    std::string message;
    std::string stage;
    std::size_t line = 0;
    std::size_t column = 0;
};

thread_local LastError g_last;

qhm_status to_status(qhm::ErrorCode code) { return static_cast<qhm_status>(static_cast<int>(code)); }

void clear_error() { g_last = LastError{}; }

qhm_status fail(qhm_status status, std::string message, std::string stage = {}) {
    g_last.message = std::move(message);
    g_last.stage = std::move(stage);
    g_last.line = 0;
    g_last.column = 0;
    return status;
}

// Runs body, translating every exception into a status and thread-local message.
template <class F>
qhm_status guarded(const char* default_stage, F&& body) {
    clear_error();
    try {
        body();
        return QHM_OK;
    } catch (const qhm::ScenarioError& e) {
        fail(to_status(e.code()), e.detail(), "parse");
        g_last.line = e.line();
        g_last.column = e.column();
        return to_status(e.code());
    } catch (const qhm::PipelineError& e) {
        return fail(to_status(e.code()), e.detail(), e.stage());
    } catch (const qhm::Error& e) {
        return fail(to_status(e.code()), e.what(), default_stage);
    } catch (const std::bad_alloc&) {
        return fail(QHM_INTERNAL_ERROR, "out of memory", default_stage);
    } catch (const std::exception& e) {
        return fail(QHM_INTERNAL_ERROR, e.what(), default_stage);
    }
}

qhm::ComplexMatrix read_matrix(std::size_t n, const double* data) {
    qhm::ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t k = 2 * (r * n + c);
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = qhm::Complex(data[k], data[k + 1]);
        }
    }
    return m;
}

void write_matrix(const qhm::ComplexMatrix& m, double* out) {
    const auto n = static_cast<std::size_t>(m.cols());
    for (std::size_t r = 0; r < static_cast<std::size_t>(m.rows()); ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const qhm::Complex z = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            out[2 * (r * n + c)] = z.real();
            out[2 * (r * n + c) + 1] = z.imag();
        }
    }
}

char* duplicate(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size());
    out[s.size()] = '\0';
    return out;
}

bool null_args() { return false; }
template <class P, class... Rest>
bool null_args(P p, Rest... rest) {
    return p == nullptr || null_args(rest...);
}

}  // namespace

extern "C" {

const char* qhm_status_name(qhm_status status) {
    switch (status) {
        case QHM_INVALID_ARGUMENT: return "InvalidArgument";
        case QHM_INTERNAL_ERROR: return "InternalError";
        default: break;
    }
    if (status >= QHM_OK && status <= QHM_IO_ERROR) return qhm::to_string(static_cast<qhm::ErrorCode>(status));
    return "Unknown";
}

const char* qhm_last_error(void) { return g_last.message.c_str(); }
const char* qhm_last_error_stage(void) { return g_last.stage.c_str(); }
size_t qhm_last_error_line(void) { return g_last.line; }
size_t qhm_last_error_column(void) { return g_last.column; }

int qhm_exit_code_for_stage(const char* stage) { return qhm::exit_code_for_stage(stage ? stage : ""); }

void qhm_string_free(char* s) { std::free(s); }

qhm_status qhm_scenario_parse(const char* text, size_t length, qhm_scenario** out) {
    if (null_args(text, out)) return fail(QHM_INVALID_ARGUMENT, "null argument", "parse");
    *out = nullptr;
    return guarded("parse", [&] {
        auto sc = std::make_unique<qhm_scenario>();
        sc->file = qhm::parse_scenario(std::string_view(text, length));
        sc->format_name = sc->file.output.format == qhm::OutputFormat::Csv ? "csv" : "json";
        *out = sc.release();
    });
}

void qhm_scenario_free(qhm_scenario* scenario) { delete scenario; }

qhm_status qhm_scenario_validate(const qhm_scenario* scenario) {
    if (null_args(scenario)) return fail(QHM_INVALID_ARGUMENT, "null argument");
    return guarded("model", [&] { qhm::build_scenario(scenario->file); });
}

qhm_status qhm_scenario_run(const qhm_scenario* scenario, qhm_table** out) {
    if (null_args(scenario, out)) return fail(QHM_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded("evolution", [&] {
        auto t = std::make_unique<qhm_table>();
        t->table = qhm::run_scenario(scenario->file);
        *out = t.release();
    });
}

const char* qhm_scenario_output_path(const qhm_scenario* scenario) {
    return scenario ? scenario->file.output.path.c_str() : "";
}

const char* qhm_scenario_output_format(const qhm_scenario* scenario) {
    return scenario ? scenario->format_name.c_str() : "";
}

qhm_status qhm_scenario_describe_metric(const qhm_scenario* scenario, char** out) {
    if (null_args(scenario, out)) return fail(QHM_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded("metric", [&] { *out = duplicate(qhm::describe_metric_family(scenario->file)); });
}

qhm_status qhm_scenario_describe_spectrum(const qhm_scenario* scenario, char** out) {
    if (null_args(scenario, out)) return fail(QHM_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded("model", [&] { *out = duplicate(qhm::describe_spectrum(scenario->file)); });
}

void qhm_table_free(qhm_table* table) { delete table; }

size_t qhm_table_rows(const qhm_table* table) { return table ? table->table.rows.size() : 0; }

size_t qhm_table_columns(const qhm_table* table) { return table ? table->table.columns.size() : 0; }

const char* qhm_table_column_name(const qhm_table* table, size_t column) {
    if (!table || column >= table->table.columns.size()) return nullptr;
    return table->table.columns[column].c_str();
}

double qhm_table_value(const qhm_table* table, size_t row, size_t column) {
    if (!table || row >= table->table.rows.size() || column >= table->table.rows[row].size()) return 0.0;
    return table->table.rows[row][column];
}

qhm_status qhm_table_emit(const qhm_table* table, const char* format, char** out, size_t* length) {
    if (null_args(table, format, out)) return fail(QHM_INVALID_ARGUMENT, "null argument", "output");
    *out = nullptr;
    return guarded("output", [&] {
        const std::string bytes = qhm::emit(table->table, qhm::parse_output_format(format));
        *out = duplicate(bytes);
        if (length) *length = bytes.size();
    });
}

qhm_status qhm_am_hamiltonian(double r, double beta, double* out) {
    if (null_args(out)) return fail(QHM_INVALID_ARGUMENT, "null argument");
    return guarded("", [&] { write_matrix(qhm::am_hamiltonian({r, beta, 0.0, 1.0}), out); });
}

qhm_status qhm_am_metric(double r, double beta, double Z, double f, double* out) {
    if (null_args(out)) return fail(QHM_INVALID_ARGUMENT, "null argument");
    return guarded("", [&] { write_matrix(qhm::am_metric({r, beta, Z, f}).theta, out); });
}

qhm_status qhm_am_physical_hamiltonian(double beta, double Z, double* out) {
    if (null_args(out)) return fail(QHM_INVALID_ARGUMENT, "null argument");
    return guarded("", [&] { write_matrix(qhm::am_physical_hamiltonian({1.0, beta, Z, 1.0}), out); });
}

qhm_status qhm_solve_intertwining(size_t n, const double* hamiltonian, double tol, size_t capacity, double* basis,
                                  size_t* dim) {
    if (n == 0 || null_args(hamiltonian, dim) || (capacity > 0 && basis == nullptr)) {
        return fail(QHM_INVALID_ARGUMENT, "invalid argument");
    }
    return guarded("", [&] {
        const qhm::MetricFamily family = qhm::solve_intertwining(read_matrix(n, hamiltonian), tol);
        *dim = family.basis.size();
        for (std::size_t k = 0; k < family.basis.size() && k < capacity; ++k) {
            write_matrix(family.basis[k], basis + 2 * n * n * k);
        }
    });
}

qhm_status qhm_positivity_certificate(size_t n, const double* theta, double* min_eigenvalue,
                                      int* positive_definite) {
    if (n == 0 || null_args(theta, min_eigenvalue, positive_definite)) {
        return fail(QHM_INVALID_ARGUMENT, "invalid argument");
    }
    return guarded("", [&] {
        const qhm::MetricCandidate c = qhm::positivity_certificate(read_matrix(n, theta));
        *min_eigenvalue = c.min_eigenvalue;
        *positive_definite = c.positive_definite ? 1 : 0;
    });
}

qhm_status qhm_factor_metric(size_t n, const double* theta, int kind, double* omega, double* omega_inverse) {
    if (n == 0 || null_args(theta, omega, omega_inverse) || (kind != 0 && kind != 1)) {
        return fail(QHM_INVALID_ARGUMENT, "invalid argument");
    }
    return guarded("", [&] {
        const qhm::MetricCandidate c = qhm::positivity_certificate(read_matrix(n, theta));
        const qhm::MappingFactorization f = kind == 0 ? qhm::cholesky_factor(c) : qhm::hermitian_root_factor(c);
        write_matrix(f.omega, omega);
        write_matrix(f.omega_inverse, omega_inverse);
    });
}

qhm_status qhm_biorthogonal_energies(size_t n, const double* hamiltonian, double reality_tol, double* energies,
                                     double* residual) {
    if (n == 0 || null_args(hamiltonian, energies)) return fail(QHM_INVALID_ARGUMENT, "invalid argument");
    return guarded("", [&] {
        const qhm::BiorthogonalSystem sys = qhm::biorthogonal_decompose(read_matrix(n, hamiltonian), reality_tol);
        for (std::size_t k = 0; k < sys.energies.size(); ++k) energies[k] = sys.energies[k];
        if (residual) *residual = qhm::biorthogonality_residual(sys);
    });
}

}  // extern "C"
