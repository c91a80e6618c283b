#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qhm/evolution.hpp"
#include "qhm/expression.hpp"
#include "qhm/types.hpp"

namespace qhm {

/// Parse diagnostic positioned in the scenario text (1-based; column 0 when
/// the problem concerns a whole line or section).
class ScenarioError : public Error {
public:
    ScenarioError(ErrorCode code, std::size_t line, std::size_t column, const std::string& message);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t line_;
    std::size_t column_;
};

/// Failure inside run_scenario, tagged with the pipeline stage that raised it
/// ("model", "metric", "evolution" or "output").
class PipelineError : public Error {
public:
    PipelineError(ErrorCode code, std::string stage, const std::string& message);
    const std::string& stage() const noexcept { return stage_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string stage_;
    std::string detail_;
};

enum class MetricMode { ClosedFormZ, MuSeries, NullspaceCoeffs };
enum class FactorChoice { Cholesky, HermitianRoot };
enum class OutputFormat { Csv, Json };

OutputFormat parse_output_format(std::string_view name);  // UnsupportedFormat

struct ScenarioFile {
    struct Model {
        bool builtin_am = false;
        Expression r;     // builtin only
        Expression beta;  // builtin only
        int dim = 0;
        std::vector<Expression> hamiltonian;  // general models, row-major
        std::optional<std::vector<Expression>> observable;
    } model;

    ParameterMap parameters;

    struct Metric {
        MetricMode mode = MetricMode::ClosedFormZ;
        std::optional<Expression> Z;
        std::vector<Expression> mu;
        std::vector<double> coeffs;
        FactorChoice factor = FactorChoice::Cholesky;
    } metric;

    struct Evolution {
        double t0 = 0.0;
        double t1 = 1.0;
        int steps = 1000;
        ComplexVector initial_ket;
        std::string stepper = "rk4";
        double derivative_step = 0.0;
        bool finite_difference = false;
    } evolution;

    struct Tolerances {
        double compatibility = 1e-8;
        double reality = 1e-8;
        double gap = 1e-8;
        double nullspace = 1e-10;
    } tolerances;

    struct Output {
        std::string path;
        OutputFormat format = OutputFormat::Csv;
        std::vector<std::string> quantities{"norm", "generator_gap"};
    } output;

    int dim() const noexcept { return model.builtin_am ? 2 : model.dim; }
};

/// Never throws anything but ScenarioError.
ScenarioFile parse_scenario(std::string_view text);

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Builds the time-dependent operators and Omega(t) for the scenario (stage
/// "model" / "metric" errors are PipelineError).
TimeDependentScenario build_scenario(const ScenarioFile& sc);

/// Validates per-node compatibility, integrates and assembles the table.
ResultTable run_scenario(const ScenarioFile& sc);

std::string emit(const ResultTable& table, OutputFormat format);

/// Inverse of emit for JSON output.
ResultTable parse_table_json(std::string_view text);

/// Human-readable reports for the `solve-metric` and `spectrum` commands,
/// evaluated at t0.
std::string describe_metric_family(const ScenarioFile& sc);
std::string describe_spectrum(const ScenarioFile& sc);

/// Process exit code for a failure in the given stage: 2 parse, 3 model or
/// metric, 4 evolution, 1 anything else.
int exit_code_for_stage(std::string_view stage) noexcept;

}  // namespace qhm
