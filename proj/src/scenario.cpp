#include "qhm/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qhm/factor.hpp"
#include "qhm/metric.hpp"
#include "qhm/model.hpp"
#include "qhm/spectral.hpp"

namespace qhm {

ScenarioError::ScenarioError(ErrorCode code, std::size_t line, std::size_t column, const std::string& message)
    : Error(code, column > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message
            : line > 0       ? "line " + std::to_string(line) + ": " + message
                             : message),
      detail_(message),
      line_(line),
      column_(column) {}

PipelineError::PipelineError(ErrorCode code, std::string stage, const std::string& message)
    : Error(code, "stage '" + stage + "': " + message), stage_(std::move(stage)), detail_(message) {}

OutputFormat parse_output_format(std::string_view name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    throw Error(ErrorCode::UnsupportedFormat, "unsupported output format '" + std::string(name) + "'");
}

int exit_code_for_stage(std::string_view stage) noexcept {
    if (stage == "parse") return 2;
    if (stage == "model" || stage == "metric") return 3;
    if (stage == "evolution") return 4;
    return 1;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

struct Entry {
    std::string value;
    std::size_t line = 0;
    std::size_t column = 0;  // of the first value character
};

using Section = std::map<std::string, Entry, std::less<>>;

struct RawScenario {
    std::map<std::string, Section, std::less<>> sections;
    std::map<std::string, std::size_t, std::less<>> section_lines;
};

const std::set<std::string, std::less<>> kKnownSections = {"model",      "parameters", "metric",
                                                          "evolution", "tolerances", "output"};

RawScenario split_sections(std::string_view text) {
    RawScenario raw;
    std::string current;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        start = end + 1;

        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) {
            if (end == text.size()) break;
            continue;
        }

        if (stripped.front() == '[') {
            if (stripped.back() != ']') {
                throw ScenarioError(ErrorCode::SyntaxError, line_no, line.find('[') + 1, "unterminated section header");
            }
            current = trim(std::string_view(stripped).substr(1, stripped.size() - 2));
            if (!kKnownSections.contains(current)) {
                throw ScenarioError(ErrorCode::InvalidScenario, line_no, 0, "unknown section [" + current + "]");
            }
            if (raw.sections.contains(current)) {
                throw ScenarioError(ErrorCode::InvalidScenario, line_no, 0, "duplicate section [" + current + "]");
            }
            raw.sections[current];
            raw.section_lines[current] = line_no;
        } else {
            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos) {
                const std::size_t col = line.find_first_not_of(" \t") + 1;
                throw ScenarioError(ErrorCode::SyntaxError, line_no, col, "expected 'key = value'");
            }
            if (current.empty()) {
                throw ScenarioError(ErrorCode::InvalidScenario, line_no, 0, "key outside of any section");
            }
            std::string key = trim(line.substr(0, eq));
            // normalise "H[0, 1]" to "H[0,1]"
            key.erase(std::remove_if(key.begin(), key.end(), [](unsigned char c) { return std::isspace(c); }),
                      key.end());
            if (key.empty()) throw ScenarioError(ErrorCode::SyntaxError, line_no, 1, "empty key");
            std::string_view rest = line.substr(eq + 1);
            std::size_t offset = 0;
            while (offset < rest.size() && std::isspace(static_cast<unsigned char>(rest[offset]))) ++offset;
            Entry entry{trim(rest), line_no, eq + 1 + offset + 1};
            if (entry.value.empty()) {
                throw ScenarioError(ErrorCode::SyntaxError, line_no, eq + 2, "missing value for '" + key + "'");
            }
            Section& section = raw.sections[current];
            if (section.contains(key)) {
                if (current == "metric" && key == "mode" && section[key].value != entry.value) {
                    throw ScenarioError(ErrorCode::ConflictingMetricModes, line_no, 0,
                                        "metric mode given twice ('" + section[key].value + "' and '" +
                                            entry.value + "')");
                }
                throw ScenarioError(ErrorCode::InvalidScenario, line_no, 0, "duplicate key '" + key + "'");
            }
            section.emplace(std::move(key), std::move(entry));
        }
        if (end == text.size()) break;
    }
    return raw;
}

const std::set<std::string, std::less<>> kReserved = {"t",   "i",   "pi",  "sin",  "cos",
                                                      "tan", "exp", "log", "sqrt", "arccos"};

class Reader {
public:
    explicit Reader(RawScenario raw) : raw_(std::move(raw)) {}

    ScenarioFile read() {
        ScenarioFile sc;
        for (const char* required : {"model", "metric", "evolution"}) {
            if (!raw_.sections.contains(required)) {
                throw ScenarioError(ErrorCode::MissingSection, 0, 0,
                                    std::string("missing required section [") + required + "]");
            }
        }
        read_parameters(sc);
        read_model(sc);
        read_metric(sc);
        read_evolution(sc);
        read_tolerances(sc);
        read_output(sc);
        check_unused();
        check_bindings(sc);
        return sc;
    }

private:
    RawScenario raw_;
    std::set<std::pair<std::string, std::string>> used_;
    struct Tracked {
        Expression expr;
        std::size_t line;
        std::size_t column;
    };
    std::vector<Tracked> expressions_;

    const Entry* find(std::string_view section, std::string_view key) {
        auto s = raw_.sections.find(section);
        if (s == raw_.sections.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        used_.emplace(std::string(section), std::string(key));
        return &k->second;
    }

    std::size_t section_line(std::string_view section) const {
        auto it = raw_.section_lines.find(section);
        return it == raw_.section_lines.end() ? 0 : it->second;
    }

    const Entry& require(std::string_view section, std::string_view key) {
        const Entry* e = find(section, key);
        if (!e) {
            throw ScenarioError(ErrorCode::InvalidScenario, section_line(section), 0,
                                "[" + std::string(section) + "] is missing key '" + std::string(key) + "'");
        }
        return *e;
    }

    Expression expression(const Entry& e, std::string_view text, std::size_t column_offset) {
        try {
            Expression x = Expression::parse(text);
            expressions_.push_back({x, e.line, e.column + column_offset});
            return x;
        } catch (const ParseError& pe) {
            throw ScenarioError(ErrorCode::SyntaxError, e.line, e.column + column_offset + pe.column() - 1,
                                pe.message());
        }
    }

    Expression expression(const Entry& e) { return expression(e, e.value, 0); }

    double constant(const Entry& e) {
        Expression x = expression(e);
        if (x.depends_on_time() || !x.parameters().empty()) {
            throw ScenarioError(ErrorCode::InvalidScenario, e.line, e.column, "value must be a constant");
        }
        Complex v;
        try {
            v = x.evaluate(0.0, {});
        } catch (const Error& err) {
            throw ScenarioError(ErrorCode::InvalidScenario, e.line, e.column, err.what());
        }
        if (v.imag() != 0.0) throw ScenarioError(ErrorCode::InvalidScenario, e.line, e.column, "value must be real");
        return v.real();
    }

    // Comma-separated list at parenthesis depth zero, with value-relative offsets.
    static std::vector<std::pair<std::string, std::size_t>> split_list(const std::string& s) {
        std::vector<std::pair<std::string, std::size_t>> items;
        int depth = 0;
        std::size_t start = 0;
        for (std::size_t k = 0; k <= s.size(); ++k) {
            if (k == s.size() || (s[k] == ',' && depth == 0)) {
                std::string_view piece = std::string_view(s).substr(start, k - start);
                std::size_t lead = 0;
                while (lead < piece.size() && std::isspace(static_cast<unsigned char>(piece[lead]))) ++lead;
                items.emplace_back(trim(piece), start + lead);
                start = k + 1;
            } else if (s[k] == '(') {
                ++depth;
            } else if (s[k] == ')') {
                --depth;
            }
        }
        return items;
    }

    void read_parameters(ScenarioFile& sc) {
        auto it = raw_.sections.find("parameters");
        if (it == raw_.sections.end()) return;
        for (const auto& [key, entry] : it->second) {
            used_.emplace("parameters", key);
            const bool identifier =
                (std::isalpha(static_cast<unsigned char>(key[0])) || key[0] == '_') &&
                std::all_of(key.begin(), key.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
            if (!identifier || kReserved.contains(key)) {
                throw ScenarioError(ErrorCode::InvalidScenario, entry.line, 0,
                                    "'" + key + "' is not a valid parameter name");
            }
            sc.parameters[key] = constant(entry);
        }
    }

    std::vector<Expression> matrix(std::string_view section, std::string_view name, int dim, bool required) {
        std::vector<Expression> out;
        bool any = false;
        for (int j = 0; j < dim && !any; ++j) {
            for (int k = 0; k < dim; ++k) {
                const std::string key = std::string(name) + "[" + std::to_string(j) + "," + std::to_string(k) + "]";
                auto s = raw_.sections.find(section);
                if (s != raw_.sections.end() && s->second.contains(key)) {
                    any = true;
                    break;
                }
            }
        }
        if (!any && !required) return out;
        for (int j = 0; j < dim; ++j) {
            for (int k = 0; k < dim; ++k) {
                const std::string key = std::string(name) + "[" + std::to_string(j) + "," + std::to_string(k) + "]";
                out.push_back(expression(require(section, key)));
            }
        }
        return out;
    }

    void read_model(ScenarioFile& sc) {
        auto& m = sc.model;
        if (const Entry* b = find("model", "builtin")) {
            if (b->value != "am") {
                throw ScenarioError(ErrorCode::InvalidScenario, b->line, b->column,
                                    "unknown builtin model '" + b->value + "'");
            }
            m.builtin_am = true;
            m.r = expression(require("model", "r"));
            m.beta = expression(require("model", "beta"));
            if (const Entry* d = find("model", "dim"); d && d->value != "2") {
                throw ScenarioError(ErrorCode::InvalidScenario, d->line, d->column, "builtin model 'am' has dim 2");
            }
            m.dim = 2;
        } else {
            const Entry& d = require("model", "dim");
            const double dim = constant(d);
            if (dim < 1 || dim > 64 || std::floor(dim) != dim) {
                throw ScenarioError(ErrorCode::InvalidScenario, d.line, d.column, "dim must be an integer in [1, 64]");
            }
            m.dim = static_cast<int>(dim);
            m.hamiltonian = matrix("model", "H", m.dim, true);
        }
        auto lambda = matrix("model", "Lambda", m.dim, false);
        if (!lambda.empty()) m.observable = std::move(lambda);
    }

    void read_metric(ScenarioFile& sc) {
        auto& metric = sc.metric;
        const Entry* z = find("metric", "Z");
        const Entry* mu = find("metric", "mu");
        const Entry* coeffs = find("metric", "coeffs");
        const int present = (z != nullptr) + (mu != nullptr) + (coeffs != nullptr);
        const std::size_t header = section_line("metric");
        if (present > 1) {
            throw ScenarioError(ErrorCode::ConflictingMetricModes, header, 0,
                                "[metric] specifies more than one of Z, mu and coeffs");
        }

        std::optional<MetricMode> declared;
        if (const Entry* mode = find("metric", "mode")) {
            if (mode->value == "closed_form_Z") {
                declared = MetricMode::ClosedFormZ;
            } else if (mode->value == "mu_series") {
                declared = MetricMode::MuSeries;
            } else if (mode->value == "nullspace_coeffs") {
                declared = MetricMode::NullspaceCoeffs;
            } else {
                throw ScenarioError(ErrorCode::InvalidScenario, mode->line, mode->column,
                                    "unknown metric mode '" + mode->value + "'");
            }
        }
        std::optional<MetricMode> implied;
        if (z) implied = MetricMode::ClosedFormZ;
        if (mu) implied = MetricMode::MuSeries;
        if (coeffs) implied = MetricMode::NullspaceCoeffs;
        if (declared && implied && *declared != *implied) {
            throw ScenarioError(ErrorCode::ConflictingMetricModes, header, 0,
                                "metric mode does not match the data given in [metric]");
        }
        if (!declared && !implied) {
            throw ScenarioError(ErrorCode::InvalidScenario, header, 0, "[metric] needs one of Z, mu or coeffs");
        }
        metric.mode = declared ? *declared : *implied;
        if (!implied) {
            const char* key = metric.mode == MetricMode::ClosedFormZ ? "Z"
                            : metric.mode == MetricMode::MuSeries    ? "mu"
                                                                     : "coeffs";
            require("metric", key);
        }

        switch (metric.mode) {
            case MetricMode::ClosedFormZ:
                if (!sc.model.builtin_am) {
                    throw ScenarioError(ErrorCode::InvalidScenario, z->line, 0,
                                        "closed_form_Z requires the builtin 'am' model");
                }
                metric.Z = expression(*z);
                break;
            case MetricMode::MuSeries:
                for (const auto& [item, offset] : split_list(mu->value)) {
                    metric.mu.push_back(expression(*mu, item, offset));
                }
                if (static_cast<int>(metric.mu.size()) != sc.dim()) {
                    throw ScenarioError(ErrorCode::InvalidScenario, mu->line, mu->column,
                                        "mu needs exactly " + std::to_string(sc.dim()) + " entries");
                }
                break;
            case MetricMode::NullspaceCoeffs:
                for (const auto& [item, offset] : split_list(coeffs->value)) {
                    Entry sub{item, coeffs->line, coeffs->column + offset};
                    metric.coeffs.push_back(constant(sub));
                }
                break;
        }

        if (const Entry* f = find("metric", "factor")) {
            if (f->value == "cholesky") {
                metric.factor = FactorChoice::Cholesky;
            } else if (f->value == "hermitian_root") {
                metric.factor = FactorChoice::HermitianRoot;
            } else {
                throw ScenarioError(ErrorCode::InvalidScenario, f->line, f->column,
                                    "factor must be 'cholesky' or 'hermitian_root'");
            }
        }
    }

    ComplexVector ket(const Entry& e, int dim) {
        // "(re, im), (re, im), ..."
        std::vector<Complex> values;
        const std::string& s = e.value;
        std::size_t k = 0;
        auto fail = [&](const std::string& msg) -> void {
            throw ScenarioError(ErrorCode::SyntaxError, e.line, e.column + k, msg);
        };
        auto skip = [&] {
            while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
        };
        auto number = [&]() -> double {
            skip();
            const char* begin = s.c_str() + k;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("expected a number");
            k += static_cast<std::size_t>(end - begin);
            return v;
        };
        for (;;) {
            skip();
            if (k >= s.size() || s[k] != '(') fail("expected '(' starting a complex pair");
            ++k;
            const double re = number();
            skip();
            if (k >= s.size() || s[k] != ',') fail("expected ',' inside a complex pair");
            ++k;
            const double im = number();
            skip();
            if (k >= s.size() || s[k] != ')') fail("expected ')' closing a complex pair");
            ++k;
            values.emplace_back(re, im);
            skip();
            if (k == s.size()) break;
            if (s[k] != ',') fail("expected ',' between complex pairs");
            ++k;
        }
        if (static_cast<int>(values.size()) != dim) {
            throw ScenarioError(ErrorCode::InvalidScenario, e.line, e.column,
                                "initial_ket needs " + std::to_string(dim) + " components");
        }
        ComplexVector v(dim);
        for (int j = 0; j < dim; ++j) v(j) = values[static_cast<std::size_t>(j)];
        if (v.norm() == 0.0) throw ScenarioError(ErrorCode::InvalidScenario, e.line, e.column, "initial ket is zero");
        return v;
    }

    void read_evolution(ScenarioFile& sc) {
        auto& ev = sc.evolution;
        if (const Entry* t0 = find("evolution", "t0")) ev.t0 = constant(*t0);
        const Entry& t1 = require("evolution", "t1");
        ev.t1 = constant(t1);
        if (!(ev.t1 >= ev.t0)) throw ScenarioError(ErrorCode::InvalidScenario, t1.line, t1.column, "t1 must be >= t0");
        const Entry& steps = require("evolution", "steps");
        const double n = constant(steps);
        if (n < 1 || std::floor(n) != n || n > 1e8) {
            throw ScenarioError(ErrorCode::InvalidScenario, steps.line, steps.column,
                                "steps must be a positive integer");
        }
        ev.steps = static_cast<int>(n);
        ev.initial_ket = ket(require("evolution", "initial_ket"), sc.dim());
        if (const Entry* s = find("evolution", "stepper")) {
            if (s->value != "rk4") {
                throw ScenarioError(ErrorCode::InvalidScenario, s->line, s->column,
                                    "unsupported stepper '" + s->value + "' (available: rk4)");
            }
            ev.stepper = s->value;
        }
        if (const Entry* h = find("evolution", "derivative_step")) {
            ev.derivative_step = constant(*h);
            if (!(ev.derivative_step > 0.0)) {
                throw ScenarioError(ErrorCode::InvalidScenario, h->line, h->column, "derivative_step must be positive");
            }
        }
        if (const Entry* d = find("evolution", "derivative")) {
            if (d->value == "finite_difference") {
                ev.finite_difference = true;
            } else if (d->value != "exact") {
                throw ScenarioError(ErrorCode::InvalidScenario, d->line, d->column,
                                    "derivative must be 'exact' or 'finite_difference'");
            }
        }
    }

    void read_tolerances(ScenarioFile& sc) {
        auto positive = [&](const char* key, double& target) {
            if (const Entry* e = find("tolerances", key)) {
                target = constant(*e);
                if (!(target > 0.0)) {
                    throw ScenarioError(ErrorCode::InvalidScenario, e->line, e->column,
                                        std::string(key) + " tolerance must be positive");
                }
            }
        };
        positive("compatibility", sc.tolerances.compatibility);
        positive("reality", sc.tolerances.reality);
        positive("gap", sc.tolerances.gap);
        positive("nullspace", sc.tolerances.nullspace);
    }

    void read_output(ScenarioFile& sc) {
        auto& out = sc.output;
        if (const Entry* p = find("output", "path")) out.path = p->value;
        if (const Entry* f = find("output", "format")) {
            try {
                out.format = parse_output_format(f->value);
            } catch (const Error& err) {
                throw ScenarioError(ErrorCode::UnsupportedFormat, f->line, f->column, err.what());
            }
        }
        if (const Entry* q = find("output", "quantities")) {
            static const std::set<std::string, std::less<>> known = {"norm", "generator_gap", "expectation",
                                                                     "consistency"};
            out.quantities.clear();
            for (const auto& [item, offset] : split_list(q->value)) {
                if (!known.contains(item)) {
                    throw ScenarioError(ErrorCode::InvalidScenario, q->line, q->column + offset,
                                        "unknown quantity '" + item + "'");
                }
                out.quantities.push_back(item);
            }
        } else if (sc.model.observable) {
            out.quantities.push_back("expectation");
        }
        const bool wants_expectation =
            std::find(out.quantities.begin(), out.quantities.end(), "expectation") != out.quantities.end();
        if (wants_expectation && !sc.model.observable) {
            throw ScenarioError(ErrorCode::InvalidScenario, section_line("output"), 0,
                                "quantity 'expectation' needs Lambda entries in [model]");
        }
    }

    void check_unused() const {
        for (const auto& [name, section] : raw_.sections) {
            for (const auto& [key, entry] : section) {
                if (!used_.contains({name, key})) {
                    throw ScenarioError(ErrorCode::InvalidScenario, entry.line, 0,
                                        "unknown key '" + key + "' in [" + name + "]");
                }
            }
        }
    }

    void check_bindings(const ScenarioFile& sc) const {
        for (const auto& tracked : expressions_) {
            for (const auto& name : tracked.expr.parameters()) {
                if (!sc.parameters.contains(name)) {
                    throw ScenarioError(ErrorCode::UnboundParameter, tracked.line, tracked.column,
                                        "unbound parameter '" + name + "'");
                }
            }
        }
    }
};

template <class F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        throw PipelineError(e.code(), stage, e.what());
    } catch (const std::exception& e) {
        throw PipelineError(ErrorCode::InvalidScenario, stage, e.what());
    }
}

TimeDependentOperator hamiltonian_operator(const ScenarioFile& sc) {
    if (sc.model.builtin_am) return am_hamiltonian_operator(sc.model.r, sc.model.beta);
    return TimeDependentOperator(sc.model.dim, sc.model.hamiltonian);
}

ComplexMatrix omega_from_mu_at(const TimeDependentOperator& h, const ScenarioFile& sc, double t) {
    const BiorthogonalSystem sys =
        biorthogonal_decompose(h.evaluate(t, sc.parameters), sc.tolerances.reality, sc.tolerances.gap);
    MuParameters mu;
    for (const auto& e : sc.metric.mu) mu.mu.push_back(e.evaluate(t, sc.parameters));
    return omega_from_mu(sys, mu).omega;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_complex(Complex z) {
    return format_double(z.real()) + (std::signbit(z.imag()) ? "-" : "+") + format_double(std::abs(z.imag())) + "i";
}

void write_matrix(std::ostringstream& os, const ComplexMatrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        os << " ";
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << ' ' << format_complex(m(r, c));
        os << '\n';
    }
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
    try {
        return Reader(split_sections(text)).read();
    } catch (const ScenarioError&) {
        throw;
    } catch (const Error& e) {
        throw ScenarioError(e.code(), 0, 0, e.what());
    } catch (const std::exception& e) {
        throw ScenarioError(ErrorCode::InvalidScenario, 0, 0, e.what());
    }
}

TimeDependentScenario build_scenario(const ScenarioFile& sc) {
    TimeDependentScenario out;
    out.parameters = sc.parameters;
    out.t0 = sc.evolution.t0;
    out.t1 = sc.evolution.t1;
    out.steps = sc.evolution.steps;
    out.initial_ket = sc.evolution.initial_ket;
    out.derivative_step = sc.evolution.derivative_step;
    out.force_finite_difference = sc.evolution.finite_difference;
    out.compatibility_tol = sc.tolerances.compatibility;

    in_stage("model", [&] {
        out.hamiltonian = hamiltonian_operator(sc);
        if (sc.model.observable) out.observable = TimeDependentOperator(sc.model.dim, *sc.model.observable);
        for (double t : out.grid()) {
            const ComplexMatrix h = out.hamiltonian.evaluate(t, sc.parameters);
            if (out.observable) out.observable->evaluate(t, sc.parameters);
            (void)h;
        }
        return 0;
    });

    in_stage("metric", [&] {
        switch (sc.metric.mode) {
            case MetricMode::ClosedFormZ: {
                for (double t : out.grid()) {
                    AMModelParams p;
                    p.r = sc.model.r.evaluate(t, sc.parameters).real();
                    p.beta = sc.model.beta.evaluate(t, sc.parameters).real();
                    p.Z = sc.metric.Z->evaluate(t, sc.parameters).real();
                    am_metric(p);  // throws on the singular boundary
                }
                out.mapping = MappingSchedule::from_operator(
                    am_omega_operator(sc.model.r, sc.model.beta, *sc.metric.Z), sc.parameters);
                break;
            }
            case MetricMode::MuSeries: {
                const TimeDependentOperator h = out.hamiltonian;
                out.mapping = MappingSchedule::from_function(
                    [h, sc](double t) { return omega_from_mu_at(h, sc, t); });
                break;
            }
            case MetricMode::NullspaceCoeffs: {
                if (out.hamiltonian.depends_on_time()) {
                    throw Error(ErrorCode::InvalidScenario,
                                "nullspace_coeffs needs a time-independent H (the nullspace basis has no "
                                "canonical continuation in t)");
                }
                const ComplexMatrix h = out.hamiltonian.evaluate(out.t0, sc.parameters);
                const MetricFamily family = solve_intertwining(h, sc.tolerances.nullspace);
                const MetricCandidate theta = select_positive(family, sc.metric.coeffs);
                const MappingFactorization fac = sc.metric.factor == FactorChoice::Cholesky
                                                     ? cholesky_factor(theta)
                                                     : hermitian_root_factor(theta);
                const ComplexMatrix omega = fac.omega;
                const auto n = omega.rows();
                out.mapping.omega = [omega](double) { return omega; };
                out.mapping.omega_derivative = [n](double) -> ComplexMatrix { return ComplexMatrix::Zero(n, n); };
                break;
            }
        }
        validate_compatibility(out);
        return 0;
    });
    return out;
}

ResultTable run_scenario(const ScenarioFile& sc) {
    const TimeDependentScenario scenario = build_scenario(sc);
    const auto& q = sc.output.quantities;
    auto wants = [&](const char* name) { return std::find(q.begin(), q.end(), name) != q.end(); };

    return in_stage("evolution", [&] {
        const EvolutionTrajectory tr = evolve_doublet(scenario);
        std::optional<ConsistencyReport> report;
        if (wants("consistency")) {
            report = consistency_report(scenario, tr, evolve_operators(scenario), evolve_textbook(scenario));
        }

        ResultTable table;
        table.columns.push_back("t");
        if (wants("norm")) table.columns.push_back("physical_norm");
        if (wants("generator_gap")) table.columns.push_back("generator_gap");
        if (wants("expectation")) table.columns.push_back("expectation");
        if (report) {
            for (const char* c : {"doublet_vs_right", "doublet_vs_textbook", "right_vs_textbook", "ketket_link",
                                  "metric_link", "unitarity"}) {
                table.columns.push_back(c);
            }
        }
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            std::vector<double> row{tr.times[k]};
            if (wants("norm")) row.push_back(tr.physical_norms[k]);
            if (wants("generator_gap")) row.push_back(tr.generator_gaps[k]);
            if (wants("expectation")) row.push_back((*tr.expectations)[k]);
            if (report) {
                row.insert(row.end(), {report->doublet_vs_right[k], report->doublet_vs_textbook[k],
                                       report->right_vs_textbook[k], report->ketket_link[k], report->metric_link[k],
                                       report->unitarity[k]});
            }
            for (double v : row) {
                if (!std::isfinite(v)) throw Error(ErrorCode::EvaluationError, "non-finite value in result table");
            }
            table.rows.push_back(std::move(row));
        }
        return table;
    });
}

std::string emit(const ResultTable& table, OutputFormat format) {
    if (format == OutputFormat::Csv) {
        std::string out;
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out += ',';
            out += table.columns[c];
        }
        out += '\n';
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out += ',';
                out += format_double(row[c]);
            }
            out += '\n';
        }
        return out;
    }
    nlohmann::ordered_json j;
    j["columns"] = table.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) j["rows"].push_back(row);
    return j.dump() + "\n";
}

ResultTable parse_table_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        ResultTable t;
        t.columns = j.at("columns").get<std::vector<std::string>>();
        t.rows = j.at("rows").get<std::vector<std::vector<double>>>();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::UnsupportedFormat, std::string("malformed result JSON: ") + e.what());
    }
}

std::string describe_metric_family(const ScenarioFile& sc) {
    return in_stage("metric", [&] {
        const ComplexMatrix h = hamiltonian_operator(sc).evaluate(sc.evolution.t0, sc.parameters);
        const MetricFamily family = solve_intertwining(h, sc.tolerances.nullspace);
        std::ostringstream os;
        os << "t = " << format_double(sc.evolution.t0) << '\n';
        os << "family_dim = " << family.dim() << '\n';
        for (int k = 0; k < family.dim(); ++k) {
            const ComplexMatrix& b = family.basis[static_cast<std::size_t>(k)];
            os << "basis[" << k << "] intertwining_residual = " << format_double(intertwining_residual(h, b)) << '\n';
            write_matrix(os, b);
        }
        return os.str();
    });
}

std::string describe_spectrum(const ScenarioFile& sc) {
    return in_stage("model", [&] {
        const ComplexMatrix h = hamiltonian_operator(sc).evaluate(sc.evolution.t0, sc.parameters);
        const BiorthogonalSystem sys = biorthogonal_decompose(h, sc.tolerances.reality, sc.tolerances.gap);
        std::ostringstream os;
        os << "t = " << format_double(sc.evolution.t0) << '\n';
        os << "energies =";
        for (double e : sys.energies) os << ' ' << format_double(e);
        os << '\n';
        os << "biorthogonality_residual = " << format_double(biorthogonality_residual(sys)) << '\n';
        return os.str();
    });
}

}  // namespace qhm
