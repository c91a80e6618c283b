// Acceptance suite: one PASS/FAIL line per criterion.
//
// usage: qhm_acceptance <cli-binary> <scenario-file> <work-dir> [--expect-fail N]...
//
// Exits 0 when every criterion passes, or when the only failures are the ones
// named with --expect-fail (they are still printed as FAIL).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <regex>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "../support.hpp"
#include "qhm/evolution.hpp"
#include "qhm/factor.hpp"
#include "qhm/metric.hpp"
#include "qhm/model.hpp"
#include "qhm/observables.hpp"
#include "qhm/scenario.hpp"
#include "qhm/spectral.hpp"

using namespace qhm;
using qhm::testing::am_scenario;
using qhm::testing::AMScenarioSpec;
using qhm::testing::frozen_am_scenario;
using qhm::testing::kPi;

namespace {

const double kRs[] = {0.5, 1.0, 2.0};
const double kBetas[] = {0.0, 0.7, kPi};
const double kZs[] = {kPi / 6, kPi / 4, kPi / 3, 2 * kPi / 3};

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <class F>
void for_grid(F&& f) {
    for (double r : kRs)
        for (double beta : kBetas)
            for (double Z : kZs) f(AMModelParams{r, beta, Z, 1.0});
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

double drift(const std::vector<double>& norms) {
    double d = 0.0;
    for (double n : norms) d = std::max(d, std::abs(n - norms.front()));
    return d;
}

Outcome closed_form_metric() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for_grid([&](const AMModelParams& p) {
        const MappingFactorization m = am_mapping(p);
        worst = std::max(worst, max_abs(m.omega.adjoint() * m.omega - am_metric(p).theta));
    });
    const double secs = seconds_since(start);
    return {worst < 1e-12 && secs < 1.0, "max|Omega^dag Omega - Theta| = " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome pullback_identity() {
    double product = 0.0, herm = 0.0, spec = 0.0;
    for_grid([&](const AMModelParams& p) {
        const MappingFactorization m = am_mapping(p);
        const ComplexMatrix h = am_physical_hamiltonian(p);
        product = std::max(product, max_abs(m.omega * am_hamiltonian(p) * m.omega_inverse - h));
        herm = std::max(herm, hermiticity_defect(h));
        const auto ev = sorted_eigenvalues(h);
        spec = std::max({spec, std::abs(ev[0] + 1.0), std::abs(ev[1] - 1.0)});
    });
    return {product < 1e-12 && herm < 1e-14 && spec < 1e-12,
            "product " + fmt(product) + ", hermiticity " + fmt(herm) + ", spectrum " + fmt(spec)};
}

Outcome solver_vs_closed_form() {
    bool dims = true;
    double worst = 0.0;
    for_grid([&](const AMModelParams& p) {
        const MetricFamily fam = solve_intertwining(am_hamiltonian(p));
        dims = dims && fam.dim() == 2;
        worst = std::max(worst, fam.projection_residual(am_metric(p).theta));
    });
    return {dims && worst < 1e-10, std::string("dimension 2 everywhere: ") + (dims ? "yes" : "no") +
                                       ", max projection residual " + fmt(worst)};
}

// The constraint residual is measured on the real-parameter least-squares fit
// of each family element. What the fit leaves over must be a multiple of the
// complementary direction, which is compatible but outside the real form.
Outcome observable_constraint() {
    bool dims = true;
    double constraint = 0.0, leftover = 0.0, form = 0.0, roundtrip = 0.0;
    for_grid([&](const AMModelParams& p) {
        const ObservableFamily fam = solve_compatibility(am_metric(p));
        dims = dims && fam.dim() == 4;
        OperatorSpan complement;
        const ComplexMatrix perp = am_observable_complement(p.r, p.beta, p.Z);
        complement.basis = {perp / perp.norm()};
        for (const auto& L : fam.basis) {
            const AMObservableFit f = fit_am_observable(L, p.beta);
            constraint = std::max(constraint, am_constraint_residual(f.params, p.r, p.Z));
            const ComplexMatrix rest = L - am_observable(f.params);
            leftover = std::max(leftover, rest.norm() * complement.projection_residual(rest));
            form = std::max(form, f.residual);
        }
    });
    for (double r : kRs) {
        for (int k = 1; k < 200; ++k) {
            const double Z = kPi * k / 200.0;
            AMObservableParams q{1.3, 0.0, -0.4, 0.2, 0.7};
            q.p = q.q * r * r + (q.a - q.d) * r * std::cos(Z);
            roundtrip = std::max(roundtrip, std::abs(reconstruct_Z(q, r) - Z));
        }
    }
    return {dims && constraint < 1e-10 && leftover < 1e-10 && roundtrip < 1e-10,
            std::string("dimension 4 everywhere: ") + (dims ? "yes" : "no") + ", constraint residual " +
                fmt(constraint) + ", off-form part outside complement " + fmt(leftover) +
                " (largest off-form part " + fmt(form) + "), max |Z - Z'| " + fmt(roundtrip)};
}

Outcome mu_series() {
    double distance = 0.0, offdiag = 0.0;
    for (double r : kRs) {
        for (double beta : kBetas) {
            const ComplexMatrix H = am_hamiltonian({r, beta});
            const BiorthogonalSystem sys = biorthogonal_decompose(H);
            // Real span of metric_from_mu over varied |mu_n|^2, orthonormalized.
            OperatorSpan span;
            for (const MuParameters& mu : {MuParameters{{1.0, 0.5}}, MuParameters{{Complex(0.3, 0.4), 2.0}},
                                           MuParameters{{1.0, 1.0}}}) {
                ComplexMatrix m = metric_from_mu(sys, mu).theta;
                for (const auto& b : span.basis) m -= frobenius_inner(b, m) * b;
                if (m.norm() > 1e-8) span.basis.push_back(m / m.norm());
            }
            distance = std::max(distance, span_distance(span, solve_intertwining(H)));
            const ComplexMatrix d = pushforward_hamiltonian(H, omega_from_mu(sys, {{Complex(0.6, -0.2), 1.7}}));
            offdiag = std::max({offdiag, std::abs(d(0, 1)), std::abs(d(1, 0))});
        }
    }
    return {distance < 1e-8 && offdiag < 1e-10,
            "mutual projection residual " + fmt(distance) + ", max off-diagonal " + fmt(offdiag)};
}

struct DynamicsRun {
    EvolutionTrajectory doublet;
    ConsistencyReport report;
    double seconds = 0.0;
};

DynamicsRun run_dynamics(const TimeDependentScenario& sc) {
    const auto start = std::chrono::steady_clock::now();
    DynamicsRun run;
    run.doublet = evolve_doublet(sc);
    const OperatorEvolution ops = evolve_operators(sc);
    const OperatorTrajectory u = evolve_textbook(sc);
    run.report = consistency_report(sc, run.doublet, ops, u);
    run.seconds = seconds_since(start);
    return run;
}

Outcome dynamics(const DynamicsRun& run) {
    const double d = drift(run.doublet.physical_norms);
    const double tri = run.report.max_triangle();
    const double link = max_of(run.report.metric_link);
    const double unit = max_of(run.report.unitarity);
    return {d < 1e-6 && tri < 1e-6 && link < 1e-6 && unit < 1e-8 && run.seconds < 10.0,
            "norm drift " + fmt(d) + ", triangle " + fmt(tri) + ", Theta U_R - U_L^dag Theta0 " + fmt(link) +
                ", u^dag u - I " + fmt(unit) + ", " + fmt(run.seconds) + " s"};
}

Outcome generator_gap(const DynamicsRun& run) {
    const double gap = max_of(run.doublet.generator_gaps);
    const EvolutionTrajectory frozen = evolve_doublet(frozen_am_scenario());
    const double frozen_gap = max_of(frozen.generator_gaps);
    return {gap > 1e-3 && frozen_gap < 1e-9,
            "max gap " + fmt(gap) + ", frozen max gap " + fmt(frozen_gap)};
}

Outcome convergence(const DynamicsRun& run) {
    AMScenarioSpec fine;
    fine.steps = 20000;
    const double coarse_drift = drift(run.doublet.physical_norms);
    const double fine_drift = drift(evolve_doublet(am_scenario(fine)).physical_norms);
    const double ratio = coarse_drift / fine_drift;
    std::string detail = "drift " + fmt(coarse_drift) + " -> " + fmt(fine_drift) + ", ratio " + fmt(ratio);

    // Supplementary: the same ratio at steps where the drift is above roundoff.
    detail += "; coarse-step ratios";
    double prev = 0.0;
    for (int steps : {250, 500, 1000, 2000}) {
        AMScenarioSpec s;
        s.steps = steps;
        const double dd = drift(evolve_doublet(am_scenario(s)).physical_norms);
        if (prev > 0.0) detail += " " + fmt(prev / dd);
        prev = dd;
    }
    return {ratio >= 12.0 && ratio <= 20.0, detail};
}

Outcome quasistationarity() {
    AMScenarioSpec spec;
    spec.steps = 10;
    const QuasistationarityResult moving = quasistationarity_check(am_scenario(spec));
    const QuasistationarityResult frozen = quasistationarity_check(frozen_am_scenario(10));
    return {!moving.exists && frozen.exists,
            std::string("time-dependent exists = ") + (moving.exists ? "true" : "false") + " (common dim " +
                std::to_string(moving.common_family_dim) + "), frozen exists = " + (frozen.exists ? "true" : "false") +
                " (common dim " + std::to_string(frozen.common_family_dim) + ")"};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_command(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quote(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

Outcome cli_end_to_end(const std::string& cli, const std::filesystem::path& scenario,
                       const std::filesystem::path& work) {
    std::filesystem::create_directories(work);
    const auto csv_path = work / "acceptance.csv";
    const auto err_path = work / "acceptance.err";
    const int rc = run_command(quote(cli) + " run " + quote(scenario) + " --out " + quote(csv_path) + " 2> " +
                               quote(err_path));
    if (rc != 0) return {false, "run exited with " + std::to_string(rc) + ": " + slurp(err_path)};

    std::istringstream csv(slurp(csv_path));
    std::string line;
    std::getline(csv, line);
    std::vector<std::string> columns;
    {
        std::istringstream header(line);
        std::string c;
        while (std::getline(header, c, ',')) columns.push_back(c);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(csv, line)) {
        std::istringstream cells(line);
        std::string c;
        std::vector<double> row;
        while (std::getline(cells, c, ',')) row.push_back(std::stod(c));
        rows.push_back(row);
    }
    auto column = [&](const std::string& name) {
        std::vector<double> out;
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) return out;
        for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(it - columns.begin())]);
        return out;
    };
    const std::vector<std::string> needed{"physical_norm", "generator_gap", "doublet_vs_right", "doublet_vs_textbook",
                                          "right_vs_textbook", "metric_link", "unitarity"};
    for (const auto& n : needed) {
        if (column(n).empty()) return {false, "missing column " + n};
    }
    const double d = drift(column("physical_norm"));
    const double tri = std::max({max_of(column("doublet_vs_right")), max_of(column("doublet_vs_textbook")),
                                 max_of(column("right_vs_textbook"))});
    const double link = max_of(column("metric_link"));
    const double unit = max_of(column("unitarity"));
    const double gap = max_of(column("generator_gap"));
    const bool reproduced = rows.size() == 10001 && d < 1e-6 && tri < 1e-6 && link < 1e-6 && unit < 1e-8 && gap > 1e-3;

    // Corrupt one expression and expect a positioned diagnostic with exit code 2.
    std::string text = slurp(scenario);
    const auto pos = text.find("beta = ");
    if (pos == std::string::npos) return {false, "shipped scenario has no beta entry"};
    text.insert(pos + 7, "* ");
    const auto bad_path = work / "corrupted.scn";
    std::ofstream(bad_path, std::ios::binary) << text;
    const int bad_rc = run_command(quote(cli) + " run " + quote(bad_path) + " --out " + quote(work / "x.csv") +
                                   " 2> " + quote(err_path));
    std::string diag = slurp(err_path);
    while (!diag.empty() && diag.back() == '\n') diag.pop_back();
    const std::string prefix = bad_path.string() + ":";
    const bool positioned = diag.rfind(prefix, 0) == 0 &&
                            std::regex_search(diag.substr(prefix.size()), std::regex(R"(^\d+:\d+: error)"));
    return {reproduced && bad_rc == 2 && positioned,
            std::to_string(rows.size()) + " rows, drift " + fmt(d) + ", triangle " + fmt(tri) + ", gap " + fmt(gap) +
                "; corrupted file exit " + std::to_string(bad_rc) + ", diagnostic \"" + diag + "\""};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 4) {
        std::cerr << "usage: " << argv[0] << " <cli-binary> <scenario-file> <work-dir> [--expect-fail N]...\n";
        return 2;
    }
    const std::string cli = argv[1];
    const std::filesystem::path scenario = argv[2];
    const std::filesystem::path work = argv[3];
    std::set<int> expected_failures;
    for (int k = 4; k + 1 < argc; k += 2) {
        if (std::string(argv[k]) == "--expect-fail") expected_failures.insert(std::atoi(argv[k + 1]));
    }

    std::optional<DynamicsRun> dyn;
    auto shared_run = [&]() -> const DynamicsRun& {
        if (!dyn) dyn = run_dynamics(am_scenario());
        return *dyn;
    };

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"closed-form metric identity", closed_form_metric},
        {"pullback identity and isospectrality", pullback_identity},
        {"intertwining solver contains closed-form metric", solver_vs_closed_form},
        {"observable family and Z reconstruction", observable_constraint},
        {"mu-series metric span and diagonalization", mu_series},
        {"dynamics conservation and consistency", [&] { return dynamics(shared_run()); }},
        {"generator differs from Hamiltonian", [&] { return generator_gap(shared_run()); }},
        {"norm drift convergence order (4th-order band)", [&] { return convergence(shared_run()); }},
        {"quasistationarity obstruction", quasistationarity},
        {"command-line end to end", [&] { return cli_end_to_end(cli, scenario, work); }},
    };

    int unexpected = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[k].first << ": " << o.detail
                  << (!o.pass && expected_failures.count(id) ? " (known failure)" : "") << '\n';
        if (!o.pass && !expected_failures.count(id)) ++unexpected;
    }
    return unexpected == 0 ? 0 : 1;
}
