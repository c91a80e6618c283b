#include "qhm/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qhm/factor.hpp"
#include "qhm/metric.hpp"

namespace qhm {

namespace {

void check_horizon(const TimeDependentScenario& sc) {
    if (!(sc.t1 >= sc.t0)) throw Error(ErrorCode::DomainError, "evolution horizon must satisfy t1 >= t0");
    if (sc.steps < 1) throw Error(ErrorCode::StepSizeUnderflow, "at least one step is required");
    const double dt = (sc.t1 - sc.t0) / sc.steps;
    const double scale = std::max({1.0, std::abs(sc.t0), std::abs(sc.t1)});
    if (sc.t1 > sc.t0 && dt <= 16.0 * std::numeric_limits<double>::epsilon() * scale) {
        throw Error(ErrorCode::StepSizeUnderflow, "step size underflows the time resolution");
    }
}

void check_initial_ket(const TimeDependentScenario& sc) {
    if (sc.initial_ket.size() != sc.hamiltonian.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "initial ket dimension does not match the Hamiltonian");
    }
    if (sc.initial_ket.norm() == 0.0) throw Error(ErrorCode::DomainError, "initial ket must be nonzero");
}

// Frames at every grid node and every midpoint, in time order: index 2k is
// node k, index 2k+1 is the midpoint between nodes k and k+1.
std::vector<Frame> stage_frames(const TimeDependentScenario& sc) {
    const std::vector<double> nodes = sc.grid();
    std::vector<Frame> frames;
    frames.reserve(2 * nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        frames.push_back(evaluate_frame(sc, nodes[k]));
        if (k + 1 < nodes.size()) frames.push_back(evaluate_frame(sc, 0.5 * (nodes[k] + nodes[k + 1])));
    }
    return frames;
}

// Classical fourth-order Runge-Kutta step for dy/dt = -i A(t) y.
ComplexMatrix rk4_step(const ComplexMatrix& a0, const ComplexMatrix& a_half, const ComplexMatrix& a1,
                       const ComplexMatrix& y, double dt) {
    const ComplexMatrix k1 = -kI * (a0 * y);
    const ComplexMatrix k2 = -kI * (a_half * (y + (0.5 * dt) * k1));
    const ComplexMatrix k3 = -kI * (a_half * (y + (0.5 * dt) * k2));
    const ComplexMatrix k4 = -kI * (a1 * (y + dt * k3));
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class Select>
std::vector<ComplexMatrix> integrate(const std::vector<double>& nodes, const std::vector<Frame>& frames,
                                     const ComplexMatrix& initial, Select coefficient) {
    std::vector<ComplexMatrix> out;
    out.reserve(nodes.size());
    out.push_back(initial);
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double dt = nodes[k + 1] - nodes[k];
        out.push_back(rk4_step(coefficient(frames[2 * k]), coefficient(frames[2 * k + 1]),
                               coefficient(frames[2 * k + 2]), out.back(), dt));
    }
    return out;
}

double relative(double residual, const ComplexMatrix& a, const ComplexMatrix& b) {
    return residual / std::max({1.0, max_abs(a), max_abs(b)});
}

}  // namespace

MappingSchedule MappingSchedule::from_operator(const TimeDependentOperator& omega, ParameterMap params) {
    MappingSchedule s;
    const TimeDependentOperator derivative = omega.derivative();
    s.omega = [omega, params](double t) { return omega.evaluate(t, params); };
    s.omega_derivative = [derivative, params](double t) { return derivative.evaluate(t, params); };
    return s;
}

MappingSchedule MappingSchedule::from_function(std::function<ComplexMatrix(double)> omega) {
    MappingSchedule s;
    s.omega = std::move(omega);
    return s;
}

std::vector<double> TimeDependentScenario::grid() const {
    check_horizon(*this);
    if (t1 == t0) return {t0};
    std::vector<double> g(static_cast<std::size_t>(steps) + 1);
    const double dt = (t1 - t0) / steps;
    for (int k = 0; k <= steps; ++k) g[static_cast<std::size_t>(k)] = t0 + k * dt;
    g.back() = t1;
    return g;
}

double TimeDependentScenario::effective_derivative_step() const {
    if (derivative_step > 0.0) return derivative_step;
    const double horizon = t1 - t0;
    return horizon > 0.0 ? 1e-6 * horizon : 1e-6;
}

Frame evaluate_frame(const TimeDependentScenario& sc, double t) {
    if (!sc.mapping.omega) throw Error(ErrorCode::InvalidScenario, "scenario has no mapping Omega(t)");
    Frame f;
    f.t = t;
    f.hamiltonian = sc.hamiltonian.evaluate(t, sc.parameters);
    const MappingFactorization fac = factor_from_omega(sc.mapping.omega(t), sc.max_condition);
    if (fac.omega.rows() != f.hamiltonian.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "Omega and H differ in dimension");
    }
    f.omega = fac.omega;
    f.omega_inverse = fac.omega_inverse;
    if (sc.mapping.has_exact_derivative() && !sc.force_finite_difference) {
        f.omega_dot = sc.mapping.omega_derivative(t);
    } else {
        const double h = sc.effective_derivative_step();
        f.omega_dot = (sc.mapping.omega(t + h) - sc.mapping.omega(t - h)) / (2.0 * h);
    }
    f.generator = f.hamiltonian - kI * (f.omega_inverse * f.omega_dot);
    return f;
}

ComplexMatrix generator(const TimeDependentScenario& sc, double t) {
    const double slack = 1e-12 * std::max({1.0, std::abs(sc.t0), std::abs(sc.t1)});
    if (t < sc.t0 - slack || t > sc.t1 + slack) {
        throw Error(ErrorCode::DomainError, "time " + std::to_string(t) + " lies outside the horizon");
    }
    return evaluate_frame(sc, t).generator;
}

double generator_observable_defect(const TimeDependentScenario& sc, double t) {
    const Frame f = evaluate_frame(sc, t);
    const ComplexMatrix theta = f.metric();
    return max_abs(theta * f.generator - f.generator.adjoint() * theta);
}

double validate_compatibility(const TimeDependentScenario& sc) {
    double worst = 0.0;
    for (double t : sc.grid()) {
        const ComplexMatrix h = sc.hamiltonian.evaluate(t, sc.parameters);
        const MappingFactorization fac = factor_from_omega(sc.mapping.omega(t), sc.max_condition);
        const ComplexMatrix theta = metric_of(fac);
        const double r = relative(intertwining_residual(h, theta), h, theta);
        worst = std::max(worst, r);
        if (r > sc.compatibility_tol) {
            throw Error(ErrorCode::CompatibilityViolation,
                        "H(t) is not quasi-Hermitian for Theta(t) at t = " + std::to_string(t) +
                            " (relative residual " + std::to_string(r) + ")");
        }
        if (sc.observable) {
            const ComplexMatrix lambda = sc.observable->evaluate(t, sc.parameters);
            const double rl = relative(max_abs(theta * lambda - lambda.adjoint() * theta), lambda, theta);
            if (rl > sc.compatibility_tol) {
                throw Error(ErrorCode::CompatibilityViolation,
                            "Lambda(t) is not quasi-Hermitian for Theta(t) at t = " + std::to_string(t) +
                                " (relative residual " + std::to_string(rl) + ")");
            }
        }
    }
    return worst;
}

OperatorTrajectory evolve_textbook(const TimeDependentScenario& sc) {
    const std::vector<double> nodes = sc.grid();
    const std::vector<Frame> frames = stage_frames(sc);
    std::vector<ComplexMatrix> physical;
    physical.reserve(frames.size());
    for (const Frame& f : frames) {
        ComplexMatrix h = f.physical_hamiltonian();
        const double defect = hermiticity_defect(h);
        if (defect > sc.compatibility_tol * std::max(1.0, max_abs(h))) {
            throw Error(ErrorCode::NonHermitianPushforward,
                        "Omega H Omega^-1 is not Hermitian at t = " + std::to_string(f.t) +
                            " (defect " + std::to_string(defect) + ")");
        }
        physical.push_back(std::move(h));
    }
    const auto n = sc.hamiltonian.dim();
    OperatorTrajectory out;
    out.times = nodes;
    std::vector<Frame> wrapped(physical.size());
    for (std::size_t k = 0; k < physical.size(); ++k) wrapped[k].generator = std::move(physical[k]);
    out.values = integrate(nodes, wrapped, ComplexMatrix::Identity(n, n),
                           [](const Frame& f) -> const ComplexMatrix& { return f.generator; });
    return out;
}

EvolutionTrajectory evolve_doublet(const TimeDependentScenario& sc) {
    check_initial_ket(sc);
    const std::vector<double> nodes = sc.grid();
    const std::vector<Frame> frames = stage_frames(sc);

    const ComplexMatrix ket0 = sc.initial_ket;
    const ComplexMatrix ketket0 = frames.front().metric() * sc.initial_ket;
    const auto kets = integrate(nodes, frames, ket0, [](const Frame& f) -> const ComplexMatrix& { return f.generator; });
    const auto ketkets = integrate(nodes, frames, ketket0,
                                   [](const Frame& f) -> ComplexMatrix { return f.generator.adjoint(); });

    EvolutionTrajectory tr;
    tr.times = nodes;
    if (sc.observable) tr.expectations.emplace();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const ComplexVector ket = kets[k].col(0);
        const ComplexVector ketket = ketkets[k].col(0);
        const Frame& f = frames[2 * k];
        const Complex norm = ketket.dot(ket);
        tr.kets.push_back(ket);
        tr.ketkets.push_back(ketket);
        tr.physical_norms.push_back(norm.real());
        tr.generator_gaps.push_back(max_abs(f.generator - f.hamiltonian));
        if (sc.observable) {
            const ComplexMatrix lambda = sc.observable->evaluate(nodes[k], sc.parameters);
            tr.expectations->push_back((ketket.dot(lambda * ket) / norm).real());
        }
    }
    return tr;
}

OperatorEvolution evolve_operators(const TimeDependentScenario& sc) {
    const std::vector<double> nodes = sc.grid();
    const std::vector<Frame> frames = stage_frames(sc);
    const auto n = sc.hamiltonian.dim();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);

    OperatorEvolution out;
    out.times = nodes;
    out.right = integrate(nodes, frames, id, [](const Frame& f) -> const ComplexMatrix& { return f.generator; });
    // H^dagger + i Omega-dot^dagger (Omega^{-1})^dagger is the adjoint of the generator.
    out.left_adjoint = integrate(nodes, frames, id, [](const Frame& f) -> ComplexMatrix {
        return f.hamiltonian.adjoint() + kI * (f.omega_dot.adjoint() * f.omega_inverse.adjoint());
    });
    return out;
}

double ConsistencyReport::max_triangle() const {
    double worst = 0.0;
    for (const auto* v : {&doublet_vs_right, &doublet_vs_textbook, &right_vs_textbook}) {
        for (double x : *v) worst = std::max(worst, x);
    }
    return worst;
}

ConsistencyReport consistency_report(const TimeDependentScenario& sc, const EvolutionTrajectory& doublet,
                                     const OperatorEvolution& ops, const OperatorTrajectory& textbook) {
    const std::size_t count = doublet.times.size();
    if (ops.times.size() != count || textbook.times.size() != count) {
        throw Error(ErrorCode::DimensionMismatch, "trajectories were computed on different grids");
    }
    const auto n = sc.hamiltonian.dim();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    const Frame start = evaluate_frame(sc, doublet.times.front());
    const ComplexMatrix theta0 = start.metric();
    const ComplexVector mapped0 = start.omega * sc.initial_ket;

    ConsistencyReport r;
    r.times = doublet.times;
    for (std::size_t k = 0; k < count; ++k) {
        const Frame f = evaluate_frame(sc, doublet.times[k]);
        const ComplexMatrix theta = f.metric();
        const ComplexVector via_right = ops.right[k] * sc.initial_ket;
        const ComplexVector via_textbook = f.omega_inverse * (textbook.values[k] * mapped0);
        r.doublet_vs_right.push_back((doublet.kets[k] - via_right).norm());
        r.doublet_vs_textbook.push_back((doublet.kets[k] - via_textbook).norm());
        r.right_vs_textbook.push_back((via_right - via_textbook).norm());
        r.ketket_link.push_back((theta * doublet.kets[k] - doublet.ketkets[k]).norm());
        r.metric_link.push_back(max_abs(theta * ops.right[k] - ops.left_adjoint[k] * theta0));
        r.unitarity.push_back(max_abs(textbook.values[k].adjoint() * textbook.values[k] - id));
    }
    return r;
}

QuasistationarityResult quasistationarity_check(const TimeDependentScenario& sc, std::vector<double> sample_times) {
    if (sample_times.empty()) {
        constexpr int kDefaultSamples = 5;
        for (int k = 0; k < kDefaultSamples; ++k) {
            sample_times.push_back(sc.t0 + (sc.t1 - sc.t0) * k / (kDefaultSamples - 1));
        }
    }
    if (sample_times.size() < 2) throw Error(ErrorCode::DomainError, "at least two sample times are required");

    std::vector<ComplexMatrix> hs;
    for (double t : sample_times) hs.push_back(sc.hamiltonian.evaluate(t, sc.parameters));
    const MetricFamily family = solve_common_intertwining(hs);

    QuasistationarityResult result;
    result.common_family_dim = family.dim();
    if (family.empty()) return result;

    std::vector<ComplexMatrix> candidates;
    const auto n = hs.front().rows();
    candidates.push_back(family.project(ComplexMatrix::Identity(n, n)));
    const int d = family.dim();
    if (d <= 4) {
        static constexpr double grid[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        for (;;) {
            std::vector<double> coeffs(static_cast<std::size_t>(d));
            for (int k = 0; k < d; ++k) coeffs[static_cast<std::size_t>(k)] = grid[idx[static_cast<std::size_t>(k)]];
            candidates.push_back(family.combine(coeffs));
            int k = 0;
            while (k < d && ++idx[static_cast<std::size_t>(k)] == 5) idx[static_cast<std::size_t>(k++)] = 0;
            if (k == d) break;
        }
    } else {
        for (int j = 0; j < d; ++j) {
            candidates.push_back(family.basis[static_cast<std::size_t>(j)]);
            candidates.push_back(-family.basis[static_cast<std::size_t>(j)]);
            for (int k = j + 1; k < d; ++k) {
                for (double sj : {-1.0, 1.0}) {
                    for (double sk : {-1.0, 1.0}) {
                        candidates.push_back(sj * family.basis[static_cast<std::size_t>(j)] +
                                             sk * family.basis[static_cast<std::size_t>(k)]);
                    }
                }
            }
        }
    }

    for (const auto& c : candidates) {
        if (c.norm() == 0.0) continue;
        MetricCandidate cert = positivity_certificate(c);
        if (cert.positive_definite) {
            result.exists = true;
            result.witness = std::move(cert);
            break;
        }
    }
    return result;
}

}  // namespace qhm
