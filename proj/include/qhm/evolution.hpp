#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qhm/expression.hpp"
#include "qhm/model.hpp"
#include "qhm/types.hpp"

namespace qhm {

/// Time-dependent Dyson map Omega(t), optionally with its exact derivative.
/// Without a derivative, Omega-dot is taken by central finite difference.
struct MappingSchedule {
    std::function<ComplexMatrix(double)> omega;
    std::function<ComplexMatrix(double)> omega_derivative;

    /// Expression-valued Omega; its symbolic derivative is used.
    static MappingSchedule from_operator(const TimeDependentOperator& omega, ParameterMap params);
    /// Numerically defined Omega; derivative by finite difference.
    static MappingSchedule from_function(std::function<ComplexMatrix(double)> omega);

    bool has_exact_derivative() const noexcept { return static_cast<bool>(omega_derivative); }
};

struct TimeDependentScenario {
    TimeDependentOperator hamiltonian;
    std::optional<TimeDependentOperator> observable;
    MappingSchedule mapping;
    ParameterMap parameters;
    double t0 = 0.0;
    double t1 = 1.0;
    int steps = 1000;
    ComplexVector initial_ket;
    /// Finite-difference step for Omega-dot; 0 selects 1e-6 * (t1 - t0).
    double derivative_step = 0.0;
    /// Forces finite differences even when an exact derivative exists.
    bool force_finite_difference = false;
    /// Relative tolerance for H^dagger Theta = Theta H and the Hermiticity of Omega H Omega^{-1}.
    double compatibility_tol = 1e-8;
    double max_condition = 1e12;

    std::vector<double> grid() const;
    double effective_derivative_step() const;
};

/// Everything evaluated at one instant.
struct Frame {
    double t = 0.0;
    ComplexMatrix hamiltonian;
    ComplexMatrix omega;
    ComplexMatrix omega_inverse;
    ComplexMatrix omega_dot;
    ComplexMatrix generator;  // H - i Omega^{-1} Omega-dot

    ComplexMatrix metric() const { return omega.adjoint() * omega; }
    ComplexMatrix physical_hamiltonian() const { return omega * hamiltonian * omega_inverse; }
};

Frame evaluate_frame(const TimeDependentScenario& sc, double t);

/// H_gen(t) = H(t) - i Omega^{-1}(t) Omega-dot(t). Throws SingularOmega, EvaluationError.
ComplexMatrix generator(const TimeDependentScenario& sc, double t);

/// max |Theta H_gen - H_gen^dagger Theta|: nonzero when Omega-dot != 0, i.e.
/// the generator is not an observable in the physical space.
double generator_observable_defect(const TimeDependentScenario& sc, double t);

/// Max relative intertwining residual of H(t) against Theta(t) over the grid.
/// Throws CompatibilityViolation when it exceeds sc.compatibility_tol.
double validate_compatibility(const TimeDependentScenario& sc);

struct OperatorTrajectory {
    std::vector<double> times;
    std::vector<ComplexMatrix> values;
};

struct EvolutionTrajectory {
    std::vector<double> times;
    std::vector<ComplexVector> kets;
    std::vector<ComplexVector> ketkets;
    std::vector<double> physical_norms;
    std::vector<double> generator_gaps;             // max |H_gen - H|
    std::optional<std::vector<double>> expectations;  // <<Phi|Lambda|Phi> / <<Phi|Phi>
};

struct OperatorEvolution {
    std::vector<double> times;
    std::vector<ComplexMatrix> right;         // U_R(t)
    std::vector<ComplexMatrix> left_adjoint;  // U_L^dagger(t)
};

/// Textbook-space propagator: i du/dt = h(t) u, u(t0) = I, h = Omega H Omega^{-1}.
/// Throws NonHermitianPushforward when h leaves Hermiticity at a stage time.
OperatorTrajectory evolve_textbook(const TimeDependentScenario& sc);

/// Ket and ketket integrated independently: i d|Phi>/dt = H_gen |Phi> and
/// i d|Phi>>/dt = H_gen^dagger |Phi>>, starting from psi0 and Theta(t0) psi0.
EvolutionTrajectory evolve_doublet(const TimeDependentScenario& sc);

/// i dU_R/dt = (H - i Omega^{-1} Omega-dot) U_R and
/// i dU_L^dagger/dt = (H^dagger + i Omega-dot^dagger Omega^{-dagger}) U_L^dagger, both from I.
OperatorEvolution evolve_operators(const TimeDependentScenario& sc);

/// Pointwise cross-checks between the three routes to |Phi(t)>.
struct ConsistencyReport {
    std::vector<double> times;
    std::vector<double> doublet_vs_right;     // |ket - U_R psi0|
    std::vector<double> doublet_vs_textbook;  // |ket - Omega^{-1} u Omega(t0) psi0|
    std::vector<double> right_vs_textbook;    // |U_R psi0 - Omega^{-1} u Omega(t0) psi0|
    std::vector<double> ketket_link;          // |Theta ket - ketket|
    std::vector<double> metric_link;          // max |Theta U_R - U_L^dagger Theta(t0)|
    std::vector<double> unitarity;            // max |u^dagger u - I|

    double max_triangle() const;
};

ConsistencyReport consistency_report(const TimeDependentScenario& sc, const EvolutionTrajectory& doublet,
                                     const OperatorEvolution& ops, const OperatorTrajectory& textbook);

struct QuasistationarityResult {
    bool exists = false;
    int common_family_dim = 0;
    std::optional<MetricCandidate> witness;
};

/// Intersects the metric families of H(t_k) over the sample times and looks
/// for a positive-definite member on a coarse coefficient grid. The search is
/// heuristic: exists = false means no certificate was found. An empty
/// sample list selects 5 equispaced times across the horizon.
QuasistationarityResult quasistationarity_check(const TimeDependentScenario& sc,
                                                std::vector<double> sample_times = {});

}  // namespace qhm
