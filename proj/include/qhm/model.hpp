#pragma once

#include <string>
#include <vector>

#include "qhm/expression.hpp"
#include "qhm/types.hpp"

namespace qhm {

/// Parameters of the two-level model H = [[0, r e^{i beta}], [e^{-i beta}/r, 0]]
/// and its metric family f * Theta_Z.
struct AMModelParams {
    double r = 1.0;
    double beta = 0.0;
    double Z = 0.0;
    double f = 1.0;
};

/// |sin Z| below this is treated as the singular boundary of the metric family.
inline constexpr double kSingularSine = 1e-12;

ComplexMatrix am_hamiltonian(const AMModelParams& p);

/// f * [[1, r e^{i beta} cos Z], [r e^{-i beta} cos Z, r^2]] with its certificate.
/// Throws NotPositiveDefinite when sin Z = 0, DomainError when r = 0 or f <= 0.
MetricCandidate am_metric(const AMModelParams& p);

/// [[cos Z, e^{i beta} sin Z], [e^{-i beta} sin Z, -cos Z]]; independent of r and f.
ComplexMatrix am_physical_hamiltonian(const AMModelParams& p);

/// Closed-form triangular Omega_Z (scaled by sqrt f) and its closed-form inverse.
MappingFactorization am_mapping(const AMModelParams& p);

/// Square matrix of scalar expressions in t and named parameters.
class TimeDependentOperator {
public:
    TimeDependentOperator() = default;
    TimeDependentOperator(int dim, std::vector<Expression> entries);  // row-major

    static TimeDependentOperator parse(int dim, const std::vector<std::string>& entries);
    static TimeDependentOperator constant(const ComplexMatrix& m);

    int dim() const noexcept { return dim_; }
    const Expression& entry(int row, int col) const { return entries_[row * dim_ + col]; }

    ComplexMatrix evaluate(double t, const ParameterMap& params) const;
    TimeDependentOperator derivative() const;
    bool depends_on_time() const;
    std::set<std::string> parameters() const;

private:
    int dim_ = 0;
    std::vector<Expression> entries_;
};

/// Entry-wise evaluation; EvaluationError if any entry is not finite.
ComplexMatrix evaluate(const TimeDependentOperator& op, double t, const ParameterMap& params);

// Expression-valued versions of the two-level model, used when r, beta and Z
// are functions of time. Their derivatives are exact.
TimeDependentOperator am_hamiltonian_operator(const Expression& r, const Expression& beta);
TimeDependentOperator am_omega_operator(const Expression& r, const Expression& beta, const Expression& Z);

}  // namespace qhm
