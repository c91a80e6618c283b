#pragma once

#include <array>

#include "qhm/metric.hpp"
#include "qhm/types.hpp"

namespace qhm {

/// Solutions Lambda of Theta Lambda = Lambda^dagger Theta for a fixed metric.
struct ObservableFamily : OperatorSpan {};

/// Lambda = [[a, p e^{i beta}], [q e^{-i beta}, d]].
struct AMObservableParams {
    double a = 0.0;
    double p = 0.0;
    double q = 0.0;
    double d = 0.0;
    double beta = 0.0;
};

ObservableFamily solve_compatibility(const MetricCandidate& theta, double tol = kDefaultNullspaceTol);

/// max |Theta Lambda - Lambda^dagger Theta|.
double compatibility_residual(const ComplexMatrix& theta, const ComplexMatrix& lambda);

ComplexMatrix am_observable(const AMObservableParams& params);

/// (a + d)/2 -+ sqrt((a - d)^2/4 + pq), ascending; complex pair when the
/// discriminant is negative.
std::array<Complex, 2> am_observable_eigenvalues(const AMObservableParams& params);

/// Real eigenvalues iff (a - d)^2/4 + pq >= 0.
bool am_observable_has_real_spectrum(const AMObservableParams& params);

/// |p - q r^2 - (a - d) r cos Z|; zero iff Lambda is compatible with Theta_Z.
double am_constraint_residual(const AMObservableParams& params, double r, double Z);

/// Z in [0, pi] solving the constraint: arccos((p - q r^2) / ((a - d) r)).
/// Throws DegenerateObservable when a = d, OutOfRange when the argument
/// leaves [-1, 1], DomainError when r = 0.
double reconstruct_Z(const AMObservableParams& params, double r);

/// i [[-r cos Z, -r^2 e^{i beta}], [e^{-i beta}, r cos Z]]: compatible with
/// Theta_Z but outside the real-parameter form above. Together with that
/// three-parameter form it spans the whole four-dimensional solution space.
/// Its eigenvalues are -+ r sin Z.
ComplexMatrix am_observable_complement(double r, double beta, double Z);

/// Reads (a, p, q, d) off a 2x2 matrix assuming the phase beta. `residual` is
/// max |lambda - am_observable(fit)|, nonzero when lambda is outside the form.
struct AMObservableFit {
    AMObservableParams params;
    double residual = 0.0;
};
AMObservableFit fit_am_observable(const ComplexMatrix& lambda, double beta);

}  // namespace qhm
