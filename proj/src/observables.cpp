#include "qhm/observables.hpp"

#include <cmath>

#include "linear_space.hpp"

namespace qhm {

ObservableFamily solve_compatibility(const MetricCandidate& theta, double tol) {
    require_square(theta.theta, "metric");
    if (!theta.positive_definite) throw Error(ErrorCode::NotPositiveDefinite, "metric is not positive definite");
    if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "nullspace tolerance must be positive");
    const ComplexMatrix th = theta.theta;
    const detail::LinearMap relation = [th](const ComplexMatrix& lambda) -> ComplexMatrix {
        return th * lambda - lambda.adjoint() * th;
    };
    ObservableFamily family;
    family.basis = detail::real_nullspace(detail::complex_basis(static_cast<int>(th.rows())), {relation}, tol);
    return family;
}

double compatibility_residual(const ComplexMatrix& theta, const ComplexMatrix& lambda) {
    return max_abs(theta * lambda - lambda.adjoint() * theta);
}

ComplexMatrix am_observable(const AMObservableParams& params) {
    const Complex phase = std::polar(1.0, params.beta);
    ComplexMatrix m(2, 2);
    m << params.a, params.p * phase,
         params.q * std::conj(phase), params.d;
    return m;
}

std::array<Complex, 2> am_observable_eigenvalues(const AMObservableParams& params) {
    const double mean = 0.5 * (params.a + params.d);
    const double half = 0.5 * (params.a - params.d);
    const Complex root = std::sqrt(Complex(half * half + params.p * params.q, 0.0));
    return {mean - root, mean + root};
}

bool am_observable_has_real_spectrum(const AMObservableParams& params) {
    const double half = 0.5 * (params.a - params.d);
    return half * half + params.p * params.q >= 0.0;
}

double am_constraint_residual(const AMObservableParams& params, double r, double Z) {
    if (r == 0.0) throw Error(ErrorCode::DomainError, "model parameter r must be nonzero");
    return std::abs(params.p - params.q * r * r - (params.a - params.d) * r * std::cos(Z));
}

double reconstruct_Z(const AMObservableParams& params, double r) {
    if (r == 0.0) throw Error(ErrorCode::DomainError, "model parameter r must be nonzero");
    const double spread = params.a - params.d;
    if (spread == 0.0) throw Error(ErrorCode::DegenerateObservable, "a = d leaves Z undetermined");
    const double arg = (params.p - params.q * r * r) / (spread * r);
    if (!(arg >= -1.0 && arg <= 1.0)) {
        throw Error(ErrorCode::OutOfRange, "arccos argument " + std::to_string(arg) +
                                               " outside [-1, 1]: no compatible Theta_Z exists");
    }
    return std::acos(arg);
}

ComplexMatrix am_observable_complement(double r, double beta, double Z) {
    const Complex phase = std::polar(1.0, beta);
    const double c = r * std::cos(Z);
    ComplexMatrix m(2, 2);
    m << Complex(0, -c), Complex(0, -r * r) * phase, Complex(0, 1) * std::conj(phase), Complex(0, c);
    return m;
}

AMObservableFit fit_am_observable(const ComplexMatrix& lambda, double beta) {
    if (lambda.rows() != 2 || lambda.cols() != 2) throw Error(ErrorCode::DimensionMismatch, "expected a 2x2 matrix");
    const Complex phase = std::polar(1.0, beta);
    AMObservableFit fit;
    fit.params.a = lambda(0, 0).real();
    fit.params.d = lambda(1, 1).real();
    fit.params.p = (lambda(0, 1) * std::conj(phase)).real();
    fit.params.q = (lambda(1, 0) * phase).real();
    fit.params.beta = beta;
    fit.residual = max_abs(lambda - am_observable(fit.params));
    return fit;
}

}  // namespace qhm
