#include "qhm/metric.hpp"

#include <cmath>
#include <limits>

#include "linear_space.hpp"

namespace qhm {

ComplexMatrix OperatorSpan::combine(const std::vector<double>& coeffs) const {
    if (coeffs.size() != basis.size()) {
        throw Error(ErrorCode::DimensionMismatch, "coefficient count " + std::to_string(coeffs.size()) +
                                                      " does not match family dimension " +
                                                      std::to_string(basis.size()));
    }
    if (basis.empty()) throw Error(ErrorCode::DimensionMismatch, "cannot combine an empty family");
    ComplexMatrix m = ComplexMatrix::Zero(basis[0].rows(), basis[0].cols());
    for (std::size_t k = 0; k < basis.size(); ++k) m += coeffs[k] * basis[k];
    return m;
}

ComplexMatrix OperatorSpan::project(const ComplexMatrix& m) const {
    ComplexMatrix p = ComplexMatrix::Zero(m.rows(), m.cols());
    for (const auto& b : basis) p += frobenius_inner(b, m) * b;
    return p;
}

double OperatorSpan::projection_residual(const ComplexMatrix& m) const {
    const double norm = m.norm();
    if (norm == 0.0) return 0.0;
    if (basis.empty()) return 1.0;
    return (m - project(m)).norm() / norm;
}

double span_distance(const OperatorSpan& a, const OperatorSpan& b) {
    if (a.dim() != b.dim()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const auto& m : a.basis) worst = std::max(worst, b.projection_residual(m));
    for (const auto& m : b.basis) worst = std::max(worst, a.projection_residual(m));
    return worst;
}

MetricFamily solve_intertwining(const ComplexMatrix& H, double tol) {
    return solve_common_intertwining({H}, tol);
}

MetricFamily solve_common_intertwining(const std::vector<ComplexMatrix>& hamiltonians, double tol) {
    if (hamiltonians.empty()) throw Error(ErrorCode::DimensionMismatch, "no Hamiltonians given");
    if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "nullspace tolerance must be positive");
    const auto n = hamiltonians.front().rows();
    std::vector<detail::LinearMap> maps;
    for (const auto& h : hamiltonians) {
        require_square(h, "Hamiltonian");
        if (h.rows() != n) throw Error(ErrorCode::DimensionMismatch, "Hamiltonians differ in dimension");
        maps.emplace_back([h](const ComplexMatrix& theta) -> ComplexMatrix {
            return h.adjoint() * theta - theta * h;
        });
    }
    MetricFamily family;
    family.basis = detail::real_nullspace(detail::hermitian_basis(static_cast<int>(n)), maps, tol);
    return family;
}

MetricCandidate positivity_certificate(const ComplexMatrix& theta, double hermitian_tol) {
    require_square(theta, "metric");
    if (!all_finite(theta)) throw Error(ErrorCode::DomainError, "metric has non-finite entries");
    const double defect = hermiticity_defect(theta);
    if (defect > hermitian_tol * std::max(1.0, max_abs(theta))) {
        throw Error(ErrorCode::NotHermitian, "metric is not Hermitian (defect " + std::to_string(defect) + ")");
    }
    MetricCandidate c;
    c.theta = 0.5 * (theta + theta.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(c.theta, Eigen::EigenvaluesOnly);
    c.eigenvalues = solver.eigenvalues();
    c.min_eigenvalue = c.eigenvalues(0);
    const double top = c.eigenvalues.cwiseAbs().maxCoeff();
    c.positive_definite = top > 0.0 && c.min_eigenvalue > kPositivityFloor * top;
    c.condition_number = c.positive_definite ? c.eigenvalues(c.eigenvalues.size() - 1) / c.min_eigenvalue
                                             : std::numeric_limits<double>::infinity();
    c.provenance = MetricProvenance::Nullspace;
    return c;
}

MetricCandidate select_positive(const MetricFamily& family, const std::vector<double>& coeffs) {
    MetricCandidate c = positivity_certificate(family.combine(coeffs));
    if (!c.positive_definite) {
        throw Error(ErrorCode::NotPositiveDefinite,
                    "combination is not positive definite (min eigenvalue " + std::to_string(c.min_eigenvalue) + ")");
    }
    c.provenance = MetricProvenance::Nullspace;
    return c;
}

double intertwining_residual(const ComplexMatrix& H, const ComplexMatrix& theta) {
    return max_abs(H.adjoint() * theta - theta * H);
}

}  // namespace qhm
