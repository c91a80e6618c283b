#include "qhm/factor.hpp"

#include <cmath>
#include <limits>

namespace qhm {

namespace {

void require_positive(const MetricCandidate& theta) {
    if (!theta.positive_definite) {
        throw Error(ErrorCode::NotPositiveDefinite,
                    "metric is not positive definite (min eigenvalue " + std::to_string(theta.min_eigenvalue) + ")");
    }
}

void require_compatible(const ComplexMatrix& m, const MappingFactorization& fac, const char* what) {
    if (m.rows() != fac.omega.rows() || m.cols() != fac.omega.cols()) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " does not match the dimension of Omega");
    }
}

}  // namespace

MappingFactorization cholesky_factor(const MetricCandidate& theta) {
    require_positive(theta);
    Eigen::LLT<ComplexMatrix> llt(theta.theta);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
    const ComplexMatrix lower = llt.matrixL();
    const auto n = lower.rows();

    MappingFactorization f;
    f.kind = FactorizationKind::Triangular;
    f.omega = lower.adjoint();
    f.omega_inverse = f.omega.triangularView<Eigen::Upper>().solve(ComplexMatrix::Identity(n, n));
    return f;
}

MappingFactorization hermitian_root_factor(const MetricCandidate& theta) {
    require_positive(theta);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(theta.theta);
    const RealVector& ev = solver.eigenvalues();
    if (ev(0) <= 0.0) throw Error(ErrorCode::NotPositiveDefinite, "metric has a non-positive eigenvalue");
    const ComplexMatrix& v = solver.eigenvectors();

    MappingFactorization f;
    f.kind = FactorizationKind::HermitianRoot;
    f.omega = v * ev.cwiseSqrt().cast<Complex>().asDiagonal() * v.adjoint();
    f.omega_inverse = v * ev.cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() * v.adjoint();
    return f;
}

double condition_number(const ComplexMatrix& m) {
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    const RealVector& s = svd.singularValues();
    if (s.size() == 0) return std::numeric_limits<double>::infinity();
    const double smallest = s(s.size() - 1);
    return smallest > 0.0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
}

MappingFactorization factor_from_omega(const ComplexMatrix& omega, double max_condition) {
    require_square(omega, "Omega");
    if (!all_finite(omega)) throw Error(ErrorCode::SingularOmega, "Omega has non-finite entries");
    const double cond = condition_number(omega);
    if (!(cond <= max_condition)) {
        throw Error(ErrorCode::SingularOmega, "Omega is numerically singular (condition number " +
                                                  std::to_string(cond) + ")");
    }
    MappingFactorization f;
    f.kind = FactorizationKind::General;
    f.omega = omega;
    f.omega_inverse = omega.partialPivLu().inverse();
    return f;
}

ComplexMatrix pullback_hamiltonian(const ComplexMatrix& h_physical, const MappingFactorization& fac) {
    require_compatible(h_physical, fac, "operator");
    return fac.omega_inverse * h_physical * fac.omega;
}

ComplexMatrix pushforward_hamiltonian(const ComplexMatrix& H, const MappingFactorization& fac) {
    require_compatible(H, fac, "operator");
    return fac.omega * H * fac.omega_inverse;
}

ComplexVector map_ket(const ComplexVector& psi, const MappingFactorization& fac) {
    if (psi.size() != fac.omega.cols()) throw Error(ErrorCode::DimensionMismatch, "ket dimension mismatch");
    return fac.omega * psi;
}

ComplexVector unmap_ket(const ComplexVector& phi, const MappingFactorization& fac) {
    if (phi.size() != fac.omega_inverse.cols()) throw Error(ErrorCode::DimensionMismatch, "ket dimension mismatch");
    return fac.omega_inverse * phi;
}

ComplexMatrix metric_of(const MappingFactorization& fac) { return fac.omega.adjoint() * fac.omega; }

}  // namespace qhm
