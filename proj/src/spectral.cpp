#include "qhm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qhm/metric.hpp"

namespace qhm {

namespace {

// Eigenvector matrices with sigma_min / sigma_max below this are treated as defective.
constexpr double kDefectiveTol = 1e-10;

void fix_phase(ComplexVector& v) {
    const double scale = v.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v(k)) > 1e-12 * scale) {
            v *= std::conj(v(k)) / std::abs(v(k));
            v(k) = std::abs(v(k));
            return;
        }
    }
}

void require_lengths(const BiorthogonalSystem& sys, const MuParameters& mu) {
    if (mu.mu.size() != sys.energies.size()) {
        throw Error(ErrorCode::DimensionMismatch, "mu count does not match the number of eigenstates");
    }
    for (const Complex& m : mu.mu) {
        if (std::abs(m) == 0.0 || !std::isfinite(std::abs(m))) {
            throw Error(ErrorCode::DomainError, "mu parameters must be finite and nonzero");
        }
    }
}

}  // namespace

BiorthogonalSystem biorthogonal_decompose(const ComplexMatrix& H, double reality_tol, double gap_tol) {
    require_square(H, "Hamiltonian");
    const auto n = H.rows();
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(H);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::DefectiveMatrix, "eigen-decomposition failed");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const auto& ev = solver.eigenvalues();
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return ev(a).real() < ev(b).real(); });

    for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(ev(k).imag()) > reality_tol) {
            throw Error(ErrorCode::ComplexSpectrum, "eigenvalue " + std::to_string(ev(k).real()) + (ev(k).imag() < 0 ? "-" : "+") +
                                                        std::to_string(std::abs(ev(k).imag())) + "i is not real");
        }
    }

    BiorthogonalSystem sys;
    ComplexMatrix right(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        sys.energies.push_back(ev(src).real());
        ComplexVector v = solver.eigenvectors().col(src);
        v.normalize();
        fix_phase(v);
        right.col(k) = v;
    }

    if (n > 1) {
        const double diameter = sys.energies.back() - sys.energies.front();
        for (std::size_t k = 1; k < sys.energies.size(); ++k) {
            if (sys.energies[k] - sys.energies[k - 1] <= gap_tol * diameter) {
                throw Error(ErrorCode::DegenerateSpectrum,
                            "eigenvalues " + std::to_string(sys.energies[k - 1]) + " and " +
                                std::to_string(sys.energies[k]) + " are degenerate");
            }
        }
    }

    Eigen::JacobiSVD<ComplexMatrix> svd(right);
    const RealVector& s = svd.singularValues();
    if (s(n - 1) <= kDefectiveTol * s(0)) {
        throw Error(ErrorCode::DefectiveMatrix, "eigenvector matrix is numerically singular");
    }

    // Rows of R^{-1} are the brabras <<n|.
    const ComplexMatrix left = right.partialPivLu().inverse().adjoint();
    for (Eigen::Index k = 0; k < n; ++k) {
        sys.right_kets.emplace_back(right.col(k));
        sys.ketkets.emplace_back(left.col(k));
    }
    return sys;
}

MetricCandidate metric_from_mu(const BiorthogonalSystem& sys, const MuParameters& mu) {
    require_lengths(sys, mu);
    const auto n = static_cast<Eigen::Index>(sys.dim());
    ComplexMatrix theta = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < sys.ketkets.size(); ++k) {
        theta += std::norm(mu.mu[k]) * sys.ketkets[k] * sys.ketkets[k].adjoint();
    }
    MetricCandidate c = positivity_certificate(theta);
    c.provenance = MetricProvenance::MuSeries;
    return c;
}

MappingFactorization omega_from_mu(const BiorthogonalSystem& sys, const MuParameters& mu) {
    require_lengths(sys, mu);
    const auto n = static_cast<Eigen::Index>(sys.dim());
    MappingFactorization f;
    f.kind = FactorizationKind::MuSeries;
    f.omega.resize(n, n);
    f.omega_inverse.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        f.omega.row(k) = mu.mu[idx] * sys.ketkets[idx].adjoint();
        f.omega_inverse.col(k) = sys.right_kets[idx] / mu.mu[idx];
    }
    return f;
}

double spectral_resolution_check(const ComplexMatrix& H, const BiorthogonalSystem& sys, const ComplexMatrix& theta) {
    const auto n = static_cast<Eigen::Index>(sys.dim());
    if (H.rows() != n || H.cols() != n || theta.rows() != n || theta.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "spectral_resolution_check: inconsistent dimensions");
    }
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < sys.right_kets.size(); ++k) {
        const ComplexVector& ket = sys.right_kets[k];
        const Complex weight = ket.dot(theta * ket);  // <n|Theta|n>
        sum += sys.energies[k] * ket * (ket.adjoint() * theta) / weight;
    }
    return max_abs(H - sum);
}

double biorthogonality_residual(const BiorthogonalSystem& sys) {
    double worst = 0.0;
    for (std::size_t m = 0; m < sys.ketkets.size(); ++m) {
        for (std::size_t n = 0; n < sys.right_kets.size(); ++n) {
            const Complex overlap = sys.ketkets[m].dot(sys.right_kets[n]);
            worst = std::max(worst, std::abs(overlap - (m == n ? 1.0 : 0.0)));
        }
    }
    return worst;
}

ComplexVector spectral_coefficients(const BiorthogonalSystem& sys, const ComplexVector& psi) {
    if (psi.size() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "ket dimension mismatch");
    ComplexVector c(psi.size());
    for (std::size_t k = 0; k < sys.ketkets.size(); ++k) c(static_cast<Eigen::Index>(k)) = sys.ketkets[k].dot(psi);
    return c;
}

}  // namespace qhm
