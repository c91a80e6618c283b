#include <gtest/gtest.h>

#include <random>

#include "../support.hpp"
#include "qhm/factor.hpp"
#include "qhm/metric.hpp"
#include "qhm/model.hpp"

using namespace qhm;
using qhm::testing::kPi;
using qhm::testing::max_abs_diff;

namespace {

ComplexVector random_vector(std::mt19937& rng, int n) {
    std::normal_distribution<double> g;
    ComplexVector v(n);
    for (int k = 0; k < n; ++k) v(k) = Complex(g(rng), g(rng));
    return v;
}

bool is_unitary(const ComplexMatrix& u, double tol) {
    return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())) < tol;
}

}  // namespace

TEST(Factor, IdentityMetric) {
    const MetricCandidate id = positivity_certificate(ComplexMatrix::Identity(2, 2));
    EXPECT_LT(max_abs_diff(cholesky_factor(id).omega, ComplexMatrix::Identity(2, 2)), 1e-15);
    EXPECT_LT(max_abs_diff(hermitian_root_factor(id).omega, ComplexMatrix::Identity(2, 2)), 1e-15);
}

TEST(Factor, DiagonalRoot) {
    ComplexMatrix theta = ComplexMatrix::Zero(2, 2);
    theta(0, 0) = 4.0;
    theta(1, 1) = 9.0;
    ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
    expected(0, 0) = 2.0;
    expected(1, 1) = 3.0;
    EXPECT_LT(max_abs_diff(hermitian_root_factor(positivity_certificate(theta)).omega, expected), 1e-14);
}

TEST(Factor, CholeskyReproducesClosedFormOmega) {
    for (double r : {0.5, 1.0, 2.0}) {
        for (double beta : {0.0, 0.7, kPi}) {
            for (double Z : {kPi / 6, kPi / 4, kPi / 3, 2 * kPi / 3}) {
                const AMModelParams p{r, beta, Z, 1.0};
                const MappingFactorization fac = cholesky_factor(am_metric(p));
                const MappingFactorization closed = am_mapping(p);
                EXPECT_EQ(fac.kind, FactorizationKind::Triangular);
                EXPECT_LT(max_abs_diff(fac.omega, closed.omega), 1e-12);
                EXPECT_LT(max_abs_diff(fac.omega_inverse, closed.omega_inverse), 1e-12);
            }
        }
    }
}

TEST(Factor, HermitianRootReconstructsMetric) {
    const MetricCandidate theta = am_metric({2.0, 0.3, kPi / 4, 1.0});
    const MappingFactorization fac = hermitian_root_factor(theta);
    EXPECT_LT(max_abs_diff(metric_of(fac), theta.theta), 1e-11);
    EXPECT_LT(hermiticity_defect(fac.omega), 1e-12);
    EXPECT_LT(max_abs_diff(fac.omega * fac.omega_inverse, ComplexMatrix::Identity(2, 2)), 1e-12);
}

TEST(Factor, GaugeFreedomBetweenFactorizations) {
    for (double Z : {kPi / 6, kPi / 3, 2 * kPi / 3}) {
        const MetricCandidate theta = am_metric({2.0, 0.3, Z, 1.0});
        const MappingFactorization tri = cholesky_factor(theta);
        const MappingFactorization root = hermitian_root_factor(theta);
        EXPECT_TRUE(is_unitary(root.omega * tri.omega_inverse, 1e-10));
    }
}

TEST(Factor, PullbackAndPushforward) {
    const AMModelParams p{2.0, 0.4, kPi / 3, 1.0};
    const MappingFactorization fac = cholesky_factor(am_metric(p));
    const ComplexMatrix h = am_physical_hamiltonian(p);
    EXPECT_LT(max_abs_diff(pullback_hamiltonian(h, fac), am_hamiltonian(p)), 1e-11);
    EXPECT_LT(max_abs_diff(pushforward_hamiltonian(am_hamiltonian(p), fac), h), 1e-11);
    EXPECT_LT(max_abs_diff(pushforward_hamiltonian(pullback_hamiltonian(h, fac), fac), h), 1e-11);

    const MappingFactorization id = cholesky_factor(positivity_certificate(ComplexMatrix::Identity(2, 2)));
    EXPECT_LT(max_abs_diff(pullback_hamiltonian(h, id), h), 1e-15);
    EXPECT_LT(max_abs_diff(pushforward_hamiltonian(ComplexMatrix::Identity(2, 2), fac), ComplexMatrix::Identity(2, 2)),
              1e-12);
}

TEST(Factor, PushforwardIsHermitianAndIsospectralAcrossKinds) {
    for (double Z : {kPi / 6, kPi / 4, 2 * kPi / 3}) {
        const AMModelParams p{0.5, 0.7, Z, 2.0};
        const MetricCandidate theta = am_metric(p);
        const ComplexMatrix H = am_hamiltonian(p);
        const ComplexMatrix h_tri = pushforward_hamiltonian(H, cholesky_factor(theta));
        const ComplexMatrix h_root = pushforward_hamiltonian(H, hermitian_root_factor(theta));
        EXPECT_LT(hermiticity_defect(h_tri), 1e-10);
        EXPECT_LT(hermiticity_defect(h_root), 1e-10);
        const auto a = sorted_eigenvalues(h_tri), b = sorted_eigenvalues(h_root);
        for (Eigen::Index k = 0; k < a.size(); ++k) EXPECT_LT(std::abs(a(k) - b(k)), 1e-10);
    }
}

TEST(Factor, KetMappingPreservesInnerProduct) {
    std::mt19937 rng(11);
    const MetricCandidate theta = am_metric({2.0, 0.3, kPi / 4, 1.0});
    for (const MappingFactorization& fac : {cholesky_factor(theta), hermitian_root_factor(theta)}) {
        for (int trial = 0; trial < 20; ++trial) {
            const ComplexVector psi = random_vector(rng, 2), phi = random_vector(rng, 2);
            const Complex lhs = map_ket(phi, fac).dot(map_ket(psi, fac));
            const Complex rhs = phi.dot(theta.theta * psi);
            EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(rhs)));
            EXPECT_LT((unmap_ket(map_ket(psi, fac), fac) - psi).cwiseAbs().maxCoeff(), 1e-12 * psi.norm());
        }
    }
    const ComplexVector v = random_vector(rng, 2);
    const MappingFactorization id = cholesky_factor(positivity_certificate(ComplexMatrix::Identity(2, 2)));
    EXPECT_EQ(map_ket(v, id), v);
}

TEST(Factor, Errors) {
    ComplexMatrix m(2, 2);
    m << 1, 2, 2, 1;
    EXPECT_THROW(cholesky_factor(positivity_certificate(m)), Error);
    EXPECT_THROW(hermitian_root_factor(positivity_certificate(m)), Error);
    ComplexMatrix singular(2, 2);
    singular << 1, 1, 1, 1;
    try {
        factor_from_omega(singular);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularOmega);
    }
    EXPECT_NEAR(condition_number(ComplexMatrix::Identity(3, 3)), 1.0, 1e-15);
}
