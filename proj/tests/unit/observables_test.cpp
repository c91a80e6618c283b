#include <gtest/gtest.h>

#include <random>

#include "../support.hpp"
#include "qhm/factor.hpp"
#include "qhm/model.hpp"
#include "qhm/observables.hpp"

using namespace qhm;
using qhm::testing::kPi;
using qhm::testing::max_abs_diff;

namespace {

MetricCandidate random_positive(std::mt19937& rng, int n) {
    std::normal_distribution<double> g;
    ComplexMatrix A(n, n);
    for (int k = 0; k < n * n; ++k) A(k / n, k % n) = Complex(g(rng), g(rng));
    return positivity_certificate(A.adjoint() * A + 0.1 * ComplexMatrix::Identity(n, n));
}

}  // namespace

TEST(Observables, IdentityMetricGivesHermitianMatrices) {
    const ObservableFamily fam = solve_compatibility(positivity_certificate(ComplexMatrix::Identity(2, 2)));
    EXPECT_EQ(fam.dim(), 4);
    for (const auto& L : fam.basis) EXPECT_LT(hermiticity_defect(L), 1e-12);
}

TEST(Observables, RandomMetricsGiveDimensionNSquared) {
    std::mt19937 rng(3);
    for (int n : {2, 3}) {
        for (int trial = 0; trial < 5; ++trial) {
            const MetricCandidate theta = random_positive(rng, n);
            const ObservableFamily fam = solve_compatibility(theta);
            EXPECT_EQ(fam.dim(), n * n);
            const MappingFactorization fac = cholesky_factor(theta);
            for (const auto& L : fam.basis) {
                EXPECT_LT(compatibility_residual(theta.theta, L), 1e-10);
                EXPECT_LT(hermiticity_defect(pushforward_hamiltonian(L, fac)), 1e-9);
            }
        }
    }
}

TEST(Observables, AMFamilyMatchesParametrization) {
    for (double r : {0.5, 1.0, 2.0}) {
        for (double beta : {0.0, 0.7, kPi}) {
            for (double Z : {kPi / 6, kPi / 3, 2 * kPi / 3}) {
                const MetricCandidate theta = am_metric({r, beta, Z, 1.0});
                const ObservableFamily fam = solve_compatibility(theta);
                ASSERT_EQ(fam.dim(), 4);
                // Each element is a real-form observable obeying the constraint
                // plus a multiple of the complementary direction.
                OperatorSpan complement;
                const ComplexMatrix perp = am_observable_complement(r, beta, Z);
                complement.basis = {perp / perp.norm()};
                for (const auto& L : fam.basis) {
                    const AMObservableFit fit = fit_am_observable(L, beta);
                    EXPECT_LT(am_constraint_residual(fit.params, r, Z), 1e-10);
                    EXPECT_LT(complement.projection_residual(L - am_observable(fit.params)) * fit.residual, 1e-10);
                }
                EXPECT_LT(fam.projection_residual(perp), 1e-10);
                EXPECT_LT(fam.projection_residual(am_hamiltonian({r, beta})), 1e-10);
            }
        }
    }
}

TEST(Observables, ComplementIsCompatibleWithRealSpectrum) {
    for (double Z : {kPi / 6, kPi / 3, 2 * kPi / 3}) {
        const ComplexMatrix perp = am_observable_complement(1.7, 0.6, Z);
        EXPECT_LT(compatibility_residual(am_metric({1.7, 0.6, Z, 1.0}).theta, perp), 1e-14);
        EXPECT_GT(fit_am_observable(perp, 0.6).residual, 0.1);
        const Eigen::VectorXcd ev = sorted_eigenvalues(perp);
        EXPECT_NEAR(ev(0).real(), -1.7 * std::sin(Z), 1e-14);
        EXPECT_NEAR(ev(1).real(), 1.7 * std::sin(Z), 1e-14);
        EXPECT_LT(std::abs(ev(0).imag()) + std::abs(ev(1).imag()), 1e-14);
    }
}

TEST(Observables, ObservableValues) {
    EXPECT_LT(max_abs_diff(am_observable({2.5, 0, 0, 2.5, 0.3}), 2.5 * ComplexMatrix::Identity(2, 2)), 1e-15);
    ComplexMatrix expected(2, 2);
    expected << 1, 1, 1, 0;
    EXPECT_LT(max_abs_diff(am_observable({1, 1, 1, 0, 0}), expected), 1e-15);
}

TEST(Observables, EigenvaluesMatchCharacteristicPolynomial) {
    for (const AMObservableParams& p : {AMObservableParams{1, 1, 1, 0, 0}, AMObservableParams{2, 0.5, -0.3, -1, 0.4},
                                        AMObservableParams{0, 1, -1, 0, 0.1}}) {
        const auto ev = am_observable_eigenvalues(p);
        const ComplexMatrix L = am_observable(p);
        for (const Complex& lambda : ev) {
            EXPECT_LT(std::abs((L - lambda * ComplexMatrix::Identity(2, 2)).determinant()), 1e-12);
        }
        const double disc = (p.a - p.d) * (p.a - p.d) / 4 + p.p * p.q;
        EXPECT_EQ(am_observable_has_real_spectrum(p), disc >= 0);
        EXPECT_EQ(std::abs(ev[0].imag()) < 1e-15, disc >= 0);
    }
}

TEST(Observables, ConstraintResidual) {
    EXPECT_NEAR(am_constraint_residual({0.3, 1.7, 1.7, -2.0, 0}, 1.0, kPi / 2), 0.0, 1e-15);
    EXPECT_NEAR(am_constraint_residual({2, 1, 0, 0, 0}, 1.0, kPi / 3), 0.0, 1e-15);
    EXPECT_NEAR(am_constraint_residual({1.2, 5, 0, 1.2, 0}, 0.7, 1.1), 5.0, 1e-15);
}

TEST(Observables, ReconstructZ) {
    EXPECT_NEAR(reconstruct_Z({2, 1, 0, 0, 0}, 1.0), kPi / 3, 1e-15);
    EXPECT_NEAR(reconstruct_Z({1, 0, 0, 0, 0}, 1.0), kPi / 2, 1e-15);
    auto code_of = [](const AMObservableParams& p, double r) {
        try {
            reconstruct_Z(p, r);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Ok;
    };
    EXPECT_EQ(code_of({1, 5, 0, 0, 0}, 1.0), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of({1, 5, 0, 1, 0}, 1.0), ErrorCode::DegenerateObservable);
    EXPECT_EQ(code_of({1, 5, 0, 0, 0}, 0.0), ErrorCode::DomainError);
}

TEST(Observables, ReconstructZRoundTrip) {
    for (double r : {0.5, 1.0, 2.0}) {
        for (double Z = 0.05; Z < kPi; Z += 0.1) {
            AMObservableParams p{1.5, 0.0, 0.4, -0.5, 0.2};
            p.p = p.q * r * r + (p.a - p.d) * r * std::cos(Z);
            const double back = reconstruct_Z(p, r);
            EXPECT_NEAR(back, Z, 1e-10);
            EXPECT_LT(am_constraint_residual(p, r, back), 1e-12);
            EXPECT_LT(compatibility_residual(am_metric({r, p.beta, Z, 1.0}).theta, am_observable(p)), 1e-12);
        }
    }
}
