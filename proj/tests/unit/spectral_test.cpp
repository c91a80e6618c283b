#include <gtest/gtest.h>

#include "../support.hpp"
#include "qhm/factor.hpp"
#include "qhm/metric.hpp"
#include "qhm/model.hpp"
#include "qhm/spectral.hpp"

using namespace qhm;
using qhm::testing::kPi;
using qhm::testing::max_abs_diff;

namespace {

ComplexMatrix hermitian3() {
    ComplexMatrix H(3, 3);
    H << 1.0, Complex(0.2, 0.1), 0.3, Complex(0.2, -0.1), 2.0, Complex(0, 0.4), 0.3, Complex(0, -0.4), -1.0;
    return H;
}

}  // namespace

TEST(Spectral, AMEnergies) {
    const BiorthogonalSystem sys = biorthogonal_decompose(am_hamiltonian({2.0, 0.4}));
    ASSERT_EQ(sys.dim(), 2);
    EXPECT_NEAR(sys.energies[0], -1.0, 1e-12);
    EXPECT_NEAR(sys.energies[1], 1.0, 1e-12);
    EXPECT_LT(biorthogonality_residual(sys), 1e-10);
    for (const auto& k : sys.right_kets) EXPECT_NEAR(k.norm(), 1.0, 1e-14);
}

TEST(Spectral, HermitianKetketsAreRightKets) {
    const BiorthogonalSystem sys = biorthogonal_decompose(hermitian3());
    for (int n = 0; n < sys.dim(); ++n) {
        EXPECT_LT((sys.ketkets[n] - sys.right_kets[n]).norm(), 1e-12);
    }
    EXPECT_LT(biorthogonality_residual(sys), 1e-12);
    EXPECT_TRUE(std::is_sorted(sys.energies.begin(), sys.energies.end()));
}

TEST(Spectral, Errors) {
    ComplexMatrix H = ComplexMatrix::Zero(2, 2);
    H(0, 0) = Complex(1.0, 0.1);
    H(1, 1) = 2.0;
    try {
        biorthogonal_decompose(H, 1e-8);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ComplexSpectrum);
    }
    try {
        biorthogonal_decompose(ComplexMatrix::Identity(2, 2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateSpectrum);
    }
}

TEST(Spectral, MetricFromMu) {
    const BiorthogonalSystem herm = biorthogonal_decompose(hermitian3());
    EXPECT_LT(max_abs_diff(metric_from_mu(herm, {{1.0, 1.0, 1.0}}).theta, ComplexMatrix::Identity(3, 3)), 1e-12);

    const ComplexMatrix H = am_hamiltonian({2.0, 0.4});
    const BiorthogonalSystem sys = biorthogonal_decompose(H);
    const MetricCandidate theta = metric_from_mu(sys, {{Complex(0.7, 0.2), 1.3}});
    EXPECT_TRUE(theta.positive_definite);
    EXPECT_LT(intertwining_residual(H, theta.theta), 1e-10);

    const Complex c(0.5, -1.5);
    const MetricCandidate scaled = metric_from_mu(sys, {{c * Complex(0.7, 0.2), c * 1.3}});
    EXPECT_LT(max_abs_diff(scaled.theta, std::norm(c) * theta.theta), 1e-12);

    EXPECT_THROW(metric_from_mu(sys, {{1.0}}), Error);
    EXPECT_THROW(metric_from_mu(sys, {{1.0, 0.0}}), Error);
}

TEST(Spectral, MuSeriesSpansIntertwiningFamily) {
    for (double r : {0.5, 1.0, 2.0}) {
        const ComplexMatrix H = am_hamiltonian({r, 0.7});
        const BiorthogonalSystem sys = biorthogonal_decompose(H);
        OperatorSpan mu_span;
        // Span over |mu_n|^2: the two rank-one projectors |n>><<n|.
        ComplexMatrix p0 = sys.ketkets[0] * sys.ketkets[0].adjoint();
        ComplexMatrix p1 = sys.ketkets[1] * sys.ketkets[1].adjoint();
        p0 /= p0.norm();
        p1 -= frobenius_inner(p0, p1) * p0;
        p1 /= p1.norm();
        mu_span.basis = {p0, p1};
        EXPECT_LT(span_distance(mu_span, solve_intertwining(H)), 1e-8);
    }
}

TEST(Spectral, OmegaFromMu) {
    const BiorthogonalSystem herm = biorthogonal_decompose(hermitian3());
    const MappingFactorization u = omega_from_mu(herm, {{1.0, 1.0, 1.0}});
    EXPECT_LT(max_abs(u.omega.adjoint() * u.omega - ComplexMatrix::Identity(3, 3)), 1e-12);

    const ComplexMatrix H = am_hamiltonian({2.0, 0.4});
    const BiorthogonalSystem sys = biorthogonal_decompose(H);
    const MappingFactorization fac = omega_from_mu(sys, {{Complex(0.7, 0.2), 1.3}});
    EXPECT_LT(max_abs_diff(fac.omega * fac.omega_inverse, ComplexMatrix::Identity(2, 2)), 1e-11);
    const ComplexMatrix h = pushforward_hamiltonian(H, fac);
    EXPECT_LT(std::max(std::abs(h(0, 1)), std::abs(h(1, 0))), 1e-10);
    EXPECT_NEAR(h(0, 0).real(), -1.0, 1e-10);
    EXPECT_NEAR(h(1, 1).real(), 1.0, 1e-10);
    EXPECT_LT(max_abs_diff(metric_of(fac), metric_from_mu(sys, {{Complex(0.7, 0.2), 1.3}}).theta), 1e-12);
}

TEST(Spectral, SpectralResolution) {
    const ComplexMatrix H = am_hamiltonian({2.0, 0.4});
    BiorthogonalSystem sys = biorthogonal_decompose(H);
    const ComplexMatrix theta = metric_from_mu(sys, {{0.8, 1.1}}).theta;
    EXPECT_LT(spectral_resolution_check(H, sys, theta), 1e-10);
    EXPECT_LT(spectral_resolution_check(H, sys, am_metric({2.0, 0.4, kPi / 3, 1.0}).theta), 1e-10);

    const ComplexMatrix Hh = hermitian3();
    EXPECT_LT(spectral_resolution_check(Hh, biorthogonal_decompose(Hh), ComplexMatrix::Identity(3, 3)), 1e-12);

    sys.energies[0] += 0.1;
    const ComplexVector& n0 = sys.right_kets[0];
    const ComplexMatrix projector = n0 * (theta * n0).adjoint() / (n0.dot(theta * n0)).real();
    EXPECT_GE(spectral_resolution_check(H, sys, theta), 0.1 * max_abs(projector) * (1 - 1e-12));
}

TEST(Spectral, TwoStepMappingMatchesDirectCoefficients) {
    const ComplexMatrix H = am_hamiltonian({0.5, 2.0});
    const BiorthogonalSystem sys = biorthogonal_decompose(H);
    const MuParameters mu{{Complex(1.5, -0.5), Complex(0.2, 0.9)}};
    const MappingFactorization fac = omega_from_mu(sys, mu);
    ComplexVector psi(2);
    psi << Complex(0.3, -1.0), Complex(2.0, 0.5);
    const ComplexVector textbook = map_ket(psi, fac);
    const ComplexVector direct = spectral_coefficients(sys, psi);
    for (int n = 0; n < 2; ++n) EXPECT_LT(std::abs(textbook(n) / mu.mu[n] - direct(n)), 1e-10);
}
