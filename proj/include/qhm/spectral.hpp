#pragma once

#include <vector>

#include "qhm/types.hpp"

namespace qhm {

/// Right eigenvectors |n> of H paired with ketkets |n>> (eigenvectors of
/// H^dagger) so that <<m|n> = delta_mn. Energies ascend; each right ket has
/// unit norm and its first nonzero component real positive.
struct BiorthogonalSystem {
    std::vector<double> energies;
    std::vector<ComplexVector> right_kets;
    std::vector<ComplexVector> ketkets;

    int dim() const noexcept { return static_cast<int>(energies.size()); }
};

/// Nonzero complex weights of the single-series Omega = sum_n |n} mu_n <<n|.
struct MuParameters {
    std::vector<Complex> mu;
};

inline constexpr double kDefaultRealityTol = 1e-8;
inline constexpr double kDefaultGapTol = 1e-8;

/// Throws ComplexSpectrum, DegenerateSpectrum (gap below gap_tol * spectral
/// diameter) or DefectiveMatrix.
BiorthogonalSystem biorthogonal_decompose(const ComplexMatrix& H, double reality_tol = kDefaultRealityTol,
                                          double gap_tol = kDefaultGapTol);

/// Theta = sum_n |mu_n|^2 |n>> <<n|.
MetricCandidate metric_from_mu(const BiorthogonalSystem& sys, const MuParameters& mu);

/// Omega with rows mu_n <<n| (target basis is the standard basis) and
/// Omega^{-1} with columns |n> / mu_n.
MappingFactorization omega_from_mu(const BiorthogonalSystem& sys, const MuParameters& mu);

/// max |H - sum_n |n> E_n <n| Theta / <n|Theta|n>|, the metric-dependent
/// resolution of H in the friendly space.
double spectral_resolution_check(const ComplexMatrix& H, const BiorthogonalSystem& sys, const ComplexMatrix& theta);

/// max |<<m|n> - delta_mn|.
double biorthogonality_residual(const BiorthogonalSystem& sys);

/// Expansion coefficients <<n|psi>.
ComplexVector spectral_coefficients(const BiorthogonalSystem& sys, const ComplexVector& psi);

}  // namespace qhm
