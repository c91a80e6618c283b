#pragma once

#include <vector>

#include "qhm/types.hpp"

namespace qhm {

/// Real-linear span of matrices, stored as a Frobenius-orthonormal basis.
struct OperatorSpan {
    std::vector<ComplexMatrix> basis;

    int dim() const noexcept { return static_cast<int>(basis.size()); }
    bool empty() const noexcept { return basis.empty(); }

    /// Sum of coeffs[k] * basis[k]. Throws DimensionMismatch on a length mismatch.
    ComplexMatrix combine(const std::vector<double>& coeffs) const;

    /// Orthogonal projection of m onto the span (real Frobenius inner product).
    ComplexMatrix project(const ComplexMatrix& m) const;

    /// ||m - project(m)||_F / ||m||_F; zero for the zero matrix.
    double projection_residual(const ComplexMatrix& m) const;
};

/// Largest projection residual of either span's basis onto the other; infinity
/// when the dimensions differ.
double span_distance(const OperatorSpan& a, const OperatorSpan& b);

/// Hermitian solutions of H^dagger Theta = Theta H.
struct MetricFamily : OperatorSpan {};

inline constexpr double kDefaultNullspaceTol = 1e-10;
inline constexpr double kDefaultHermitianTol = 1e-10;

/// Relative eigenvalue floor below which a Hermitian matrix is not counted as
/// positive definite: min eig must exceed kPositivityFloor * max |eig|.
inline constexpr double kPositivityFloor = 1e-13;

/// Basis of {Theta = Theta^dagger : H^dagger Theta = Theta H}. Singular values
/// below tol * (largest singular value) count as zero. Never throws on an empty
/// solution space.
MetricFamily solve_intertwining(const ComplexMatrix& H, double tol = kDefaultNullspaceTol);

/// Common Hermitian solutions for every H in the list (stacked relation).
MetricFamily solve_common_intertwining(const std::vector<ComplexMatrix>& hamiltonians,
                                       double tol = kDefaultNullspaceTol);

/// Eigenvalue certificate of a Hermitian matrix. Throws NotHermitian when
/// max|A - A^dagger| exceeds hermitian_tol * max(1, max|A|).
MetricCandidate positivity_certificate(const ComplexMatrix& theta,
                                       double hermitian_tol = kDefaultHermitianTol);

/// Linear combination of the family, certified; throws NotPositiveDefinite
/// when the combination is not strictly inside the positive cone.
MetricCandidate select_positive(const MetricFamily& family, const std::vector<double>& coeffs);

/// max |H^dagger Theta - Theta H|.
double intertwining_residual(const ComplexMatrix& H, const ComplexMatrix& theta);

}  // namespace qhm
