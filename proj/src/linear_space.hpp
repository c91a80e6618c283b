#pragma once

// Internal: real vectorization of real-linear matrix relations.

#include <functional>
#include <vector>

#include "qhm/types.hpp"

namespace qhm::detail {

using LinearMap = std::function<ComplexMatrix(const ComplexMatrix&)>;

/// Frobenius-orthonormal real basis of the n x n Hermitian matrices, ordered
/// row-major over the upper triangle: diagonal entry, or (real, imaginary)
/// parts of an off-diagonal pair.
std::vector<ComplexMatrix> hermitian_basis(int n);

/// Frobenius-orthonormal real basis of all n x n complex matrices.
std::vector<ComplexMatrix> complex_basis(int n);

/// Orthonormal basis (in the same real inner product) of the subspace of
/// span(params) annihilated by every map. Singular values below
/// tol * sigma_max count as zero.
std::vector<ComplexMatrix> real_nullspace(const std::vector<ComplexMatrix>& params,
                                          const std::vector<LinearMap>& maps, double tol);

}  // namespace qhm::detail
