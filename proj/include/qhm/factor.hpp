#pragma once

#include "qhm/types.hpp"

namespace qhm {

/// Upper-triangular Omega with positive real diagonal and Omega^dagger Omega = Theta.
MappingFactorization cholesky_factor(const MetricCandidate& theta);

/// Omega = Theta^{1/2} through the ascending eigen-decomposition of Theta.
MappingFactorization hermitian_root_factor(const MetricCandidate& theta);

/// Wraps an explicitly given Omega. Throws SingularOmega when its 2-norm
/// condition number exceeds max_condition.
MappingFactorization factor_from_omega(const ComplexMatrix& omega, double max_condition = 1e12);

/// Omega^{-1} h Omega: from the textbook space back to the friendly space.
ComplexMatrix pullback_hamiltonian(const ComplexMatrix& h_physical, const MappingFactorization& fac);

/// Omega H Omega^{-1}: Hermitian whenever H is quasi-Hermitian for Omega^dagger Omega.
ComplexMatrix pushforward_hamiltonian(const ComplexMatrix& H, const MappingFactorization& fac);

/// Omega psi.
ComplexVector map_ket(const ComplexVector& psi, const MappingFactorization& fac);

/// Omega^{-1} phi.
ComplexVector unmap_ket(const ComplexVector& phi, const MappingFactorization& fac);

/// Omega^dagger Omega.
ComplexMatrix metric_of(const MappingFactorization& fac);

/// 2-norm condition number via singular values.
double condition_number(const ComplexMatrix& m);

}  // namespace qhm
