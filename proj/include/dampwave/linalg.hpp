#pragma once

#include <functional>
#include <vector>

#include "dampwave/types.hpp"

// Thin wrappers over LAPACK for the dense kernels the spectral code needs.
namespace dampwave::linalg {

struct EigenSystem {
  CVector values;
  CMatrix right; ///< columns: G v = lambda v
  CMatrix left;  ///< columns: u^H G = lambda u^H
  bool converged = true;
};

/// All eigenvalues of a general complex matrix, optionally with left and right
/// eigenvectors (zgeev). Non-convergence is reported, not thrown.
EigenSystem eig(const CMatrix& G, bool vectors);

/// Singular values in descending order (zgesdd, values only).
RVector singular_values(const CMatrix& M);
double smallest_singular_value(const CMatrix& M);

/// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues (zheevd).
struct HermitianEigen {
  RVector values;
  CMatrix vectors;
};
HermitianEigen hermitian_eig(const CMatrix& H, bool vectors);

/// Eigenvalues of the real symmetric tridiagonal matrix (diag d, off-diagonal e).
RVector tridiagonal_eigenvalues(const RVector& d, const RVector& e);

/// Orthonormal basis of the invariant subspace of G belonging to the selected
/// eigenvalues, from a reordered Schur form (zgees with sorting).
CMatrix invariant_subspace(const CMatrix& G, const std::function<bool(cplx)>& select);

/// Matrix exponential by scaling and squaring with the degree-13 Pade approximant.
CMatrix expm(const CMatrix& M);

/// Index sets of the connected components of the coupling graph of the given
/// square matrices (i ~ j when any of them has a nonzero (i,j) or (j,i) entry).
std::vector<std::vector<int>> coupling_blocks(const std::vector<const CMatrix*>& matrices);

/// 2-norm of U * M * V^H for tall U (n x r), V (m x r) and small M (r x r).
double low_rank_norm(const CMatrix& U, const CMatrix& M, const CMatrix& V);

} // namespace dampwave::linalg
