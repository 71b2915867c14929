#pragma once

#include <cstdint>

#include "subthz/types.hpp"

// Dense complex linear-algebra kernels shared by the channel, dictionary and
// estimator code. Thin layer over Eigen with the contracts the rest of the
// toolkit relies on (rank-aware solves, deterministic results).
namespace subthz {

bool all_finite(const CMat& a);

// Kronecker product a (m x n) with b (p x q) -> (mp x nq).
// Guarded against accidental huge allocations (> kron_max_elems entries).
CMat kron(const CMat& a, const CMat& b, std::int64_t max_elems = std::int64_t{1} << 28);

// Column stacking; vec(a) has a.rows()*a.cols() entries.
CVec vec(const CMat& a);

// Inverse of vec(): v.size() must equal rows*cols.
CMat unvec(const CVec& v, Eigen::Index rows, Eigen::Index cols);

struct LeastSquaresInfo {
  Eigen::Index rank = 0;
  bool rank_deficient = false;
};

// Minimum-norm least-squares solution of a x = y via a rank-revealing
// orthogonal decomposition. Relative pivot cutoff max(m,n)*eps; rank
// diagnostics are reported, never silently inflated.
CVec least_squares(const CMat& a, const CVec& y, LeastSquaresInfo* info = nullptr);

// Multiple right-hand sides, same contract as above.
CMat least_squares(const CMat& a, const CMat& y, LeastSquaresInfo* info = nullptr);

// Largest singular value, deterministic power iteration on a^H a.
double spectral_norm(const CMat& a, double rel_tol = 1e-10, int max_iter = 2000);

struct EigHermitianResult {
  RVec values;   // descending
  CMat vectors;  // columns matching values
};

// Eigendecomposition of a Hermitian matrix. Rejects inputs whose Hermitian
// asymmetry exceeds herm_tol * max(1, max |a_ij|).
EigHermitianResult eig_hermitian(const CMat& a, double herm_tol = 1e-9);

}  // namespace subthz
