#include "subthz/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace subthz {

bool all_finite(const CMat& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const cdouble v = a(i, j);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
  return true;
}

CMat kron(const CMat& a, const CMat& b, std::int64_t max_elems) {
  const std::int64_t rows = std::int64_t(a.rows()) * b.rows();
  const std::int64_t cols = std::int64_t(a.cols()) * b.cols();
  if (rows * cols > max_elems)
    throw std::invalid_argument("kron: result would exceed the element budget");
  CMat out(rows, cols);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CVec vec(const CMat& a) {
  return CVec(Eigen::Map<const CVec>(a.data(), a.size()));
}

CMat unvec(const CVec& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw std::invalid_argument("unvec: size mismatch");
  return CMat(Eigen::Map<const CMat>(v.data(), rows, cols));
}

namespace {

Eigen::CompleteOrthogonalDecomposition<CMat> make_cod(const CMat& a) {
  Eigen::CompleteOrthogonalDecomposition<CMat> cod;
  cod.setThreshold(double(std::max(a.rows(), a.cols())) *
                   Eigen::NumTraits<double>::epsilon());
  cod.compute(a);
  return cod;
}

}  // namespace

CVec least_squares(const CMat& a, const CVec& y, LeastSquaresInfo* info) {
  if (a.rows() != y.size())
    throw std::invalid_argument("least_squares: row count mismatch");
  auto cod = make_cod(a);
  if (info) {
    info->rank = cod.rank();
    info->rank_deficient = cod.rank() < std::min(a.rows(), a.cols());
  }
  return cod.solve(y);
}

CMat least_squares(const CMat& a, const CMat& y, LeastSquaresInfo* info) {
  if (a.rows() != y.rows())
    throw std::invalid_argument("least_squares: row count mismatch");
  auto cod = make_cod(a);
  if (info) {
    info->rank = cod.rank();
    info->rank_deficient = cod.rank() < std::min(a.rows(), a.cols());
  }
  return cod.solve(y);
}

double spectral_norm(const CMat& a, double rel_tol, int max_iter) {
  if (a.size() == 0) return 0.0;
  // Power iteration on the Gram operator; deterministic start vector with a
  // mild index-dependent phase so it is never orthogonal to the top space.
  CVec v(a.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = std::polar(1.0, 0.37 * double(i % 97));
  v.normalize();
  double prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    CVec w = a.adjoint() * (a * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double est = std::sqrt(norm);
    if (it > 0 && std::abs(est - prev) <= rel_tol * std::max(est, 1e-300)) return est;
    prev = est;
  }
  return prev;
}

EigHermitianResult eig_hermitian(const CMat& a, double herm_tol) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("eig_hermitian: matrix not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (asym > herm_tol * scale)
    throw std::invalid_argument("eig_hermitian: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMat> es((a + a.adjoint()) / 2.0);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eig_hermitian: eigensolver failed");
  // Eigen sorts ascending; flip to descending.
  const Eigen::Index n = a.rows();
  EigHermitianResult out;
  out.values = es.eigenvalues().reverse();
  out.vectors = CMat(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  return out;
}

}  // namespace subthz
