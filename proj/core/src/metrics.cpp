#include "subthz/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "subthz/linalg.hpp"

namespace subthz {

double nmse(const std::vector<CMat>& h_true, const std::vector<CMat>& h_est) {
  if (h_true.size() != h_est.size() || h_true.empty())
    throw std::invalid_argument("nmse: list size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < h_true.size(); ++i) {
    num += (h_true[i] - h_est[i]).squaredNorm();
    den += h_true[i].squaredNorm();
  }
  if (den <= 0.0) throw std::invalid_argument("nmse: zero reference power");
  return num / den;
}

double nmse_pilots(const ChannelRealization& ch, const SystemConfig& cfg,
                   const EstimateResult& est, const std::vector<int>& pilots) {
  std::vector<CMat> ht, he;
  ht.reserve(pilots.size());
  he.reserve(pilots.size());
  for (int k : pilots) {
    ht.push_back(channel_matrix(ch, k, cfg));
    he.push_back(est.channel_estimate(k));
  }
  return nmse(ht, he);
}

namespace {

// Top-n eigenvectors of a PSD product m m^H (columns, descending eigenvalue).
CMat top_eigvecs(const CMat& gram, int n) {
  const EigHermitianResult eg = eig_hermitian(gram);
  return eg.vectors.leftCols(n);
}

double rate_at(const CMat& h, const CMat& h_est, const SeParams& par) {
  const int ns = par.n_s;
  const CMat w = top_eigvecs(h_est * h_est.adjoint(), ns);
  const CMat f = top_eigvecs(h_est.adjoint() * h_est, ns);
  const CMat a = w.adjoint() * h * f;
  CMat r_v = par.sigma_n2 * (w.adjoint() * w);
  // Guard the (near-orthonormal) noise covariance against singularity.
  r_v.diagonal().array() += 1e-15;
  const CMat m = CMat::Identity(ns, ns) +
                 (par.p_t / double(ns)) * r_v.inverse() * a * a.adjoint();
  const cdouble det = m.partialPivLu().determinant();
  const double d = std::max(det.real(), 1.0);  // numerically real, >= 1
  return std::log2(d);
}

}  // namespace

double spectral_efficiency(const std::function<CMat(int)>& h_true,
                           const std::function<CMat(int)>& h_est,
                           const SystemConfig& cfg, const std::vector<int>& pilots,
                           const SeParams& par) {
  if (par.n_s < 1) throw std::invalid_argument("spectral_efficiency: n_s must be >= 1");
  if (par.iota < 0.0 || par.iota > 1.0)
    throw std::invalid_argument("spectral_efficiency: iota must be in [0, 1]");
  if (par.n_s > std::min(cfg.n_rx.count(), cfg.n_tx.count()))
    throw std::invalid_argument("spectral_efficiency: n_s exceeds array rank");
  const std::set<int> pilot_set(pilots.begin(), pilots.end());
  const double df = cfg.bandwidth / double(cfg.n_subcarriers);
  double rate_all = 0.0, rate_data_only = 0.0;
  for (int k = 1; k <= cfg.n_subcarriers; ++k) {
    const double r = rate_at(h_true(k), h_est(k), par);
    rate_all += df * r;
    if (!pilot_set.count(k)) rate_data_only += df * r;
  }
  return (par.iota * rate_data_only + (1.0 - par.iota) * rate_all) /
         (cfg.bandwidth * double(par.n_s));
}

}  // namespace subthz
