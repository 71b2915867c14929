#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "subthz/estimators.hpp"
#include "subthz/linalg.hpp"

// Accelerated proximal-gradient solver for the joint group-sparse recovery
// across pilot subcarriers, plus the correlation-ordered hierarchical
// refinement that lifts the detected coarse cells to the finest grid.
namespace subthz {

double mixed_norm(const CVec& x, int m, int n) {
  if (m < 1 || n < 1 || x.size() != Eigen::Index(m) * n)
    throw std::invalid_argument("mixed_norm: layout mismatch");
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    double g = 0.0;
    for (int j = 0; j < n; ++j) g += std::norm(x(i + j * m));
    total += std::sqrt(g);
  }
  return total;
}

CVec group_prox(const CVec& x, int m, int n, double theta) {
  if (m < 1 || n < 1 || x.size() != Eigen::Index(m) * n)
    throw std::invalid_argument("group_prox: layout mismatch");
  if (theta < 0.0) throw std::invalid_argument("group_prox: negative threshold");
  CVec out = x;
  for (int i = 0; i < m; ++i) {
    double g = 0.0;
    for (int j = 0; j < n; ++j) g += std::norm(x(i + j * m));
    const double norm = std::sqrt(g);
    const double scale = norm > theta ? (norm - theta) / norm : 0.0;
    for (int j = 0; j < n; ++j) out(i + j * m) *= scale;
  }
  return out;
}

namespace {

double dict_step_norm2(const DictionarySet& dict) {
  if (dict.step_norm2 < 0.0) {
    double worst = 0.0;
    for (const CMat& t : dict.theta1)
      worst = std::max(worst, spectral_norm(t, /*rel_tol=*/1e-4, /*max_iter=*/200));
    // Small safety factor: the norm estimate converges from below.
    dict.step_norm2 = 1.02 * worst * worst;
  }
  return dict.step_norm2;
}

// Group norms of the rows of z (one group per level-1 column).
RVec row_norms(const CMat& z) { return z.rowwise().norm(); }

double objective(const std::vector<CVec>& ys, const DictionarySet& dict, const CMat& z,
                 const RVec& lambda) {
  double f = 0.0;
  for (std::size_t p = 0; p < ys.size(); ++p)
    f += 0.5 * (dict.theta1[p] * z.col(Eigen::Index(p)) - ys[p]).squaredNorm();
  const RVec norms = row_norms(z);
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (norms(i) == 0.0) continue;  // suppressed groups contribute nothing
    f += lambda(i) * norms(i);
  }
  return f;
}

}  // namespace

double fista_next_t(double t) { return (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0; }

EstimateResult mfista_estimate(const Observation& obs, const DictionarySet& dict,
                               const std::vector<int>& prior_coarse,
                               const EstimatorParams& par) {
  const std::vector<CVec> ys = vectorize_observations(obs);
  const SystemConfig& cfg = *dict.cfg;
  const int kp = int(ys.size());
  const Eigen::Index g1 = dict.theta1[0].cols();
  const int l = cfg.n_paths;
  const int l_cm = par.l_cm >= 0 ? par.l_cm : cfg.n_common;
  const int l_prime = std::max(1, int(std::floor(par.l_prime_mult * double(l))));

  Diagnostics diag;
  double signal = 0.0;
  for (const CVec& y : ys) signal += y.squaredNorm();
  diag.signal_power = signal;

  // Penalty split: tracked rows get lambda1, the rest lambda2. Without a
  // prior every row is a potential new path; with L == L_cm no new paths are
  // expected and the complementary groups are suppressed outright.
  std::vector<bool> in_prior(std::size_t(g1), false);
  int prior_rows = 0;
  for (int j : prior_coarse)
    if (j >= 0 && j < int(g1) && !in_prior[std::size_t(j)]) {
      in_prior[std::size_t(j)] = true;
      ++prior_rows;
    }
  const double sigma_n = std::sqrt(std::max(obs.sigma_n2, 0.0));
  const double lambda_base =
      par.lambda_scale * sigma_n * std::sqrt(double(ys[0].size()));
  const double lambda1 =
      prior_rows > 0 ? lambda_base / std::sqrt(double(std::max(l_cm, 1))) : 0.0;
  double lambda2;
  if (prior_rows == 0)
    lambda2 = lambda_base / std::sqrt(double(l));
  else if (l == l_cm)
    lambda2 = std::numeric_limits<double>::infinity();
  else
    lambda2 = lambda_base / std::sqrt(double(l - l_cm));
  RVec lambda(g1);
  for (Eigen::Index i = 0; i < g1; ++i) lambda(i) = in_prior[std::size_t(i)] ? lambda1 : lambda2;

  // Monotone momentum-accelerated proximal gradient on Z (rows: grid cells,
  // cols: pilots): the accepted iterate never increases the objective; the
  // momentum point still uses the raw proximal candidate.
  const double eta = dict_step_norm2(dict);
  CMat x = CMat::Zero(g1, kp);  // accepted iterate, best objective so far
  CMat yq = x;                  // momentum point
  double t_mom = 1.0;
  double f_x = objective(ys, dict, x, lambda);
  const double f0 = f_x;
  const double stop = par.fista_tol_rel * std::max(f0, 1e-300);

  if (f0 > 0.0 && eta > 0.0) {
    for (int u = 0; u < par.fista_max_iter; ++u) {
      CMat grad(g1, kp);
      for (int p = 0; p < kp; ++p) {
        const CVec e = dict.theta1[p] * yq.col(p) - ys[p];
        grad.col(p) = dict.theta1[p].adjoint() * e;
      }
      CMat step = yq - grad / eta;
      // Row-wise group shrink with per-row thresholds.
      CMat cand(g1, kp);
      for (Eigen::Index i = 0; i < g1; ++i) {
        const double norm = step.row(i).norm();
        const double th = lambda(i) / eta;
        const double scale = norm > th ? (norm - th) / norm : 0.0;
        cand.row(i) = scale * step.row(i);
      }
      const double f_cand = objective(ys, dict, cand, lambda);
      const double t_next = fista_next_t(t_mom);
      const double f_old = f_x;
      const CMat x_old = x;
      if (f_cand <= f_x) {
        x = cand;
        f_x = f_cand;
      }
      yq = x + (t_mom / t_next) * (cand - x) + ((t_mom - 1.0) / t_next) * (x - x_old);
      t_mom = t_next;
      ++diag.fista_iterations;
      if (std::abs(f_cand - f_old) < stop) break;
    }
  }
  diag.fista_objective = f_x;

  // Detected level-1 support.
  const RVec norms = row_norms(x);
  std::vector<int> xi1;
  for (Eigen::Index i = 0; i < g1; ++i)
    if (norms(i) > par.zero_tol) xi1.push_back(int(i));

  // Correlation-ordered refinement: pick the strongest remaining coarse cell
  // against the current residual, lift it to the finest grid, refit jointly.
  std::vector<CVec> resid = ys;
  std::set<int> picked_coarse;
  std::vector<long long> support;
  std::vector<AngleTuple> tuples;
  std::vector<int> coarse_of_support;
  CMat q(0, kp);
  double resid_power = signal;

  while (int(support.size()) < l_prime) {
    int best_j = -1;
    double best = -1.0;
    for (int j : xi1) {
      if (picked_coarse.count(j)) continue;
      double s = 0.0;
      for (int p = 0; p < kp; ++p)
        s += std::norm(dict.theta1[p].col(j).dot(resid[p]));
      ++diag.tuples_evaluated;
      if (s > best) {
        best = s;
        best_j = j;
      }
    }
    if (best_j < 0) {
      diag.search_truncated = int(support.size()) < l_prime;
      break;
    }
    picked_coarse.insert(best_j);
    const SearchResult refined = sequential_search(resid, dict, best_j);
    diag.tuples_evaluated += refined.tuples_evaluated;
    if (std::find(support.begin(), support.end(), refined.fine_column) != support.end())
      continue;  // landed on an existing cell; try the next coarse candidate
    support.push_back(refined.fine_column);
    tuples.push_back(refined.angles);
    coarse_of_support.push_back(best_j);

    resid_power = 0.0;
    for (int p = 0; p < kp; ++p) {
      const CMat u = dict.columns(p, tuples);
      if (p == 0) q.resize(u.cols(), kp);
      q.col(p) = least_squares(u, ys[p]);
      resid[p] = ys[p] - u * q.col(p);
      resid_power += resid[p].squaredNorm();
    }
  }

  EstimateResult res;
  res.cfg = cfg;
  res.pilots = obs.pilots;
  res.use_squint = dict.squint;
  res.diag = diag;
  res.diag.residual_power = resid_power;
  for (std::size_t i = 0; i < support.size(); ++i) {
    SupportEntry e;
    e.fine_index = support[i];
    e.angles = tuples[i];
    res.support.push_back(e);
    res.support_coarse.push_back(coarse_of_support[i]);
  }
  for (int p = 0; p < kp; ++p)
    res.q_pilot.push_back(support.empty() ? CVec(0) : CVec(q.col(p)));
  if (par.refine && kp >= 2 && !res.support.empty()) {
    res.paths = refine_paths(res.q_pilot, res.support, res.pilots, res.cfg, par);
    res.refined = true;
  }
  return res;
}

}  // namespace subthz
