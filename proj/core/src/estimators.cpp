#include "subthz/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "subthz/linalg.hpp"

namespace subthz {

namespace {

double total_power(const std::vector<CVec>& ys) {
  double p = 0.0;
  for (const CVec& y : ys) p += y.squaredNorm();
  return p;
}

// Per-pilot column cache for fine-grid indices; avoids rebuilding steering
// products during greedy sweeps.
class ColumnCache {
 public:
  ColumnCache(const DictionarySet& dict) : dict_(dict), cache_(dict.n_pilots()) {}

  const CVec& get(int pilot, long long fine_col) {
    auto& slot = cache_[pilot];
    auto it = slot.find(fine_col);
    if (it != slot.end()) return it->second;
    return slot.emplace(fine_col, dict_.fine_column(pilot, fine_col)).first->second;
  }

  CMat matrix(int pilot, const std::vector<long long>& cols) {
    CMat m(dict_.theta1[pilot].rows(), Eigen::Index(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
      m.col(Eigen::Index(c)) = get(pilot, cols[c]);
    return m;
  }

 private:
  const DictionarySet& dict_;
  std::vector<std::map<long long, CVec>> cache_;
};

// Joint LS refit of all pilots on a fixed column set; returns coefficients and
// the summed residual power, optionally the residuals themselves.
double joint_refit(const std::vector<CVec>& ys, ColumnCache& cache,
                   const std::vector<long long>& cols, CMat* coeffs,
                   std::vector<CVec>* residuals) {
  const int kp = int(ys.size());
  if (coeffs) coeffs->resize(Eigen::Index(cols.size()), kp);
  if (cols.empty()) {
    double power = 0.0;
    for (int p = 0; p < kp; ++p) {
      power += ys[p].squaredNorm();
      if (residuals) (*residuals)[p] = ys[p];
    }
    return power;
  }
  double resid = 0.0;
  for (int p = 0; p < kp; ++p) {
    const CMat u = cache.matrix(p, cols);
    const CVec q = least_squares(u, ys[p]);
    const CVec r = ys[p] - u * q;
    resid += r.squaredNorm();
    if (coeffs) coeffs->col(p) = q;
    if (residuals) (*residuals)[p] = r;
  }
  return resid;
}

}  // namespace

MmvLsResult mmv_ls(const std::vector<CVec>& y, const DictionarySet& dict,
                   const std::vector<long long>& prior, int n_select) {
  if (prior.empty()) throw std::invalid_argument("mmv_ls: prior support must be non-empty");
  if (n_select < 1) throw std::invalid_argument("mmv_ls: n_select must be >= 1");
  n_select = std::min<int>(n_select, int(prior.size()));

  ColumnCache cache(dict);
  MmvLsResult out;
  std::set<long long> chosen;
  for (int step = 0; step < n_select; ++step) {
    double best = std::numeric_limits<double>::infinity();
    long long best_j = -1;
    for (long long j : prior) {
      if (chosen.count(j)) continue;
      std::vector<long long> trial = out.support;
      trial.push_back(j);
      const double resid = joint_refit(y, cache, trial, nullptr, nullptr);
      if (resid < best) {
        best = resid;
        best_j = j;
      }
    }
    if (best_j < 0) break;
    out.support.push_back(best_j);
    chosen.insert(best_j);
  }
  joint_refit(y, cache, out.support, &out.z, nullptr);
  return out;
}

SearchResult sequential_search(const std::vector<CVec>& residuals,
                               const DictionarySet& dict, int coarse_column) {
  const GridSpec& g = dict.grids;
  SearchResult out;
  AngleTuple cur = g.coarse_tuple(coarse_column);

  const auto score = [&](const AngleTuple& t) {
    double s = 0.0;
    for (int p = 0; p < dict.n_pilots(); ++p) {
      const cdouble c = dict.column(p, t).dot(residuals[p]);
      s += std::norm(c);
    }
    return s;
  };

  // Dimension sweep order: h-AOD, v-AOD, h-AOA, v-AOA.
  struct Dim {
    double AngleTuple::* field;
    int g_sub;
  };
  const Dim dims[4] = {{&AngleTuple::aod_h, g.g_sub_t},
                       {&AngleTuple::aod_v, g.g_sub_t},
                       {&AngleTuple::aoa_h, g.g_sub_r},
                       {&AngleTuple::aoa_v, g.g_sub_r}};

  for (int level = 2; level <= g.levels; ++level) {
    for (const Dim& d : dims) {
      const auto cands = hierarchical_subcodebook(d.g_sub, level, cur.*(d.field));
      double best = -1.0;
      double best_psi = cur.*(d.field);
      for (double psi : cands) {
        AngleTuple probe = cur;
        probe.*(d.field) = psi;
        const double s = score(probe);
        ++out.tuples_evaluated;
        if (s > best) {
          best = s;
          best_psi = psi;
        }
      }
      cur.*(d.field) = best_psi;
    }
  }
  out.angles = cur;
  out.fine_column = g.nearest_fine_column(cur);
  // Keep the returned angles exactly on the fine grid.
  out.angles = g.fine_tuple(out.fine_column);
  return out;
}

SompResult mmv_cs_somp(const std::vector<CVec>& y, const DictionarySet& dict,
                       int t_max, double eps_rel) {
  if (t_max < 1) throw std::invalid_argument("mmv_cs_somp: t_max must be >= 1");
  const int kp = int(y.size());
  SompResult out;
  out.residuals = y;

  const double mean_power = total_power(y) / double(kp);
  if (mean_power == 0.0) return out;  // nothing to explain
  const double eps = eps_rel * mean_power;

  ColumnCache cache(dict);
  const Eigen::Index n_coarse = dict.theta1[0].cols();
  std::set<long long> taken;
  double change = std::numeric_limits<double>::infinity();

  while (out.iterations < t_max) {
    // Residual depleted or last update stalled: stop.
    const double resid_power = total_power(out.residuals) / double(kp);
    if (resid_power < eps || change < eps) break;

    // Coarse sweep: summed correlation against every level-1 column.
    RVec scores = RVec::Zero(n_coarse);
    for (int p = 0; p < kp; ++p)
      scores += (dict.theta1[p].adjoint() * out.residuals[p]).cwiseAbs2();
    out.tuples_evaluated += n_coarse;
    int best_coarse = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < n_coarse; ++j) {
      // For single-level grids the coarse cell is the final pick; skip cells
      // already in the support so the argmax matches the flat greedy rule.
      if (dict.grids.levels == 1 && taken.count(j)) continue;
      if (scores(j) > best) {
        best = scores(j);
        best_coarse = int(j);
      }
    }
    if (best <= 0.0) break;

    const SearchResult refined = sequential_search(out.residuals, dict, best_coarse);
    out.tuples_evaluated += refined.tuples_evaluated;
    if (!taken.insert(refined.fine_column).second) {
      out.stalled = true;  // re-selected an existing cell; no progress possible
      break;
    }
    out.picks.push_back(refined.fine_column);
    ++out.iterations;

    std::vector<CVec> next(kp);
    joint_refit(y, cache, out.picks, &out.z, &next);
    change = 0.0;
    for (int p = 0; p < kp; ++p) change += (next[p] - out.residuals[p]).squaredNorm();
    change /= double(kp);
    out.residuals = std::move(next);
  }
  return out;
}

namespace {

std::vector<long long> top_l_prime(const std::map<long long, double>& z_eq, int l_prime) {
  std::vector<std::pair<long long, double>> items(z_eq.begin(), z_eq.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;  // deterministic tie-break
  });
  std::vector<long long> out;
  for (const auto& [j, v] : items) {
    if (int(out.size()) >= l_prime) break;
    out.push_back(j);
  }
  return out;
}

EstimateResult package_result(const Observation& obs, const DictionarySet& dict,
                              const std::vector<long long>& support_cols,
                              const CMat& q, double residual_power,
                              const EstimatorParams& par, Diagnostics diag) {
  EstimateResult res;
  res.cfg = *dict.cfg;
  res.pilots = obs.pilots;
  res.use_squint = dict.squint;
  res.diag = diag;
  res.diag.residual_power = residual_power;
  for (long long j : support_cols) {
    SupportEntry e;
    e.fine_index = j;
    e.angles = dict.grids.fine_tuple(j);
    res.support.push_back(e);
    res.support_coarse.push_back(dict.grids.coarse_parent(j));
  }
  for (int p = 0; p < int(obs.pilots.size()); ++p) res.q_pilot.push_back(q.col(p));
  if (par.refine && int(obs.pilots.size()) >= 2 && !res.support.empty()) {
    res.paths = refine_paths(res.q_pilot, res.support, res.pilots, res.cfg, par);
    res.refined = true;
  }
  return res;
}

}  // namespace

EstimateResult ts_estimate(const Observation& obs, const DictionarySet& dict,
                           const std::vector<long long>& prior_support,
                           const EstimatorParams& par) {
  const std::vector<CVec> ys = vectorize_observations(obs);
  const SystemConfig& cfg = *dict.cfg;
  const int l = cfg.n_paths;
  const int l_cm = par.l_cm >= 0 ? par.l_cm : cfg.n_common;
  const int l_prime = std::max(1, int(std::floor(par.l_prime_mult * double(l))));
  const int t_max = par.somp_t_max > 0 ? par.somp_t_max : 2 * l;

  Diagnostics diag;
  diag.signal_power = total_power(ys);

  // Stage 1: candidate-restricted LS on the tracked support.
  MmvLsResult stage1;
  std::vector<CVec> y_cs = ys;
  if (!prior_support.empty() && l_cm > 0) {
    stage1 = mmv_ls(ys, dict, prior_support, l_cm);
    diag.mmv_ls_selected = int(stage1.support.size());
    ColumnCache cache(dict);
    for (int p = 0; p < int(ys.size()); ++p) {
      const CMat u = cache.matrix(p, stage1.support);
      y_cs[p] = ys[p] - u * stage1.z.col(p);
    }
  }

  // Stage 2: greedy pursuit on what stage 1 could not explain. Skipped when
  // the stage-1 fit is essentially exact, so a clean tracked support is not
  // polluted with spurious picks.
  SompResult stage2;
  if (total_power(y_cs) > 1e-20 * std::max(diag.signal_power, 1e-300)) {
    stage2 = mmv_cs_somp(y_cs, dict, t_max, par.somp_eps_rel);
    diag.somp_iterations = stage2.iterations;
    diag.somp_stalled = stage2.stalled;
    diag.tuples_evaluated += stage2.tuples_evaluated;
  } else {
    diag.cs_skipped = true;
  }

  // Combine: per-column average magnitude of the summed coefficients.
  std::map<long long, RVec> combined;  // column -> per-pilot |coeff| accumulator
  const int kp = int(ys.size());
  const auto accumulate = [&](const std::vector<long long>& cols, const CMat& z) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      auto [it, inserted] = combined.try_emplace(cols[i], RVec::Zero(kp));
      for (int p = 0; p < kp; ++p) it->second(p) += std::abs(z(Eigen::Index(i), p));
    }
  };
  accumulate(stage1.support, stage1.z);
  accumulate(stage2.picks, stage2.z);

  std::vector<long long> xi;
  for (const auto& [j, mags] : combined)
    if (mags.mean() > par.zero_tol) xi.push_back(j);
  if (xi.empty() && !combined.empty())
    for (const auto& [j, mags] : combined) xi.push_back(j);  // keep something

  ColumnCache cache(dict);
  CMat q_det;
  joint_refit(ys, cache, xi, &q_det, nullptr);

  // Rank by equivalent magnitude and keep at most L'.
  std::map<long long, double> z_eq;
  for (std::size_t i = 0; i < xi.size(); ++i)
    z_eq[xi[i]] = q_det.row(Eigen::Index(i)).cwiseAbs().mean();
  const std::vector<long long> support = top_l_prime(z_eq, l_prime);

  CMat q;
  const double resid = joint_refit(ys, cache, support, &q, nullptr);
  return package_result(obs, dict, support, q, resid, par, diag);
}

EstimateResult genie_ls(const Observation& obs, const ChannelRealization& ch,
                        const SystemConfig& cfg, bool use_squint) {
  EstimateResult res;
  res.cfg = cfg;
  res.pilots = obs.pilots;
  res.use_squint = use_squint;
  res.refined = false;
  for (const ChannelPath& p : ch.paths) {
    SupportEntry e;
    e.fine_index = -1;
    e.angles = p.angles;
    res.support.push_back(e);
  }

  double resid = 0.0;
  for (int p = 0; p < int(obs.pilots.size()); ++p) {
    const double delta = use_squint ? cfg.subcarrier_offset(obs.pilots[p]) : 0.0;
    CMat u(obs.y[p].size(), Eigen::Index(ch.paths.size()));
    for (std::size_t l = 0; l < ch.paths.size(); ++l) {
      const AngleTuple& t = ch.paths[l].angles;
      const CVec bt = upa_vector(cfg.n_tx, t.aod_h, t.aod_v, delta, cfg.f_c);
      const CVec br = upa_vector(cfg.n_rx, t.aoa_h, t.aoa_v, delta, cfg.f_c);
      const CVec tf = obs.beams.x[p].transpose() * bt.conjugate();
      const CVec rf = obs.beams.w[p].adjoint() * br;
      CVec col(tf.size() * rf.size());
      for (Eigen::Index i = 0; i < tf.size(); ++i)
        col.segment(i * rf.size(), rf.size()) = tf(i) * rf;
      u.col(Eigen::Index(l)) = col;
    }
    const CVec y = vec(obs.y[p]);
    const CVec q = least_squares(u, y);
    resid += (y - u * q).squaredNorm();
    res.q_pilot.push_back(q);
    res.diag.signal_power += y.squaredNorm();
  }
  res.diag.residual_power = resid;
  return res;
}

std::vector<long long> EstimateResult::support_fine() const {
  std::vector<long long> cols;
  for (const SupportEntry& e : support) cols.push_back(e.fine_index);
  return cols;
}

CMat EstimateResult::channel_estimate(int k) const {
  const double delta = use_squint ? cfg.subcarrier_offset(k) : 0.0;
  CMat h = CMat::Zero(cfg.n_rx.count(), cfg.n_tx.count());
  const double scale = std::sqrt(double(cfg.n_rx.count()) * double(cfg.n_tx.count()));

  if (refined) {
    const double centre = (double(cfg.n_subcarriers) + 1.0) / 2.0;
    const double squint = 1.0 + cfg.subcarrier_offset(k) / cfg.f_c;
    for (const PathEstimate& p : paths) {
      const cdouble zpow = std::pow(p.z, cdouble(double(k) - centre, 0.0));
      const cdouble gamma = scale * (p.alpha_ref / squint) * zpow;
      const CVec br = upa_vector(cfg.n_rx, p.angles.aoa_h, p.angles.aoa_v, delta, cfg.f_c);
      const CVec bt = upa_vector(cfg.n_tx, p.angles.aod_h, p.angles.aod_v, delta, cfg.f_c);
      h.noalias() += gamma * (br * bt.adjoint());
    }
    return h;
  }

  if (q_pilot.empty() || support.empty()) return h;
  // Nearest pilot's coefficients (exact when k is a pilot).
  int best = 0;
  for (int p = 1; p < int(pilots.size()); ++p)
    if (std::abs(pilots[p] - k) < std::abs(pilots[best] - k)) best = p;
  for (std::size_t l = 0; l < support.size(); ++l) {
    const AngleTuple& t = support[l].angles;
    const CVec br = upa_vector(cfg.n_rx, t.aoa_h, t.aoa_v, delta, cfg.f_c);
    const CVec bt = upa_vector(cfg.n_tx, t.aod_h, t.aod_v, delta, cfg.f_c);
    h.noalias() += q_pilot[best](Eigen::Index(l)) * (br * bt.adjoint());
  }
  return h;
}

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kTs: return "ts";
    case EstimatorKind::kTsNoRefine: return "ts-norefine";
    case EstimatorKind::kTsOraclePrior: return "ts-oracleprior";
    case EstimatorKind::kMFista: return "mfista";
    case EstimatorKind::kMFistaNoPrior: return "mfista-noprior";
    case EstimatorKind::kGsomp: return "gsomp";
    case EstimatorKind::kGenieLs: return "genie-ls";
    case EstimatorKind::kGenieLsNoSquint: return "genie-ls-noswb";
  }
  return "unknown";
}

bool estimator_from_name(const std::string& name, EstimatorKind* kind) {
  static const std::pair<const char*, EstimatorKind> table[] = {
      {"ts", EstimatorKind::kTs},
      {"ts-norefine", EstimatorKind::kTsNoRefine},
      {"ts-oracleprior", EstimatorKind::kTsOraclePrior},
      {"mfista", EstimatorKind::kMFista},
      {"mfista-noprior", EstimatorKind::kMFistaNoPrior},
      {"gsomp", EstimatorKind::kGsomp},
      {"genie-ls", EstimatorKind::kGenieLs},
      {"genie-ls-noswb", EstimatorKind::kGenieLsNoSquint},
  };
  for (const auto& [n, k] : table)
    if (name == n) {
      if (kind) *kind = k;
      return true;
    }
  return false;
}

void SupportTracker::reset_state() {
  have_prior_ = false;
  prior_fine_.clear();
  prior_coarse_.clear();
}

FrameOutcome SupportTracker::step(const Observation& obs, const DictionarySet& dict,
                                  const ChannelRealization* truth) {
  const auto run = [&](bool cold) -> EstimateResult {
    switch (kind_) {
      case EstimatorKind::kTs: {
        EstimatorParams p = par_;
        return ts_estimate(obs, dict, cold ? std::vector<long long>{} : prior_fine_, p);
      }
      case EstimatorKind::kTsNoRefine: {
        EstimatorParams p = par_;
        p.refine = false;
        return ts_estimate(obs, dict, cold ? std::vector<long long>{} : prior_fine_, p);
      }
      case EstimatorKind::kTsOraclePrior: {
        if (!truth) throw std::invalid_argument("tracker: oracle prior needs the true channel");
        return ts_estimate(obs, dict, truth->support_columns(), par_);
      }
      case EstimatorKind::kMFista:
        return mfista_estimate(obs, dict, cold ? std::vector<int>{} : prior_coarse_, par_);
      case EstimatorKind::kMFistaNoPrior:
        return mfista_estimate(obs, dict, {}, par_);
      case EstimatorKind::kGsomp:
        return ts_estimate(obs, dict, {}, par_);
      case EstimatorKind::kGenieLs:
      case EstimatorKind::kGenieLsNoSquint:
        if (!truth) throw std::invalid_argument("tracker: genie needs the true channel");
        return genie_ls(obs, *truth, *dict.cfg, kind_ == EstimatorKind::kGenieLs);
    }
    throw std::logic_error("tracker: unknown estimator kind");
  };

  FrameOutcome out;
  out.result = run(!have_prior_);
  out.residual_power = out.result.diag.residual_power;
  const double noise_power = obs.sigma_n2 * combined_noise_gain(obs.beams);
  out.reset_floor = std::max(par_.reset_margin * noise_power,
                             1e-15 * out.result.diag.signal_power);
  const bool tracked = have_prior_ && (kind_ == EstimatorKind::kTs ||
                                       kind_ == EstimatorKind::kTsNoRefine ||
                                       kind_ == EstimatorKind::kMFista);
  if (tracked &&
      (par_.reset_margin <= 0.0 || out.residual_power > out.reset_floor)) {
    out.reset = true;
    out.result = run(/*cold=*/true);
    out.residual_power = out.result.diag.residual_power;
  }

  prior_fine_ = out.result.support_fine();
  prior_coarse_ = out.result.support_coarse;
  have_prior_ = !prior_fine_.empty();
  return out;
}

}  // namespace subthz
