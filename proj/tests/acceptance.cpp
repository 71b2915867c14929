// Release gate. Each check exercises one shipped guarantee end to end and
// prints a single PASS/FAIL line with the measured numbers; thresholds are
// pinned here, next to the measurement. Run without arguments for the full
// gate, or pass check numbers (e.g. `subthz_acceptance 3 5`) to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "subthz/channel.hpp"
#include "subthz/codebook.hpp"
#include "subthz/dictionary.hpp"
#include "subthz/estimators.hpp"
#include "subthz/experiment.hpp"
#include "subthz/io.hpp"
#include "subthz/metrics.hpp"
#include "subthz/rng.hpp"
#include "subthz/training.hpp"

namespace {

using namespace subthz;

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

struct CheckResult {
  bool pass = false;
  std::string detail;
};

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

// Per-record nmse values for one estimator at one axis value; frame 0 keeps
// every frame.
std::vector<double> nmse_of(const std::vector<MetricRecord>& recs,
                            const std::string& est, double value, int frame) {
  std::vector<double> out;
  for (const auto& r : recs) {
    if (r.estimator != est) continue;
    if (std::abs(r.axis_value - value) > 1e-9) continue;
    if (frame != 0 && r.frame != frame) continue;
    out.push_back(r.nmse);
  }
  return out;
}

struct GapStat {
  double gap = 0.0;     // mean of the paired per-trial differences a - b
  double two_se = 0.0;  // two standard errors of that mean
};

GapStat paired_gap(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = int(a.size());
  double m = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = a[std::size_t(i)] - b[std::size_t(i)];
    m += d;
    m2 += d * d;
  }
  m /= n;
  const double var = std::max(0.0, m2 / n - m * m);
  return {m, 2.0 * std::sqrt(var / n)};
}

// Shared method settings for the sweep-based checks: the regularization
// weight is calibrated once for the lowest operating SNR used below and kept
// identical everywhere so the checks compare estimators, not tunings.
constexpr double kLambdaScale = 0.15;

// --- 1: noiseless on-grid recovery with a correct prior -------------------
//
// With on-grid angles, the frequency-flat-per-path gain model, in-window
// delays and the true support handed over as the tracking prior, the
// two-stage estimator must reproduce the channel to numerical precision.
CheckResult check_exact_recovery() {
  constexpr int kSeeds = 20;
  constexpr double kNmseMax = 1e-6;
  constexpr double kBudgetS = 30.0;

  ExperimentSpec es = desk_scale_defaults();
  es.sys.on_grid = true;
  EstimatorParams par = es.est;
  par.l_cm = es.sys.n_paths;  // the prior covers every path; keep them all

  const double t0 = now_s();
  double worst = 0.0;
  int ok = 0;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    Rng rng{std::uint64_t(seed)};
    const ChannelRealization ch = draw_channel(es.sys, es.grids, rng);
    const BeamSet beams = random_beams(es.sys, es.train, rng);
    const Observation obs = observe(ch, beams, es.sys, 0.0, rng);
    const DictionarySet dict = build_dictionaries(es.sys, es.grids, beams);
    const EstimateResult res = ts_estimate(obs, dict, ch.support_columns(), par);
    const double e = nmse_pilots(ch, es.sys, res, obs.pilots);
    worst = std::max(worst, e);
    if (e < kNmseMax) ++ok;
  }
  const double dt = now_s() - t0;
  return {ok == kSeeds && dt < kBudgetS,
          strf("%d/%d seeds below %.0e, worst nmse %.1e, %.1f s (budget %.0f s)", ok,
               kSeeds, kNmseMax, worst, dt, kBudgetS)};
}

// --- 2: narrowband-steering ablation floor at full scale ------------------
//
// A genie-aided LS that models the array response at the carrier for every
// subcarrier keeps an irreducible error floor set by beam squint. The floor
// must match the reference operating points: around 4e-2 at B = 8 GHz and
// around 2.7e-3 at B = 0.7 GHz for a 256-antenna receiver at 20 dB SNR.
CheckResult check_ablation_floor() {
  constexpr int kDraws = 50;
  constexpr double kSnrDb = 20.0;
  constexpr double kBudgetS = 600.0;
  const struct {
    double bandwidth, lo, hi;
  } legs[] = {{8e9, 2e-2, 8e-2}, {0.7e9, 1e-3, 6e-3}};

  const ExperimentSpec es = paper_scale_defaults();
  const double t0 = now_s();
  std::string detail;
  bool pass = true;
  for (const auto& leg : legs) {
    SystemConfig sys = es.sys;
    sys.bandwidth = leg.bandwidth;
    double m = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      Rng rng(9000 + std::uint64_t(i));
      const ChannelRealization ch = draw_channel(sys, es.grids, rng);
      const BeamSet beams = random_beams(sys, es.train, rng);
      const double sigma_n2 = calibrate_noise(kSnrDb, ch, beams, sys);
      const Observation obs = observe(ch, beams, sys, sigma_n2, rng);
      const EstimateResult res = genie_ls(obs, ch, sys, /*use_squint=*/false);
      m += nmse_pilots(ch, sys, res, obs.pilots) / kDraws;
    }
    const bool in_range = m >= leg.lo && m <= leg.hi;
    pass = pass && in_range;
    detail += strf("B=%.1f GHz: %.2e %s [%.0e, %.0e]; ", leg.bandwidth / 1e9, m,
                   in_range ? "in" : "OUTSIDE", leg.lo, leg.hi);
  }
  const double dt = now_s() - t0;
  pass = pass && dt < kBudgetS;
  detail += strf("%.1f s (budget %.0f s)", dt, kBudgetS);
  return {pass, detail};
}

// --- 3: estimator ordering at high SNR ------------------------------------
//
// On tracked frames at 20 dB the mean error must order
//   genie-ls < mfista <= ts < gsomp,
// with the strict gaps exceeding two standard errors of the paired per-trial
// differences and the middle gap not significantly inverted.
CheckResult check_ordering() {
  constexpr int kTrials = 100;
  constexpr double kBudgetS = 1200.0;

  ExperimentSpec es = desk_scale_defaults();
  es.axis = SweepAxis::kSnrDb;
  es.values = {20.0};
  es.trials = kTrials;
  es.frames = 2;
  es.estimators = {EstimatorKind::kGenieLs, EstimatorKind::kMFista,
                   EstimatorKind::kTs, EstimatorKind::kGsomp};
  es.est.lambda_scale = kLambdaScale;
  es.seed = 31;
  es.timing = false;
  es.threads = 0;

  const double t0 = now_s();
  const auto recs = run_experiment(es);
  const double dt = now_s() - t0;

  const auto genie = nmse_of(recs, "genie-ls", 20.0, 2);
  const auto mfista = nmse_of(recs, "mfista", 20.0, 2);
  const auto ts = nmse_of(recs, "ts", 20.0, 2);
  const auto gsomp = nmse_of(recs, "gsomp", 20.0, 2);
  const GapStat g1 = paired_gap(mfista, genie);
  const GapStat g2 = paired_gap(ts, mfista);
  const GapStat g3 = paired_gap(gsomp, ts);

  const bool order = mean(genie) < mean(mfista) && mean(ts) < mean(gsomp);
  const bool sig = g1.gap > g1.two_se &&   // genie-ls strictly best
                   g2.gap > -g2.two_se &&  // mfista <= ts within noise
                   g3.gap > g3.two_se;     // gsomp strictly worst
  const bool pass = order && sig && dt < kBudgetS;
  return {pass,
          strf("means %.2e < %.2e <= %.2e < %.2e; gaps/2se %.1e/%.1e, %.1e/%.1e, "
               "%.1e/%.1e; %d trials, %.0f s (budget %.0f s)",
               mean(genie), mean(mfista), mean(ts), mean(gsomp), g1.gap, g1.two_se,
               g2.gap, g2.two_se, g3.gap, g3.two_se, kTrials, dt, kBudgetS)};
}

// --- 4: per-path refinement gain at low SNR -------------------------------
//
// At -10 dB the delay/gain refinement stage must cut the two-stage
// estimator's mean error by at least 15% against the same estimator with
// refinement disabled.
CheckResult check_refinement_gain() {
  constexpr int kTrials = 100;
  constexpr double kMinGain = 0.15;

  ExperimentSpec es = desk_scale_defaults();
  es.values = {-10.0};
  es.trials = kTrials;
  es.frames = 2;
  es.estimators = {EstimatorKind::kTs, EstimatorKind::kTsNoRefine};
  es.est.lambda_scale = kLambdaScale;
  es.seed = 41;
  es.timing = false;
  es.threads = 0;

  const auto recs = run_experiment(es);
  const double with = mean(nmse_of(recs, "ts", -10.0, 0));
  const double without = mean(nmse_of(recs, "ts-norefine", -10.0, 0));
  const double gain = 1.0 - with / without;
  return {gain >= kMinGain,
          strf("mean nmse %.3e refined vs %.3e unrefined: %.1f%% gain (need >= %.0f%%, "
               "%d trials)",
               with, without, 100.0 * gain, 100.0 * kMinGain, kTrials)};
}

// --- 5: joint-subcarrier gain ---------------------------------------------
//
// Sharing one support across five pilot subcarriers must cut the mean error
// of both sparse estimators by at least 30% against single-subcarrier
// recovery at -10 dB.
CheckResult check_mmv_gain() {
  constexpr int kTrials = 100;
  constexpr double kMinDrop = 0.30;

  ExperimentSpec es = desk_scale_defaults();
  es.axis = SweepAxis::kPilotSubcarriers;
  es.values = {1.0, 5.0};
  es.base_snr_db = -10.0;
  es.trials = kTrials;
  es.frames = 2;
  es.estimators = {EstimatorKind::kTs, EstimatorKind::kMFista};
  es.est.lambda_scale = kLambdaScale;
  es.seed = 51;
  es.timing = false;
  es.threads = 0;

  const auto recs = run_experiment(es);
  std::string detail;
  bool pass = true;
  for (const char* est : {"ts", "mfista"}) {
    const double m1 = mean(nmse_of(recs, est, 1.0, 0));
    const double m5 = mean(nmse_of(recs, est, 5.0, 0));
    const double drop = 1.0 - m5 / m1;
    pass = pass && drop >= kMinDrop;
    detail += strf("%s %.2e -> %.2e (%.0f%%); ", est, m1, m5, 100.0 * drop);
  }
  detail += strf("need >= %.0f%% each, %d trials", 100.0 * kMinDrop, kTrials);
  return {pass, detail};
}

// --- 6: numerical property spot-checks ------------------------------------
//
// Re-runs the load-bearing numerical identities with a wall-clock budget per
// property: group shrinkage against brute-force minimization, the solver
// gradient against finite differences, greedy-refit residual orthogonality,
// the vectorization/Kronecker identity, and the squinted first-null
// beamwidth.
CheckResult check_properties() {
  constexpr double kBudgetS = 60.0;
  std::string detail;
  bool pass = true;

  // Group shrinkage: scan the radial scale per group, compare vectors.
  {
    const double t0 = now_s();
    Rng rng(61);
    const int m = 12, n = 4;
    CVec x(m * n);
    for (int i = 0; i < x.size(); ++i) x(i) = rng.cnormal(1.0);
    double norm_sum = 0.0;
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int g = 0; g < n; ++g) s += std::norm(x(i + g * m));
      norm_sum += std::sqrt(s);
    }
    const double theta = 0.35 * norm_sum / m;
    const CVec got = group_prox(x, m, n, theta);
    CVec brute = x;
    for (int i = 0; i < m; ++i) {
      double vn = 0.0;
      for (int g = 0; g < n; ++g) vn += std::norm(x(i + g * m));
      vn = std::sqrt(vn);
      double best_s = 0.0, best_f = 0.5 * vn * vn;  // s = 0 candidate
      for (double s = 1e-5; s <= 1.0; s += 1e-5) {
        const double f = 0.5 * (s - 1.0) * (s - 1.0) * vn * vn + theta * s * vn;
        if (f < best_f) best_f = f, best_s = s;
      }
      for (int g = 0; g < n; ++g) brute(i + g * m) = best_s * x(i + g * m);
    }
    const double err = (got - brute).cwiseAbs().maxCoeff();
    const double dt = now_s() - t0;
    pass = pass && err < 1e-3 && dt < kBudgetS;
    detail += strf("prox %.1e; ", err);
  }

  // Solver gradient 0.5 sum_p ||Theta_p z_p - y_p||^2 against central
  // differences on real/imaginary coordinates.
  {
    const double t0 = now_s();
    Rng rng(62);
    const int rows = 30, cols = 16, pilots = 3;
    std::vector<CMat> th(pilots);
    std::vector<CVec> y(pilots), z(pilots);
    for (int p = 0; p < pilots; ++p) {
      th[std::size_t(p)] = CMat(rows, cols);
      for (int i = 0; i < rows * cols; ++i)
        th[std::size_t(p)](i / cols, i % cols) = rng.cnormal(1.0);
      y[std::size_t(p)] = CVec(rows);
      for (int i = 0; i < rows; ++i) y[std::size_t(p)](i) = rng.cnormal(1.0);
      z[std::size_t(p)] = CVec(cols);
      for (int i = 0; i < cols; ++i) z[std::size_t(p)](i) = rng.cnormal(1.0);
    }
    const auto f = [&] {
      double s = 0.0;
      for (int p = 0; p < pilots; ++p)
        s += 0.5 * (th[std::size_t(p)] * z[std::size_t(p)] - y[std::size_t(p)])
                       .squaredNorm();
      return s;
    };
    double worst = 0.0;
    const double h = 1e-6;
    for (int probe = 0; probe < 24; ++probe) {
      const int p = int(rng.uniform_index(pilots));
      const int i = int(rng.uniform_index(cols));
      const bool re = rng.uniform() < 0.5;
      const CVec r = th[std::size_t(p)] * z[std::size_t(p)] - y[std::size_t(p)];
      const cdouble g = (th[std::size_t(p)].adjoint() * r)(i);
      const double analytic = re ? g.real() : g.imag();
      const cdouble step = re ? cdouble(h, 0.0) : cdouble(0.0, h);
      z[std::size_t(p)](i) += step;
      const double fp = f();
      z[std::size_t(p)](i) -= 2.0 * step;
      const double fm = f();
      z[std::size_t(p)](i) += step;
      const double fd = (fp - fm) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - analytic) /
                                  std::max(1e-8, std::abs(analytic)));
    }
    const double dt = now_s() - t0;
    pass = pass && worst < 1e-5 && dt < kBudgetS;
    detail += strf("grad %.1e; ", worst);
  }

  // Greedy refit leaves residuals orthogonal to every selected column.
  {
    const double t0 = now_s();
    ExperimentSpec es = desk_scale_defaults();
    Rng rng(63);
    const ChannelRealization ch = draw_channel(es.sys, es.grids, rng);
    const BeamSet beams = random_beams(es.sys, es.train, rng);
    const double sigma_n2 = calibrate_noise(20.0, ch, beams, es.sys);
    const Observation obs = observe(ch, beams, es.sys, sigma_n2, rng);
    const DictionarySet dict = build_dictionaries(es.sys, es.grids, beams);
    const auto y = vectorize_observations(obs);
    const SompResult somp = mmv_cs_somp(y, dict, 2 * es.sys.n_paths, 1e-3);
    double worst = 0.0;
    for (int p = 0; p < dict.n_pilots(); ++p) {
      for (const long long c : somp.picks) {
        const CVec col = dict.fine_column(p, c);
        const double ip = std::abs(col.dot(somp.residuals[std::size_t(p)]));
        worst = std::max(
            worst, ip / (col.norm() * y[std::size_t(p)].norm() + 1e-300));
      }
    }
    const double dt = now_s() - t0;
    pass = pass && worst < 1e-8 && dt < kBudgetS;
    detail += strf("orth %.1e; ", worst);
  }

  // vec(A X B) = (B^T kron A) vec(X) on random triples.
  {
    const double t0 = now_s();
    Rng rng(64);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const int ma = 5, na = 4, nb = 6, pb = 3;
      CMat a(ma, na), x(na, nb), b(nb, pb);
      for (int i = 0; i < a.size(); ++i) a(i / na, i % na) = rng.cnormal(1.0);
      for (int i = 0; i < x.size(); ++i) x(i / nb, i % nb) = rng.cnormal(1.0);
      for (int i = 0; i < b.size(); ++i) b(i / pb, i % pb) = rng.cnormal(1.0);
      const CMat axb = a * x * b;
      const CVec lhs = Eigen::Map<const CVec>(axb.data(), axb.size());
      const CMat bt = b.transpose();
      CMat kron(bt.rows() * ma, bt.cols() * na);
      for (int i = 0; i < bt.rows(); ++i)
        for (int j = 0; j < bt.cols(); ++j)
          kron.block(i * ma, j * na, ma, na) = bt(i, j) * a;
      const CVec rhs = kron * Eigen::Map<const CVec>(x.data(), x.size());
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    const double dt = now_s() - t0;
    pass = pass && worst < 1e-12 && dt < kBudgetS;
    detail += strf("kron %.1e; ", worst);
  }

  // First-null beamwidth of the expected pattern: 2/(N (1 + delta/f_c)),
  // located by scanning each predicted null's neighbourhood.
  {
    const double t0 = now_s();
    const int n = 16;
    const double f_c = 142e9, delta = 1e9, psi_i = 0.18;
    const double squint = 1.0 + delta / f_c;
    const double predicted = 2.0 / (n * squint);
    const double step = 1e-5;
    double nulls[2] = {0.0, 0.0};
    int side = 0;
    for (const double centre : {psi_i - predicted / 2.0, psi_i + predicted / 2.0}) {
      double best = 1e300, best_psi = centre;
      for (double psi = centre - 0.3 / n; psi <= centre + 0.3 / n; psi += step) {
        const double v = std::abs(expected_beam_pattern(n, 4, psi, psi_i, delta, f_c));
        if (v < best) best = v, best_psi = psi;
      }
      nulls[side++] = best_psi;
    }
    const double width = nulls[1] - nulls[0];
    const double err = std::abs(width - predicted);
    const double dt = now_s() - t0;
    pass = pass && err <= step && dt < kBudgetS;
    detail += strf("fnbw %.1e (step %.0e)", err, step);
  }

  return {pass, detail};
}

// --- 7: sweep determinism --------------------------------------------------
//
// Re-running the same sweep specification, including across worker-thread
// counts, must produce byte-identical record files once timing capture is
// off.
CheckResult check_determinism() {
  ExperimentSpec es = desk_scale_defaults();
  es.values = {0.0, 20.0};
  es.trials = 5;
  es.frames = 2;
  es.estimators = {EstimatorKind::kTs, EstimatorKind::kMFista,
                   EstimatorKind::kGenieLs};
  es.est.lambda_scale = kLambdaScale;
  es.seed = 71;
  es.timing = false;

  const auto csv_bytes = [&](int threads) {
    ExperimentSpec run = es;
    run.threads = threads;
    const auto recs = run_experiment(run);
    const auto path = std::filesystem::temp_directory_path() /
                      ("subthz_acceptance_det_" + std::to_string(threads) + ".csv");
    write_records_csv(path.string(), recs);
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    std::filesystem::remove(path);
    return bytes;
  };

  const std::string a = csv_bytes(1);
  const std::string b = csv_bytes(4);
  const std::string c = csv_bytes(1);
  const bool pass = !a.empty() && a == b && a == c &&
                    a.rfind("estimator,axis,axis_value,trial,frame,", 0) == 0;
  return {pass, strf("3 runs (1/4/1 threads): %zu bytes each, %s", a.size(),
                     (a == b && a == c) ? "identical" : "DIFFERENT")};
}

// --- 8: hierarchical search cost -------------------------------------------
//
// Per detected path the hierarchical selection must evaluate exactly
// G^4 (level-1 sweep) + 4 (M-1) G (per-level per-dimension refinement)
// candidate tuples, versus G^(4M) for an exhaustive fine-grid sweep.
CheckResult check_search_cost() {
  std::string detail;
  bool pass = true;
  for (const int levels : {2, 3}) {
    ExperimentSpec es = desk_scale_defaults();
    es.grids = GridSpec{4, 4, levels};
    const int g = es.grids.g_sub_r;
    Rng rng(81 + std::uint64_t(levels));
    const ChannelRealization ch = draw_channel(es.sys, es.grids, rng);
    const BeamSet beams = random_beams(es.sys, es.train, rng);
    const Observation obs = observe(ch, beams, es.sys, 0.0, rng);
    const DictionarySet dict = build_dictionaries(es.sys, es.grids, beams);
    const auto y = vectorize_observations(obs);

    const long long per_level = 4LL * (levels - 1) * g;
    const long long coarse = 1LL * g * g * g * g;
    const SearchResult sr =
        sequential_search(y, dict, es.grids.coarse_parent(ch.support_columns()[0]));
    const SompResult somp = mmv_cs_somp(y, dict, 2 * es.sys.n_paths, 1e-3);
    const long long per_path = coarse + per_level;
    const bool exact = sr.tuples_evaluated == per_level &&
                       somp.tuples_evaluated ==
                           somp.iterations * per_path;
    pass = pass && exact;
    detail += strf("M=%d: %lld/path vs %.0f exhaustive%s; ", levels, per_path,
                   std::pow(double(g), 4.0 * levels), exact ? "" : " MISMATCH");
  }
  return {pass, detail + "counters exact"};
}

struct Check {
  const char* name;
  CheckResult (*fn)();
};

const Check kChecks[] = {
    {"noiseless on-grid recovery with a correct prior", check_exact_recovery},
    {"narrowband-steering ablation floor", check_ablation_floor},
    {"estimator ordering at 20 dB", check_ordering},
    {"refinement gain at -10 dB", check_refinement_gain},
    {"joint-subcarrier gain, 5 vs 1 pilots", check_mmv_gain},
    {"numerical property spot-checks", check_properties},
    {"sweep determinism across reruns and threads", check_determinism},
    {"hierarchical search cost counters", check_search_cost},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (int i = 0; i < int(std::size(kChecks)); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    const CheckResult r = kChecks[std::size_t(i)].fn();
    std::printf("[%s] %d %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1,
                kChecks[std::size_t(i)].name, r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  if (failures > 0) std::printf("%d check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
