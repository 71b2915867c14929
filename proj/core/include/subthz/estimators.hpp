#pragma once

#include <string>
#include <vector>

#include "subthz/dictionary.hpp"
#include "subthz/types.hpp"

// Joint-subcarrier sparse channel estimators. All of them produce a final
// support of at most L' = floor(l_prime_mult * L) fine-grid cells plus
// per-pilot beamspace coefficients, optionally refined into per-path
// (gain, delay) parameters that extrapolate the estimate to every subcarrier.
namespace subthz {

struct EstimatorParams {
  int l_cm = -1;              // paths shared across frames; -1 -> config L_cm
  double l_prime_mult = 4.0;  // L' = floor(mult * L)
  int somp_t_max = 0;         // greedy iteration cap; 0 -> 2L
  double somp_eps_rel = 1e-3; // stall/stop threshold, relative to mean pilot power
  int fista_max_iter = 500;
  double fista_tol_rel = 1e-6;  // objective-change stop, relative to F(0)
  double lambda_scale = 1.0;    // lambda = scale * sigma_n * sqrt(Q_p T_p)
  bool refine = true;
  bool disambiguate_delay = false;  // enumerate delay-root branches
  double reset_margin = 3.0;        // tracking reset: residual > margin * noise floor
  double zero_tol = 1e-12;          // nonzero-coefficient test
  double ratio_floor = 1e-12;       // degenerate pilot-ratio guard
};

struct SupportEntry {
  long long fine_index = -1;  // flat fine-grid column; -1 for off-grid (genie)
  AngleTuple angles;
};

struct PathEstimate {
  cdouble alpha_ref{0.0, 0.0};  // reference gain at the carrier
  cdouble z{1.0, 0.0};          // per-subcarrier phase generator, unit modulus
  double tau = 0.0;             // delay recovered from arg(z)
  AngleTuple angles;
};

struct Diagnostics {
  int mmv_ls_selected = 0;
  int somp_iterations = 0;
  bool somp_stalled = false;
  bool cs_skipped = false;
  int fista_iterations = 0;
  double fista_objective = 0.0;
  bool search_truncated = false;     // candidate pool exhausted before L'
  long long tuples_evaluated = 0;    // candidate tuples scanned by selections
  double signal_power = 0.0;         // sum_k ||y_k||^2
  double residual_power = 0.0;       // after the final support refit
};

struct EstimateResult {
  std::vector<SupportEntry> support;  // final support, selection order
  std::vector<int> support_coarse;    // level-1 parents (next-frame prior for M-FISTA)
  std::vector<CVec> q_pilot;          // per pilot: LS coefficients on `support`
  std::vector<PathEstimate> paths;    // refinement output, aligned with support
  bool refined = false;
  bool use_squint = true;  // false: reconstruct with carrier-frequency steering
  SystemConfig cfg;
  std::vector<int> pilots;
  Diagnostics diag;

  std::vector<long long> support_fine() const;
  // Channel reconstruction at any subcarrier. Refined results use the
  // per-path frequency model; unrefined ones use the nearest pilot's
  // coefficients (exact on pilots).
  CMat channel_estimate(int k) const;
};

// --- building-block operations -------------------------------------------

// Mixed l2/l1 norm of a stacked vector x of m groups with n entries each,
// entry g of group i at position i + g*m:  sum_i sqrt(sum_g |x(i+g*m)|^2).
double mixed_norm(const CVec& x, int m, int n);

// Group soft threshold under the same layout: each group v becomes
// v * max(||v|| - theta, 0) / ||v||.
CVec group_prox(const CVec& x, int m, int n, double theta);

// Momentum sequence t_{u+1} = (1 + sqrt(1 + 4 t_u^2)) / 2, t_1 = 1.
double fista_next_t(double t);

// Greedy candidate-restricted joint LS: grows the support inside `prior`
// (fine-grid columns), each step keeping the candidate that minimizes the
// summed per-pilot LS residual, until n_select columns are chosen.
struct MmvLsResult {
  std::vector<long long> support;
  CMat z;  // |support| x K_p coefficients
};
MmvLsResult mmv_ls(const std::vector<CVec>& y, const DictionarySet& dict,
                   const std::vector<long long>& prior, int n_select);

// Hierarchical refinement of one coarse pick: per level, sweep the four angle
// dimensions in order (h-AOD, v-AOD, h-AOA, v-AOA) over the level's
// sub-codebook, maximizing the summed correlation with the residuals.
struct SearchResult {
  long long fine_column = 0;
  AngleTuple angles;
  long long tuples_evaluated = 0;  // excludes the caller's coarse sweep
};
SearchResult sequential_search(const std::vector<CVec>& residuals,
                               const DictionarySet& dict, int coarse_column);

// Simultaneous OMP across pilots with hierarchical selection: per iteration a
// coarse correlation sweep picks a level-1 cell, sequential_search refines it
// to the finest grid, then a joint LS refit updates all residuals. Stops when
// the residual update stalls, the residual is depleted, or t_max is reached.
struct SompResult {
  std::vector<long long> picks;  // fine columns, pick order
  CMat z;                        // |picks| x K_p coefficients
  std::vector<CVec> residuals;
  int iterations = 0;
  bool stalled = false;
  long long tuples_evaluated = 0;
};
SompResult mmv_cs_somp(const std::vector<CVec>& y, const DictionarySet& dict,
                       int t_max, double eps_rel);

// --- full estimators ------------------------------------------------------

// Two-stage estimator: candidate-restricted LS on the previous support, SOMP
// on the stage-1 residual, support combination and joint refit, then per-path
// refinement. An empty prior skips stage 1 (the plain greedy baseline).
EstimateResult ts_estimate(const Observation& obs, const DictionarySet& dict,
                           const std::vector<long long>& prior_support,
                           const EstimatorParams& par);

// Group-sparse solver over the level-1 grid with momentum acceleration and a
// split penalty (prior rows vs the rest), followed by correlation-ordered
// hierarchical refinement of the detected cells. `prior_coarse` holds level-1
// columns from the previous frame; empty means no prior (single penalty).
EstimateResult mfista_estimate(const Observation& obs, const DictionarySet& dict,
                               const std::vector<int>& prior_coarse,
                               const EstimatorParams& par);

// Oracle baseline: per-pilot LS on the true path angles. use_squint false
// evaluates the model at the carrier for every subcarrier (ablation).
EstimateResult genie_ls(const Observation& obs, const ChannelRealization& ch,
                        const SystemConfig& cfg, bool use_squint);

// Per-path refinement: recovers a unit-modulus phase generator z_l (hence a
// delay) and a reference gain from the per-pilot coefficient progression,
// giving a channel model valid on every subcarrier.
std::vector<PathEstimate> refine_paths(const std::vector<CVec>& q_pilot,
                                       const std::vector<SupportEntry>& support,
                                       const std::vector<int>& pilots,
                                       const SystemConfig& cfg,
                                       const EstimatorParams& par);

// --- frame-to-frame tracking ---------------------------------------------

enum class EstimatorKind {
  kTs,
  kTsNoRefine,
  kTsOraclePrior,  // previous support replaced by the true one
  kMFista,
  kMFistaNoPrior,
  kGsomp,          // ts_estimate with an always-empty prior
  kGenieLs,
  kGenieLsNoSquint,
};

const char* estimator_name(EstimatorKind kind);
bool estimator_from_name(const std::string& name, EstimatorKind* kind);

struct FrameOutcome {
  EstimateResult result;
  bool reset = false;
  double residual_power = 0.0;
  double reset_floor = 0.0;
};

// Carries the estimated support across frames and re-runs cold (empty prior)
// when the post-estimation residual exceeds the reset floor
// margin * expected combined-noise power (with a tiny signal-relative floor
// for noiseless runs). margin <= 0 forces a reset on every tracked frame.
class SupportTracker {
 public:
  SupportTracker(EstimatorKind kind, EstimatorParams par) : kind_(kind), par_(par) {}

  // `truth` is required by the genie and oracle-prior kinds.
  FrameOutcome step(const Observation& obs, const DictionarySet& dict,
                    const ChannelRealization* truth = nullptr);
  void reset_state();

 private:
  EstimatorKind kind_;
  EstimatorParams par_;
  bool have_prior_ = false;
  std::vector<long long> prior_fine_;
  std::vector<int> prior_coarse_;
};

}  // namespace subthz
