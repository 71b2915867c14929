#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subthz/estimators.hpp"
#include "subthz/metrics.hpp"
#include "subthz/training.hpp"

// Seeded sweep driver. One axis varies per sweep; every (axis value, trial)
// pair runs a short frame sequence through each requested estimator over the
// same channel and noise realizations, so per-trial comparisons are paired.
namespace subthz {

enum class SweepAxis {
  kSnrDb,             // target SNR per frame
  kPilotSubcarriers,  // K_p
  kMeasurementRatio,  // Q_p = T_p = round(sqrt(value * N_r * N_t))
  kBandwidth,         // B (Hz)
};

const char* axis_name(SweepAxis axis);
bool axis_from_name(const std::string& name, SweepAxis* axis);

struct ExperimentSpec {
  SystemConfig sys;
  TrainingConfig train;
  EstimatorParams est;
  GridSpec grids;
  SweepAxis axis = SweepAxis::kSnrDb;
  std::vector<double> values{20.0};
  int trials = 10;
  int frames = 2;  // frames per trial (frame 1 always runs cold)
  std::vector<EstimatorKind> estimators{EstimatorKind::kTs};
  std::uint64_t seed = 1;
  double base_snr_db = 20.0;  // used when the axis is not SNR
  bool compute_se = false;
  SeParams se;
  bool timing = true;  // false pins runtime_s to zero for reproducible output
  int threads = 1;     // worker threads over (axis, trial) tasks; <=0 -> hardware
};

struct MetricRecord {
  std::string estimator;
  std::string axis;
  double axis_value = 0.0;
  int trial = 0;
  int frame = 0;  // 1-based
  double nmse = 0.0;
  double se = 0.0;
  double runtime_s = 0.0;
  int resets = 0;
  int iterations = 0;
};

// Runs the sweep; records are sorted by (estimator, axis value, trial, frame)
// so output does not depend on scheduling.
std::vector<MetricRecord> run_experiment(const ExperimentSpec& spec);

// Fixed-schema CSV: estimator,axis,axis_value,trial,frame,nmse,se,runtime_s,resets,iterations
void write_records_csv(const std::string& path, const std::vector<MetricRecord>& records);
std::vector<MetricRecord> read_records_csv(const std::string& path);

struct SummaryRow {
  std::string estimator;
  double axis_value = 0.0;
  int count = 0;
  double nmse_mean = 0.0, nmse_std = 0.0;
  double se_mean = 0.0;
  double runtime_mean = 0.0;
  int resets = 0;
};

// Per (estimator, axis value) aggregate over trials and frames.
std::vector<SummaryRow> summarize(const std::vector<MetricRecord>& records);
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

}  // namespace subthz
