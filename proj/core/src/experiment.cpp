#include "subthz/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace subthz {

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kSnrDb: return "snr_db";
    case SweepAxis::kPilotSubcarriers: return "k_p";
    case SweepAxis::kMeasurementRatio: return "m_p";
    case SweepAxis::kBandwidth: return "bandwidth";
  }
  return "unknown";
}

bool axis_from_name(const std::string& name, SweepAxis* axis) {
  static const std::pair<const char*, SweepAxis> table[] = {
      {"snr_db", SweepAxis::kSnrDb},
      {"k_p", SweepAxis::kPilotSubcarriers},
      {"m_p", SweepAxis::kMeasurementRatio},
      {"bandwidth", SweepAxis::kBandwidth},
  };
  for (const auto& [n, a] : table)
    if (name == n) {
      if (axis) *axis = a;
      return true;
    }
  return false;
}

namespace {

// Axis-adjusted copies of the configuration for one sweep point.
void apply_axis(SweepAxis axis, double value, SystemConfig* sys, TrainingConfig* train,
                double* snr_db) {
  switch (axis) {
    case SweepAxis::kSnrDb:
      *snr_db = value;
      break;
    case SweepAxis::kPilotSubcarriers:
      train->k_p = int(std::lround(value));
      break;
    case SweepAxis::kMeasurementRatio: {
      const double m = std::sqrt(value * double(sys->n_rx.count()) * sys->n_tx.count());
      train->q_p = std::max(1, int(std::lround(m)));
      train->t_p = train->q_p;
      break;
    }
    case SweepAxis::kBandwidth:
      sys->bandwidth = value;
      break;
  }
}

struct TaskResult {
  std::vector<MetricRecord> records;
};

// Seed stream purposes.
enum : std::uint64_t { kSeedChannel = 1, kSeedBeams = 2, kSeedNoise = 3 };

TaskResult run_task(const ExperimentSpec& spec, int axis_idx, int trial) {
  SystemConfig sys = spec.sys;
  TrainingConfig train = spec.train;
  double snr_db = spec.base_snr_db;
  apply_axis(spec.axis, spec.values[std::size_t(axis_idx)], &sys, &train, &snr_db);
  sys.validate();
  train.validate();

  TaskResult out;
  const std::uint64_t ax = std::uint64_t(axis_idx);
  const std::uint64_t tr = std::uint64_t(trial);

  std::vector<SupportTracker> trackers;
  trackers.reserve(spec.estimators.size());
  for (EstimatorKind kind : spec.estimators) trackers.emplace_back(kind, spec.est);

  ChannelRealization ch;
  for (int frame = 1; frame <= spec.frames; ++frame) {
    const std::uint64_t fr = std::uint64_t(frame);
    Rng ch_rng(derive_seed(spec.seed, {kSeedChannel, ax, tr, fr}));
    ch = frame == 1 ? draw_channel(sys, spec.grids, ch_rng)
                    : evolve_channel(ch, sys, spec.grids, ch_rng);

    Rng beam_rng(derive_seed(spec.seed, {kSeedBeams, ax, tr, fr}));
    const BeamSet beams = random_beams(sys, train, beam_rng);
    const double sigma_n2 = calibrate_noise(snr_db, ch, beams, sys);
    Rng noise_rng(derive_seed(spec.seed, {kSeedNoise, ax, tr, fr}));
    const Observation obs = observe(ch, beams, sys, sigma_n2, noise_rng);
    const DictionarySet dict = build_dictionaries(sys, spec.grids, beams);

    for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
      MetricRecord rec;
      rec.estimator = estimator_name(spec.estimators[e]);
      rec.axis = axis_name(spec.axis);
      rec.axis_value = spec.values[std::size_t(axis_idx)];
      rec.trial = trial;
      rec.frame = frame;

      const auto start = std::chrono::steady_clock::now();
      const FrameOutcome outcome = trackers[e].step(obs, dict, &ch);
      if (spec.timing) {
        rec.runtime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
      }
      rec.nmse = nmse_pilots(ch, sys, outcome.result, obs.pilots);
      if (spec.compute_se) {
        SeParams se = spec.se;
        se.sigma_n2 = sigma_n2;
        se.iota = std::min(1.0, double(train.t_p) * sys.subframe_duration /
                                    sys.frame_duration);
        const EstimateResult& res = outcome.result;
        rec.se = spectral_efficiency(
            [&](int k) { return channel_matrix(ch, k, sys); },
            [&](int k) { return res.channel_estimate(k); }, sys, obs.pilots, se);
      }
      rec.resets = outcome.reset ? 1 : 0;
      rec.iterations = outcome.result.diag.somp_iterations +
                       outcome.result.diag.fista_iterations;
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace

std::vector<MetricRecord> run_experiment(const ExperimentSpec& spec) {
  if (spec.values.empty()) throw std::invalid_argument("run_experiment: no axis values");
  if (spec.trials < 1 || spec.frames < 1)
    throw std::invalid_argument("run_experiment: trials and frames must be >= 1");
  if (spec.estimators.empty())
    throw std::invalid_argument("run_experiment: no estimators requested");

  const int n_tasks = int(spec.values.size()) * spec.trials;
  std::vector<TaskResult> results(static_cast<std::size_t>(n_tasks));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  const auto worker = [&] {
    for (;;) {
      const int idx = next.fetch_add(1);
      if (idx >= n_tasks || failed.load()) break;
      const int axis_idx = idx / spec.trials;
      const int trial = idx % spec.trials;
      try {
        results[std::size_t(idx)] = run_task(spec, axis_idx, trial);
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(error_mutex);
        failed.store(true);
        if (error_message.empty())
          error_message = std::string("task (axis ") + std::to_string(axis_idx) +
                          ", trial " + std::to_string(trial) + "): " + ex.what();
      }
    }
  };

  int n_threads = spec.threads;
  if (n_threads <= 0) n_threads = int(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, n_tasks));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failed.load()) throw std::runtime_error("run_experiment: " + error_message);

  std::vector<MetricRecord> records;
  for (TaskResult& r : results)
    for (MetricRecord& m : r.records) records.push_back(std::move(m));
  std::stable_sort(records.begin(), records.end(),
                   [](const MetricRecord& a, const MetricRecord& b) {
                     if (a.estimator != b.estimator) return a.estimator < b.estimator;
                     if (a.axis_value != b.axis_value) return a.axis_value < b.axis_value;
                     if (a.trial != b.trial) return a.trial < b.trial;
                     return a.frame < b.frame;
                   });
  return records;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_records_csv(const std::string& path, const std::vector<MetricRecord>& records) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_records_csv: cannot open " + path);
  f << "estimator,axis,axis_value,trial,frame,nmse,se,runtime_s,resets,iterations\n";
  for (const MetricRecord& r : records) {
    f << r.estimator << ',' << r.axis << ',' << format_double(r.axis_value) << ','
      << r.trial << ',' << r.frame << ',' << format_double(r.nmse) << ','
      << format_double(r.se) << ',' << format_double(r.runtime_s) << ',' << r.resets
      << ',' << r.iterations << '\n';
  }
}

std::vector<MetricRecord> read_records_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_records_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("read_records_csv: empty file");
  std::vector<MetricRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    MetricRecord r;
    std::getline(ss, r.estimator, ',');
    std::getline(ss, r.axis, ',');
    std::getline(ss, field, ',');
    r.axis_value = std::stod(field);
    std::getline(ss, field, ',');
    r.trial = std::stoi(field);
    std::getline(ss, field, ',');
    r.frame = std::stoi(field);
    std::getline(ss, field, ',');
    r.nmse = std::stod(field);
    std::getline(ss, field, ',');
    r.se = std::stod(field);
    std::getline(ss, field, ',');
    r.runtime_s = std::stod(field);
    std::getline(ss, field, ',');
    r.resets = std::stoi(field);
    std::getline(ss, field, ',');
    r.iterations = std::stoi(field);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<MetricRecord>& records) {
  std::map<std::pair<std::string, double>, std::vector<const MetricRecord*>> groups;
  for (const MetricRecord& r : records)
    groups[{r.estimator, r.axis_value}].push_back(&r);
  std::vector<SummaryRow> rows;
  for (const auto& [key, items] : groups) {
    SummaryRow row;
    row.estimator = key.first;
    row.axis_value = key.second;
    row.count = int(items.size());
    double sum = 0.0, sum2 = 0.0, se = 0.0, rt = 0.0;
    for (const MetricRecord* r : items) {
      sum += r->nmse;
      sum2 += r->nmse * r->nmse;
      se += r->se;
      rt += r->runtime_s;
      row.resets += r->resets;
    }
    const double n = double(items.size());
    row.nmse_mean = sum / n;
    row.nmse_std = std::sqrt(std::max(0.0, sum2 / n - row.nmse_mean * row.nmse_mean));
    row.se_mean = se / n;
    row.runtime_mean = rt / n;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_summary_csv: cannot open " + path);
  f << "estimator,axis_value,count,nmse_mean,nmse_std,se_mean,runtime_mean,resets\n";
  for (const SummaryRow& r : rows) {
    f << r.estimator << ',' << format_double(r.axis_value) << ',' << r.count << ','
      << format_double(r.nmse_mean) << ',' << format_double(r.nmse_std) << ','
      << format_double(r.se_mean) << ',' << format_double(r.runtime_mean) << ','
      << r.resets << '\n';
  }
}

}  // namespace subthz
