#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "subthz/io.hpp"

namespace fs = std::filesystem;
using namespace subthz;

namespace {

struct SpecOpts {
  std::string spec_path;
  bool paper = false;
  bool desk = false;
};

void add_spec_opts(CLI::App* cmd, SpecOpts* o) {
  cmd->add_option("--spec", o->spec_path, "configuration file (overrides the preset)")
      ->check(CLI::ExistingFile);
  CLI::Option* d = cmd->add_flag("--desk-scale", o->desk, "small preset (default)");
  CLI::Option* p = cmd->add_flag("--paper-scale", o->paper, "full-size preset");
  d->excludes(p);
  p->excludes(d);
}

ExperimentSpec resolve_spec(const SpecOpts& o) {
  ExperimentSpec spec = o.paper ? paper_scale_defaults() : desk_scale_defaults();
  if (!o.spec_path.empty()) spec = parse_spec_file(o.spec_path, std::move(spec));
  return spec;
}

void validate_all(const ExperimentSpec& spec) {
  spec.sys.validate();
  spec.train.validate();
  spec.grids.validate();
}

enum : std::uint64_t { kSeedChannel = 1, kSeedBeams = 2, kSeedNoise = 3 };

int cmd_simulate(const SpecOpts& opts, const std::string& out_dir, std::uint64_t seed,
                 int frames, double snr_db, bool have_snr) {
  ExperimentSpec spec = resolve_spec(opts);
  if (frames > 0) spec.frames = frames;
  if (have_snr) spec.base_snr_db = snr_db;
  spec.seed = seed;
  validate_all(spec);
  fs::create_directories(out_dir);

  std::vector<ChannelRealization> chans;
  std::vector<Observation> obses;
  for (int frame = 1; frame <= spec.frames; ++frame) {
    const std::uint64_t fr = std::uint64_t(frame);
    Rng ch_rng(derive_seed(seed, {kSeedChannel, 0, 0, fr}));
    ChannelRealization ch = frame == 1 ? draw_channel(spec.sys, spec.grids, ch_rng)
                                       : evolve_channel(chans.back(), spec.sys, spec.grids, ch_rng);
    Rng beam_rng(derive_seed(seed, {kSeedBeams, 0, 0, fr}));
    BeamSet beams = random_beams(spec.sys, spec.train, beam_rng);
    double sigma_n2 = calibrate_noise(spec.base_snr_db, ch, beams, spec.sys);
    Rng noise_rng(derive_seed(seed, {kSeedNoise, 0, 0, fr}));
    Observation obs = observe(ch, beams, spec.sys, sigma_n2, noise_rng);
    std::printf("frame %d: %zu paths, sigma_n^2 = %.3e, realized SNR = %.2f dB\n", frame,
                ch.paths.size(), obs.sigma_n2, obs.realized_snr_db);
    chans.push_back(std::move(ch));
    obses.push_back(std::move(obs));
  }

  save_channel_frames(out_dir + "/channel.json", spec.sys, spec.grids, chans, seed);
  save_observations(out_dir + "/observations.json", obses);
  write_spec_file(out_dir + "/config.spec", spec);
  std::printf("wrote %s/channel.json, observations.json, config.spec\n", out_dir.c_str());
  return 0;
}

int cmd_estimate(const SpecOpts& opts, const std::string& out_dir,
                 const std::string& channel_path, const std::string& obs_path,
                 std::vector<std::string> estimator_names, const std::string& records_out) {
  SystemConfig sys;
  GridSpec grids;
  std::uint64_t art_seed = 0;
  std::vector<ChannelRealization> chans =
      load_channel_frames(channel_path.empty() ? out_dir + "/channel.json" : channel_path, &sys,
                          &grids, &art_seed);
  std::vector<Observation> obses =
      load_observations(obs_path.empty() ? out_dir + "/observations.json" : obs_path);
  if (chans.size() != obses.size())
    throw std::invalid_argument("channel and observation artifacts have different frame counts");
  if (chans.empty()) throw std::invalid_argument("artifacts contain no frames");

  // Estimator parameters come from the preset/--spec; the system geometry
  // always comes from the artifacts.
  ExperimentSpec spec = resolve_spec(opts);
  std::vector<EstimatorKind> kinds;
  if (estimator_names.empty()) {
    kinds = spec.estimators;
  } else {
    for (const std::string& name : estimator_names) {
      EstimatorKind kind;
      if (!estimator_from_name(name, &kind))
        throw std::invalid_argument("unknown estimator: " + name);
      kinds.push_back(kind);
    }
  }
  EstimatorParams par = spec.est;
  if (par.l_cm < 0) par.l_cm = sys.n_common;

  std::vector<SupportTracker> trackers;
  for (EstimatorKind kind : kinds) trackers.emplace_back(kind, par);

  std::vector<MetricRecord> records;
  std::printf("%-16s %5s %12s %10s %6s\n", "estimator", "frame", "nmse", "time_s", "reset");
  for (std::size_t f = 0; f < chans.size(); ++f) {
    DictionarySet dict = build_dictionaries(sys, grids, obses[f].beams);
    for (std::size_t e = 0; e < kinds.size(); ++e) {
      auto start = std::chrono::steady_clock::now();
      FrameOutcome outcome = trackers[e].step(obses[f], dict, &chans[f]);
      double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      double err = nmse_pilots(chans[f], sys, outcome.result, obses[f].pilots);
      std::printf("%-16s %5zu %12.4e %10.3f %6s\n", estimator_name(kinds[e]), f + 1, err, dt,
                  outcome.reset ? "yes" : "no");
      MetricRecord rec;
      rec.estimator = estimator_name(kinds[e]);
      rec.axis = "frame";
      rec.axis_value = double(f + 1);
      rec.trial = 0;
      rec.frame = int(f + 1);
      rec.nmse = err;
      rec.runtime_s = dt;
      rec.resets = outcome.reset ? 1 : 0;
      rec.iterations = outcome.result.diag.somp_iterations + outcome.result.diag.fista_iterations;
      records.push_back(std::move(rec));
    }
  }
  if (!records_out.empty()) {
    write_records_csv(records_out, records);
    std::printf("wrote %s\n", records_out.c_str());
  }
  return 0;
}

int cmd_sweep(ExperimentSpec spec, const std::string& out_dir) {
  validate_all(spec);
  fs::create_directories(out_dir);
  std::vector<MetricRecord> records = run_experiment(spec);
  write_records_csv(out_dir + "/records.csv", records);
  std::vector<SummaryRow> rows = summarize(records);
  write_summary_csv(out_dir + "/summary.csv", rows);
  write_spec_file(out_dir + "/config.spec", spec);

  std::printf("%-16s %12s %10s %12s %12s\n", "estimator", axis_name(spec.axis), "n", "nmse_mean",
              "se_mean");
  for (const SummaryRow& r : rows)
    std::printf("%-16s %12g %10d %12.4e %12.4f\n", r.estimator.c_str(), r.axis_value, r.count,
                r.nmse_mean, r.se_mean);
  std::printf("wrote %s/records.csv, summary.csv, config.spec\n", out_dir.c_str());
  return 0;
}

int cmd_report(const std::string& out_dir, std::string records_path) {
  if (records_path.empty()) records_path = out_dir + "/records.csv";
  std::vector<MetricRecord> records = read_records_csv(records_path);
  fs::create_directories(out_dir);
  write_summary_csv(out_dir + "/summary.csv", summarize(records));
  write_sweep_plots(out_dir, records);
  std::printf("wrote %s/summary.csv and plots\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-varying dual-wideband sub-THz channel estimation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // accept --out-dir after the subcommand name too

  std::string out_dir = ".";
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();

  // simulate
  SpecOpts sim_opts;
  std::uint64_t sim_seed = 1;
  int sim_frames = 0;
  double sim_snr = 20.0;
  CLI::App* sim = app.add_subcommand("simulate", "draw channel frames and pilot observations");
  add_spec_opts(sim, &sim_opts);
  sim->add_option("--seed", sim_seed, "master seed")->capture_default_str();
  sim->add_option("--frames", sim_frames, "frames to draw (default from spec)");
  CLI::Option* snr_opt = sim->add_option("--snr-db", sim_snr, "pilot SNR in dB");

  // estimate
  SpecOpts est_opts;
  std::string est_channel, est_obs, est_records;
  std::vector<std::string> est_names;
  CLI::App* est = app.add_subcommand("estimate", "run estimators on saved artifacts");
  add_spec_opts(est, &est_opts);
  est->add_option("--channel", est_channel, "channel artifact (default <out-dir>/channel.json)");
  est->add_option("--observations", est_obs,
                  "observation artifact (default <out-dir>/observations.json)");
  est->add_option("--estimators", est_names, "estimators to run")->delimiter(',');
  est->add_option("--records", est_records, "also write a records CSV here");

  // sweep
  SpecOpts sweep_opts;
  std::string axis_str;
  std::vector<double> values_override;
  std::vector<std::string> sweep_names;
  int sweep_trials = 0, sweep_frames = 0, sweep_threads = 0;
  std::uint64_t sweep_seed = 0;
  bool sweep_se = false, sweep_timing = true;
  double sweep_snr = 0.0;
  CLI::App* sweep = app.add_subcommand("sweep", "run a full experiment sweep");
  add_spec_opts(sweep, &sweep_opts);
  CLI::Option* ax_opt = sweep->add_option("--axis", axis_str, "snr_db, k_p, m_p, or bandwidth");
  CLI::Option* val_opt = sweep->add_option("--values", values_override, "axis values")
                             ->delimiter(',');
  CLI::Option* est_opt = sweep->add_option("--estimators", sweep_names, "estimators to run")
                             ->delimiter(',');
  CLI::Option* tr_opt = sweep->add_option("--trials", sweep_trials, "trials per axis value");
  CLI::Option* fr_opt = sweep->add_option("--frames", sweep_frames, "frames per trial");
  CLI::Option* seed_opt = sweep->add_option("--seed", sweep_seed, "master seed");
  CLI::Option* th_opt = sweep->add_option("--threads", sweep_threads,
                                          "worker threads (0 = hardware)");
  CLI::Option* se_opt = sweep->add_flag("--compute-se", sweep_se, "also compute spectral efficiency");
  sweep->add_flag("--timing,!--no-timing", sweep_timing,
                  "record wall-clock runtimes (off for byte-stable output)");
  CLI::Option* bsnr_opt = sweep->add_option("--snr-db", sweep_snr, "base SNR when the axis is not snr_db");

  // report
  std::string report_records;
  CLI::App* report = app.add_subcommand("report", "summarize a records CSV and emit SVG plots");
  report->add_option("--records", report_records, "records CSV (default <out-dir>/records.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(sim_opts, out_dir, sim_seed, sim_frames, sim_snr, snr_opt->count() > 0);
    if (est->parsed())
      return cmd_estimate(est_opts, out_dir, est_channel, est_obs, est_names, est_records);
    if (sweep->parsed()) {
      ExperimentSpec spec = resolve_spec(sweep_opts);
      if (ax_opt->count() && !axis_from_name(axis_str, &spec.axis))
        throw std::invalid_argument("unknown sweep axis: " + axis_str);
      if (val_opt->count()) spec.values = values_override;
      if (est_opt->count()) {
        spec.estimators.clear();
        for (const std::string& name : sweep_names) {
          EstimatorKind kind;
          if (!estimator_from_name(name, &kind))
            throw std::invalid_argument("unknown estimator: " + name);
          spec.estimators.push_back(kind);
        }
      }
      if (tr_opt->count()) spec.trials = sweep_trials;
      if (fr_opt->count()) spec.frames = sweep_frames;
      if (seed_opt->count()) spec.seed = sweep_seed;
      if (th_opt->count()) spec.threads = sweep_threads;
      if (se_opt->count()) spec.compute_se = sweep_se;
      if (bsnr_opt->count()) spec.base_snr_db = sweep_snr;
      spec.timing = sweep_timing;
      return cmd_sweep(std::move(spec), out_dir);
    }
    if (report->parsed()) return cmd_report(out_dir, report_records);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
