#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "subthz/channel.hpp"
#include "subthz/io.hpp"
#include "subthz/rng.hpp"
#include "subthz/training.hpp"

using namespace subthz;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("presets validate and pin the headline dimensions") {
  const ExperimentSpec desk = desk_scale_defaults();
  desk.sys.validate();
  desk.train.validate();
  CHECK(desk.sys.n_subcarriers == 128);
  CHECK(desk.sys.n_rx.count() == 64);
  CHECK(desk.sys.n_tx.count() == 16);
  CHECK(desk.grids.levels == 2);

  const ExperimentSpec paper = paper_scale_defaults();
  paper.sys.validate();
  paper.train.validate();
  CHECK(paper.sys.bandwidth == doctest::Approx(8e9));
  CHECK(paper.sys.n_subcarriers == 1024);
  CHECK(paper.sys.n_rx.count() == 256);
  CHECK(paper.sys.n_tx.count() == 16);
  CHECK(paper.train.q_p == 25);
  CHECK(paper.train.t_p == 25);
  CHECK(paper.train.k_p == 10);
  CHECK(paper.grids.levels == 3);
}

TEST_CASE("spec files survive a write/parse round trip") {
  ExperimentSpec spec = desk_scale_defaults();
  spec.sys.f_c = 105e9;
  spec.sys.bandwidth = 2.5e9;
  spec.sys.n_paths = 4;
  spec.sys.n_common = 2;
  spec.sys.on_grid = true;
  spec.train.k_p = 7;
  spec.train.hybrid = true;
  spec.train.n_rf_r = 5;
  spec.train.n_rf_t = 3;
  spec.est.lambda_scale = 0.42;
  spec.est.refine = false;
  spec.est.reset_margin = 7.5;
  spec.axis = SweepAxis::kBandwidth;
  spec.values = {1e9, 2e9, 4e9};
  spec.trials = 9;
  spec.frames = 3;
  spec.seed = 12345;
  spec.base_snr_db = 12.5;
  spec.estimators = {EstimatorKind::kMFista, EstimatorKind::kGenieLs};

  TempFile tmp("spec_roundtrip_tmp.spec");
  write_spec_file(tmp.path, spec);
  const ExperimentSpec back = parse_spec_file(tmp.path, desk_scale_defaults());

  CHECK(config_hash(back.sys, back.grids) == config_hash(spec.sys, spec.grids));
  CHECK(back.train.q_p == spec.train.q_p);
  CHECK(back.train.k_p == 7);
  CHECK(back.train.hybrid);
  CHECK(back.train.n_rf_r == 5);
  CHECK(back.train.n_rf_t == 3);
  CHECK(back.est.lambda_scale == doctest::Approx(0.42));
  CHECK_FALSE(back.est.refine);
  CHECK(back.est.reset_margin == doctest::Approx(7.5));
  CHECK(back.axis == SweepAxis::kBandwidth);
  REQUIRE(back.values.size() == 3);
  CHECK(back.values[1] == doctest::Approx(2e9));
  CHECK(back.trials == 9);
  CHECK(back.frames == 3);
  CHECK(back.seed == 12345);
  CHECK(back.base_snr_db == doctest::Approx(12.5));
  REQUIRE(back.estimators.size() == 2);
  CHECK(back.estimators[0] == EstimatorKind::kMFista);
  CHECK(back.estimators[1] == EstimatorKind::kGenieLs);
}

TEST_CASE("spec parser applies overrides and reports bad input with location") {
  TempFile tmp("spec_override_tmp.spec");
  spit(tmp.path,
       "# comment line\n"
       "K_o = 64\n"
       "N_r = 2x4\n"
       "\n"
       "[sweep]\n"
       "values = -5, 0, 5\n"
       "estimators = ts, gsomp\n");
  const ExperimentSpec spec = parse_spec_file(tmp.path, desk_scale_defaults());
  CHECK(spec.sys.n_subcarriers == 64);
  CHECK(spec.sys.n_rx.v == 2);
  CHECK(spec.sys.n_rx.h == 4);
  REQUIRE(spec.values.size() == 3);
  CHECK(spec.values[0] == doctest::Approx(-5.0));
  REQUIRE(spec.estimators.size() == 2);
  CHECK(spec.estimators[1] == EstimatorKind::kGsomp);

  SUBCASE("unknown key") {
    spit(tmp.path, "K_o = 64\nvoltage = 9\n");
    bool threw = false;
    try {
      parse_spec_file(tmp.path, desk_scale_defaults());
    } catch (const std::invalid_argument& e) {
      threw = true;
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    CHECK(threw);
  }
  SUBCASE("malformed dims") {
    spit(tmp.path, "N_r = 4by4\n");
    CHECK_THROWS_AS(parse_spec_file(tmp.path, desk_scale_defaults()), std::invalid_argument);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(parse_spec_file("no_such_file.spec", desk_scale_defaults()),
                    std::invalid_argument);
  }
}

TEST_CASE("config_hash tracks every geometry field it guards") {
  const ExperimentSpec base = desk_scale_defaults();
  const std::uint64_t h0 = config_hash(base.sys, base.grids);
  CHECK(h0 == config_hash(base.sys, base.grids));

  ExperimentSpec mod = base;
  mod.sys.f_c += 1.0;
  CHECK(config_hash(mod.sys, mod.grids) != h0);
  mod = base;
  mod.grids.g_sub_r += 1;
  CHECK(config_hash(mod.sys, mod.grids) != h0);
  mod = base;
  mod.sys.on_grid = !mod.sys.on_grid;
  CHECK(config_hash(mod.sys, mod.grids) != h0);
}

TEST_CASE("channel artifacts round-trip bit-exactly and verify their hash") {
  ExperimentSpec spec = desk_scale_defaults();
  spec.sys.n_paths = 3;
  spec.sys.n_common = 2;
  Rng rng(41);
  std::vector<ChannelRealization> frames;
  frames.push_back(draw_channel(spec.sys, spec.grids, rng));
  frames.push_back(evolve_channel(frames.back(), spec.sys, spec.grids, rng));

  TempFile tmp("channel_roundtrip_tmp.json");
  save_channel_frames(tmp.path, spec.sys, spec.grids, frames, 998877);

  SystemConfig sys2;
  GridSpec grids2;
  std::uint64_t seed2 = 0;
  const std::vector<ChannelRealization> back =
      load_channel_frames(tmp.path, &sys2, &grids2, &seed2);
  CHECK(seed2 == 998877);
  CHECK(config_hash(sys2, grids2) == config_hash(spec.sys, spec.grids));
  REQUIRE(back.size() == frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    REQUIRE(back[f].paths.size() == frames[f].paths.size());
    CHECK(back[f].grids == &grids2);
    for (std::size_t l = 0; l < frames[f].paths.size(); ++l) {
      const ChannelPath& a = frames[f].paths[l];
      const ChannelPath& b = back[f].paths[l];
      CHECK(a.alpha_ref == b.alpha_ref);
      CHECK(a.tau == b.tau);
      CHECK(a.angles.aoa_h == b.angles.aoa_h);
      CHECK(a.angles.aoa_v == b.angles.aoa_v);
      CHECK(a.angles.aod_h == b.angles.aod_h);
      CHECK(a.angles.aod_v == b.angles.aod_v);
      CHECK(a.physical.has_value() == b.physical.has_value());
    }
    CHECK(back[f].support == frames[f].support);
  }

  SUBCASE("tampered geometry fails the hash check") {
    std::string text = slurp(tmp.path);
    const std::string needle = "\"L\": 3";
    const std::size_t at = text.find(needle);
    REQUIRE(at != std::string::npos);
    text.replace(at, needle.size(), "\"L\": 4");
    spit(tmp.path, text);
    SystemConfig s;
    GridSpec g;
    CHECK_THROWS_AS(load_channel_frames(tmp.path, &s, &g), std::invalid_argument);
  }
}

TEST_CASE("observation artifacts round-trip bit-exactly") {
  ExperimentSpec spec = desk_scale_defaults();
  spec.sys.n_paths = 2;
  spec.sys.n_common = 1;
  Rng rng(42);
  const ChannelRealization ch = draw_channel(spec.sys, spec.grids, rng);
  const BeamSet beams = random_beams(spec.sys, spec.train, rng);
  Rng noise(43);
  std::vector<Observation> frames{observe(ch, beams, spec.sys, 1e-3, noise)};

  TempFile tmp("obs_roundtrip_tmp.json");
  save_observations(tmp.path, frames);
  const std::vector<Observation> back = load_observations(tmp.path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].pilots == frames[0].pilots);
  CHECK(back[0].sigma_n2 == frames[0].sigma_n2);
  CHECK(back[0].realized_snr_db == frames[0].realized_snr_db);
  REQUIRE(back[0].y.size() == frames[0].y.size());
  for (std::size_t p = 0; p < frames[0].y.size(); ++p) {
    CHECK(back[0].y[p] == frames[0].y[p]);
    CHECK(back[0].beams.w[p] == frames[0].beams.w[p]);
    CHECK(back[0].beams.x[p] == frames[0].beams.x[p]);
  }
  CHECK(back[0].beams.pilots == frames[0].pilots);
}

TEST_CASE("sweep plots emit SVG files for the recorded metrics") {
  std::vector<MetricRecord> records;
  for (const char* est : {"ts", "gsomp"}) {
    for (double v : {0.0, 10.0, 20.0}) {
      for (int trial = 1; trial <= 2; ++trial) {
        MetricRecord r;
        r.estimator = est;
        r.axis = "snr_db";
        r.axis_value = v;
        r.trial = trial;
        r.frame = 1;
        r.nmse = std::pow(10.0, -v / 10.0) * (est[0] == 't' ? 0.5 : 1.0) * trial;
        r.se = 10.0 + v / 10.0;
        r.runtime_s = 0.01;
        records.push_back(r);
      }
    }
  }
  write_sweep_plots(".", records);
  TempFile nmse_svg("nmse.svg");
  TempFile se_svg("se.svg");
  TempFile rt_svg("runtime.svg");
  const std::string nmse_text = slurp(nmse_svg.path);
  CHECK(nmse_text.find("<svg") != std::string::npos);
  CHECK(nmse_text.find("ts") != std::string::npos);
  CHECK(nmse_text.find("gsomp") != std::string::npos);
  CHECK(slurp(se_svg.path).find("<svg") != std::string::npos);
  CHECK(slurp(rt_svg.path).find("<svg") != std::string::npos);
}

TEST_SUITE_END();
