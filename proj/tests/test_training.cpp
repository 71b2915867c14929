#include <cmath>

#include "doctest.h"
#include "subthz/training.hpp"

using namespace subthz;

namespace {

SystemConfig tiny_sys() {
  SystemConfig cfg;
  cfg.n_rx = {2, 2};
  cfg.n_tx = {1, 2};
  cfg.n_subcarriers = 32;
  cfg.n_paths = 2;
  cfg.n_common = 1;
  return cfg;
}

TrainingConfig tiny_train() {
  TrainingConfig t;
  t.q_p = 6;
  t.t_p = 4;
  t.k_p = 4;
  return t;
}

ChannelRealization fixed_channel() {
  ChannelRealization ch;
  ChannelPath p;
  p.alpha_ref = {0.9, -0.2};
  p.tau = 0.6e-9;
  p.angles = {0.15, -0.1, 0.25, -0.35};
  ch.paths = {p};
  return ch;
}

}  // namespace

TEST_SUITE_BEGIN("training");

TEST_CASE("pilot comb spacing and coverage") {
  CHECK(pilot_spacing(128, 5) == 26);
  const std::vector<int> comb = pilot_comb(128, 5);
  REQUIRE(comb.size() == 5);
  CHECK(comb == std::vector<int>{1, 27, 53, 79, 105});
  for (int k : comb) {
    CHECK(k >= 1);
    CHECK(k <= 128);
  }
  // K_p = 1 keeps only the first subcarrier.
  CHECK(pilot_comb(64, 1) == std::vector<int>{1});
  // Exact division.
  CHECK(pilot_comb(8, 4) == std::vector<int>{1, 3, 5, 7});
}

TEST_CASE("training beams are constant-modulus with per-element power 1/N") {
  const SystemConfig sys = tiny_sys();
  const TrainingConfig train = tiny_train();
  Rng rng(51);
  const BeamSet beams = random_beams(sys, train, rng);
  REQUIRE(beams.pilots.size() == 4);
  REQUIRE(beams.w.size() == 4);
  REQUIRE(beams.x.size() == 4);
  for (std::size_t i = 0; i < beams.w.size(); ++i) {
    REQUIRE(beams.w[i].rows() == sys.n_rx.count());
    REQUIRE(beams.w[i].cols() == train.q_p);
    REQUIRE(beams.x[i].rows() == sys.n_tx.count());
    REQUIRE(beams.x[i].cols() == train.t_p);
    for (Eigen::Index c = 0; c < beams.w[i].cols(); ++c)
      for (Eigen::Index r = 0; r < beams.w[i].rows(); ++r)
        CHECK(std::abs(beams.w[i](r, c)) ==
              doctest::Approx(1.0 / std::sqrt(double(sys.n_rx.count()))).epsilon(1e-12));
    for (Eigen::Index c = 0; c < beams.x[i].cols(); ++c)
      for (Eigen::Index r = 0; r < beams.x[i].rows(); ++r)
        CHECK(std::abs(beams.x[i](r, c)) ==
              doctest::Approx(1.0 / std::sqrt(double(sys.n_tx.count()))).epsilon(1e-12));
  }
}

TEST_CASE("hybrid beams keep the same per-entry law and shapes") {
  const SystemConfig sys = tiny_sys();
  TrainingConfig train = tiny_train();
  train.hybrid = true;
  train.n_rf_r = 2;  // 3 analog blocks of 2 combining vectors
  train.n_rf_t = 2;
  Rng rng(52);
  const BeamSet beams = random_beams(sys, train, rng);
  for (std::size_t i = 0; i < beams.w.size(); ++i) {
    REQUIRE(beams.w[i].cols() == train.q_p);
    for (Eigen::Index c = 0; c < beams.w[i].cols(); ++c)
      for (Eigen::Index r = 0; r < beams.w[i].rows(); ++r)
        CHECK(std::abs(beams.w[i](r, c)) ==
              doctest::Approx(1.0 / std::sqrt(double(sys.n_rx.count()))).epsilon(1e-12));
  }
}

TEST_CASE("hybrid mode validates the RF chain split") {
  TrainingConfig train = tiny_train();
  train.hybrid = true;
  train.n_rf_r = 5;  // does not divide q_p = 6
  CHECK_THROWS_AS(train.validate(), std::invalid_argument);
}

TEST_CASE("noiseless observations equal the combined channel exactly") {
  const SystemConfig sys = tiny_sys();
  const TrainingConfig train = tiny_train();
  const ChannelRealization ch = fixed_channel();
  Rng rng(53);
  const BeamSet beams = random_beams(sys, train, rng);
  Rng noise(54);
  const Observation obs = observe(ch, beams, sys, 0.0, noise);
  REQUIRE(obs.y.size() == beams.pilots.size());
  for (std::size_t i = 0; i < obs.y.size(); ++i) {
    const CMat h = channel_matrix(ch, beams.pilots[i], sys);
    const CMat want = beams.w[i].adjoint() * h * beams.x[i];
    CHECK((obs.y[i] - want).norm() < 1e-12 * want.norm());
  }
}

TEST_CASE("combined noise matches its expected power") {
  const SystemConfig sys = tiny_sys();
  const TrainingConfig train = tiny_train();
  const ChannelRealization ch = fixed_channel();
  Rng rng(55);
  const BeamSet beams = random_beams(sys, train, rng);

  // Constant-modulus columns have unit norm, so tr(W^H W) = Q_p exactly.
  const double gain = combined_noise_gain(beams);
  CHECK(gain == doctest::Approx(double(train.k_p) * train.t_p * train.q_p).epsilon(1e-9));

  const double sigma_n2 = 0.3;
  double acc = 0.0;
  const int draws = 400;
  for (int d = 0; d < draws; ++d) {
    Rng noise(1000 + std::uint64_t(d));
    const Observation obs = observe(ch, beams, sys, sigma_n2, noise);
    for (std::size_t i = 0; i < obs.y.size(); ++i) {
      const CMat h = channel_matrix(ch, beams.pilots[i], sys);
      const CMat clean = beams.w[i].adjoint() * h * beams.x[i];
      acc += (obs.y[i] - clean).squaredNorm();
    }
  }
  const double mean_noise = acc / draws;
  const double want = sigma_n2 * gain;
  // Chi-square concentration: relative sigma ~ sqrt(2 / (draws * dof)).
  const double dof = double(train.k_p) * train.q_p * train.t_p;
  CHECK(std::abs(mean_noise - want) < 4.0 * want * std::sqrt(2.0 / (draws * dof)));
}

TEST_CASE("noise calibration hits the target SNR by construction") {
  const SystemConfig sys = tiny_sys();
  const TrainingConfig train = tiny_train();
  const ChannelRealization ch = fixed_channel();
  Rng rng(56);
  const BeamSet beams = random_beams(sys, train, rng);
  for (double snr_db : {-10.0, 0.0, 17.5}) {
    const double sigma_n2 = calibrate_noise(snr_db, ch, beams, sys);
    REQUIRE(sigma_n2 > 0.0);
    double signal = 0.0;
    for (std::size_t i = 0; i < beams.pilots.size(); ++i) {
      const CMat h = channel_matrix(ch, beams.pilots[i], sys);
      signal += (beams.w[i].adjoint() * h * beams.x[i]).squaredNorm();
    }
    const double snr = signal / (sigma_n2 * combined_noise_gain(beams));
    CHECK(10.0 * std::log10(snr) == doctest::Approx(snr_db).epsilon(1e-9));
  }
}

TEST_CASE("observe reports the realized SNR it was calibrated for") {
  const SystemConfig sys = tiny_sys();
  const TrainingConfig train = tiny_train();
  const ChannelRealization ch = fixed_channel();
  Rng rng(57);
  const BeamSet beams = random_beams(sys, train, rng);
  const double sigma_n2 = calibrate_noise(5.0, ch, beams, sys);
  Rng noise(58);
  const Observation obs = observe(ch, beams, sys, sigma_n2, noise);
  CHECK(obs.sigma_n2 == doctest::Approx(sigma_n2));
  CHECK(obs.realized_snr_db == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_SUITE_END();
