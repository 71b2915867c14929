#include "subthz/training.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace subthz {

void TrainingConfig::validate() const {
  if (q_p < 1 || t_p < 1) throw std::invalid_argument("training: Q_p, T_p must be >= 1");
  if (k_p < 1) throw std::invalid_argument("training: K_p must be >= 1");
  if (hybrid) {
    if (n_rf_r < 1 || n_rf_t < 1)
      throw std::invalid_argument("training: RF chain counts must be >= 1");
    if (q_p % n_rf_r != 0)
      throw std::invalid_argument("training: hybrid mode needs N_rf_r | Q_p");
    if (t_p % n_rf_t != 0)
      throw std::invalid_argument("training: hybrid mode needs N_rf_t | T_p");
  }
}

int pilot_spacing(int k_o, int k_p) {
  if (k_p < 1 || k_p > k_o) throw std::invalid_argument("pilot_spacing: need 1 <= K_p <= K_o");
  return (k_o + k_p - 1) / k_p;
}

std::vector<int> pilot_comb(int k_o, int k_p) {
  const int dp = pilot_spacing(k_o, k_p);
  std::vector<int> pilots(k_p);
  for (int i = 0; i < k_p; ++i) {
    pilots[i] = 1 + i * dp;
    if (pilots[i] > k_o) throw std::invalid_argument("pilot_comb: comb exceeds K_o");
  }
  return pilots;
}

namespace {

CMat constant_modulus(int rows, int cols, Rng& rng) {
  const double scale = 1.0 / std::sqrt(double(rows));
  CMat m(rows, cols);
  // Column-major fill order fixes the draw sequence.
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = std::polar(scale, rng.phase());
  return m;
}

CMat draw_stage(int rows, int cols, bool hybrid, int n_rf, Rng& rng) {
  if (!hybrid) return constant_modulus(rows, cols, rng);
  // One analog block of n_rf vectors per subframe, identity baseband: the
  // assembled matrix is a concatenation of blocks with the same entry law.
  CMat m(rows, cols);
  for (int b = 0; b < cols / n_rf; ++b)
    m.middleCols(b * n_rf, n_rf) = constant_modulus(rows, n_rf, rng);
  return m;
}

}  // namespace

BeamSet random_beams(const SystemConfig& sys, const TrainingConfig& cfg, Rng& rng) {
  cfg.validate();
  BeamSet beams;
  beams.pilots = pilot_comb(sys.n_subcarriers, cfg.k_p);
  beams.w.reserve(cfg.k_p);
  beams.x.reserve(cfg.k_p);
  for (int i = 0; i < cfg.k_p; ++i) {
    beams.w.push_back(draw_stage(sys.n_rx.count(), cfg.q_p, cfg.hybrid, cfg.n_rf_r, rng));
    beams.x.push_back(draw_stage(sys.n_tx.count(), cfg.t_p, cfg.hybrid, cfg.n_rf_t, rng));
  }
  return beams;
}

double combined_noise_gain(const BeamSet& beams) {
  double g = 0.0;
  for (std::size_t i = 0; i < beams.w.size(); ++i)
    g += double(beams.x[i].cols()) * (beams.w[i].adjoint() * beams.w[i]).trace().real();
  return g;
}

double calibrate_noise(double snr_db, const ChannelRealization& ch, const BeamSet& beams,
                       const SystemConfig& cfg) {
  double signal = 0.0;
  for (std::size_t i = 0; i < beams.pilots.size(); ++i) {
    const CMat h = channel_matrix(ch, beams.pilots[i], cfg);
    signal += (beams.w[i].adjoint() * h * beams.x[i]).squaredNorm();
  }
  if (signal <= 0.0)
    throw std::invalid_argument("calibrate_noise: zero received signal power");
  const double snr = std::pow(10.0, snr_db / 10.0);
  return signal / (snr * combined_noise_gain(beams));
}

Observation observe(const ChannelRealization& ch, const BeamSet& beams,
                    const SystemConfig& cfg, double sigma_n2, Rng& rng) {
  if (sigma_n2 < 0.0) throw std::invalid_argument("observe: negative noise variance");
  Observation obs;
  obs.pilots = beams.pilots;
  obs.beams = beams;
  obs.sigma_n2 = sigma_n2;
  double signal = 0.0;
  for (std::size_t i = 0; i < beams.pilots.size(); ++i) {
    const CMat h = channel_matrix(ch, beams.pilots[i], cfg);
    CMat y = beams.w[i].adjoint() * h * beams.x[i];
    signal += y.squaredNorm();
    if (sigma_n2 > 0.0) {
      CMat v(h.rows(), beams.x[i].cols());
      for (Eigen::Index c = 0; c < v.cols(); ++c)
        for (Eigen::Index r = 0; r < v.rows(); ++r) v(r, c) = rng.cnormal(sigma_n2);
      y.noalias() += beams.w[i].adjoint() * v;
    }
    obs.y.push_back(std::move(y));
  }
  obs.realized_snr_db =
      sigma_n2 > 0.0 && signal > 0.0
          ? 10.0 * std::log10(signal / (sigma_n2 * combined_noise_gain(beams)))
          : std::numeric_limits<double>::infinity();
  return obs;
}

}  // namespace subthz
