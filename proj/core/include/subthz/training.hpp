#pragma once

#include <vector>

#include "subthz/channel.hpp"
#include "subthz/rng.hpp"
#include "subthz/types.hpp"

// Pilot-stage measurement model. Per pilot subcarrier k the receiver sees
//   Y_k = W_k^H H_k X_k + W_k^H V_k,
// with constant-modulus random combiners W_k (N_r x Q_p) and precoders X_k
// (N_t x T_p), and V_k i.i.d. CN(0, sigma_n^2).
namespace subthz {

struct TrainingConfig {
  int q_p = 20;        // combining vectors per subcarrier
  int t_p = 20;        // training symbols per subcarrier
  int k_p = 5;         // pilot subcarriers
  bool hybrid = false; // assemble W_k from per-subframe analog blocks
  int n_rf_r = 1;      // rx RF chains (hybrid mode; must divide q_p)
  int n_rf_t = 1;      // tx RF chains (hybrid mode; must divide t_p)

  void validate() const;
};

// Comb P = {1 + (i-1)*delta_p}, delta_p = ceil(K_o / K_p); 1-based indices.
int pilot_spacing(int k_o, int k_p);
std::vector<int> pilot_comb(int k_o, int k_p);

struct BeamSet {
  std::vector<int> pilots;  // 1-based subcarrier indices
  std::vector<CMat> w;      // per pilot, N_r x Q_p
  std::vector<CMat> x;      // per pilot, N_t x T_p
};

// Draw constant-modulus beams, entries exp(j eta)/sqrt(N). Hybrid mode builds
// the same law from per-block analog stages with identity baseband, so the
// per-entry distribution is unchanged.
BeamSet random_beams(const SystemConfig& sys, const TrainingConfig& cfg, Rng& rng);

struct Observation {
  std::vector<int> pilots;
  std::vector<CMat> y;  // per pilot, Q_p x T_p
  BeamSet beams;
  double sigma_n2 = 0.0;
  double realized_snr_db = 0.0;
};

// Combined-noise power E||W^H V||_F^2 summed over pilots, given sigma_n^2 = 1.
double combined_noise_gain(const BeamSet& beams);

// sigma_n^2 achieving the target SNR for this realization and beam set:
//   SNR = sum_k ||W_k^H H_k X_k||_F^2 / (sigma_n^2 * sum_k T_p tr(W_k^H W_k)).
double calibrate_noise(double snr_db, const ChannelRealization& ch, const BeamSet& beams,
                       const SystemConfig& cfg);

// Synthesize pilot observations at the given noise level.
Observation observe(const ChannelRealization& ch, const BeamSet& beams,
                    const SystemConfig& cfg, double sigma_n2, Rng& rng);

}  // namespace subthz
