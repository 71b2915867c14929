#pragma once

#include <functional>
#include <vector>

#include "subthz/channel.hpp"
#include "subthz/estimators.hpp"
#include "subthz/types.hpp"

namespace subthz {

// NMSE over matched matrix lists: sum ||H - Hhat||_F^2 / sum ||H||_F^2.
double nmse(const std::vector<CMat>& h_true, const std::vector<CMat>& h_est);

// NMSE over the pilot subcarriers of one frame.
double nmse_pilots(const ChannelRealization& ch, const SystemConfig& cfg,
                   const EstimateResult& est, const std::vector<int>& pilots);

struct SeParams {
  int n_s = 4;           // spatial streams
  double p_t = 1.0;      // transmit power
  double sigma_n2 = 1e-2;
  double iota = 0.0;     // training-time fraction T_train / T_frame
};

// Effective spectral efficiency with eigen-beamforming derived from the
// estimated channel and applied to the true one. Data rate uses every
// subcarrier, the training-phase rate excludes pilots, and the two mix with
// weight iota. Result is bits/s/Hz per stream.
double spectral_efficiency(const std::function<CMat(int)>& h_true,
                           const std::function<CMat(int)>& h_est,
                           const SystemConfig& cfg, const std::vector<int>& pilots,
                           const SeParams& par);

}  // namespace subthz
