#pragma once

#include <vector>

#include "subthz/codebook.hpp"
#include "subthz/training.hpp"
#include "subthz/types.hpp"

// Beamspace sensing model. Vectorizing Y_k column-major gives
//   y_k = Theta_k z_k + noise,  Theta_k = (A_T,k^H X_k)^T kron (A_R,k^H W_k)^H,
// whose column for the (i_r, i_t) grid pair is indexed j = i_t * G_r + i_r.
// Only the level-1 dictionary is ever materialized; finer-grid columns are
// produced on demand from their angle tuples.
namespace subthz {

struct DictionarySet {
  const SystemConfig* cfg = nullptr;
  GridSpec grids;
  BeamSet beams;               // copies of the pilot beams
  std::vector<CMat> theta1;    // per pilot: Q_p*T_p x (coarse_cols_t * coarse_cols_r)
  bool squint = true;          // false -> carrier-frequency steering for every k
  // Lazily computed max over pilots of ||theta1||_2^2 (gradient step bound).
  mutable double step_norm2 = -1.0;

  int n_pilots() const { return int(beams.pilots.size()); }
  // Equivalent column for an arbitrary angle tuple at pilot position p.
  CVec column(int pilot_pos, const AngleTuple& t) const;
  // Matrix of columns for a support set (order preserved).
  CMat columns(int pilot_pos, const std::vector<AngleTuple>& ts) const;
  // Fine-grid column by flat index.
  CVec fine_column(int pilot_pos, long long j) const;
};

// Build per-pilot level-1 dictionaries. With use_squint false the array
// responses are evaluated at the carrier for every subcarrier (squint
// deliberately ignored; used by ablation baselines).
DictionarySet build_dictionaries(const SystemConfig& cfg, const GridSpec& grids,
                                 const BeamSet& beams, bool use_squint = true);

// vec(Y_k) for each pilot.
std::vector<CVec> vectorize_observations(const Observation& obs);

}  // namespace subthz
