#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "subthz/codebook.hpp"
#include "subthz/rng.hpp"
#include "subthz/types.hpp"

// Time-varying dual-wideband channel: frequency-selective path gains plus
// squinted array responses. Subcarrier indices k are 1-based (k = 1..K_o);
// the subcarrier offset from the carrier is
//   delta_k = (k - (K_o + 1)/2) * B / K_o.
namespace subthz {

enum class GainModel {
  kApproximate,  // alpha_l(delta) = alpha_ref / (1 + delta/f_c)
  kPhysical,     // free-space spreading + molecular absorption + reflection
};

enum class AnglePrior {
  kUniformPhysical,  // azimuth ~ U(-pi, pi), polar ~ U(-pi/2, pi/2), projected
  kUniformSpatial,   // each spatial angle ~ U(-0.5, 0.5)
};

struct SystemConfig {
  double f_c = 142e9;       // carrier (Hz)
  double bandwidth = 2e9;   // B (Hz)
  int n_subcarriers = 128;  // K_o
  UpaDims n_rx{8, 8};
  UpaDims n_tx{4, 4};
  int n_paths = 4;          // L
  int n_common = 3;         // L_cm, paths surviving one frame transition
  double sigma_alpha2 = 0.0;  // reference-gain variance; 0 -> 1/L
  double tau_min = 1e-10;   // delay window (s)
  double tau_max = 1.1e-9;
  double frame_duration = 10e-3;     // T_frame (s)
  double subframe_duration = 10e-6;  // delta_s (s)
  GainModel gain_model = GainModel::kApproximate;
  AnglePrior angle_prior = AnglePrior::kUniformPhysical;
  bool on_grid = false;  // snap drawn angles to the finest codebook grid
  // Physical-model surface defaults (used when drawing NLOS paths).
  cdouble refractive_index{2.24, -0.025};
  double surface_roughness = 0.088e-3;  // sigma_r (m)
  double absorption_coeff = 0.0;        // kappa_a (1/m), constant-in-f default

  double subcarrier_offset(int k) const;  // delta_k, k 1-based
  double gain_variance() const;           // sigma_alpha2 or 1/L
  void validate() const;
};

// Reflection/geometry record behind the physical gain model.
struct PhysicalPath {
  bool line_of_sight = false;
  double distance = 1.0;         // D (m)
  double incidence = 0.0;        // phi_i (rad), from surface normal
  double roughness = 0.0;        // sigma_r (m)
  cdouble refractive_index{1.0, 0.0};
};

struct ChannelPath {
  cdouble alpha_ref;  // alpha'_l, reference complex gain at the carrier
  double tau = 0.0;   // absolute delay (s)
  AngleTuple angles;  // spatial angles, each in [-0.5, 0.5)
  std::optional<PhysicalPath> physical;
};

struct ChannelRealization {
  std::vector<ChannelPath> paths;
  // Fine-grid support: one (i_r, i_t) cell per path, order matching paths.
  std::vector<std::pair<long long, long long>> support;
  std::vector<long long> support_columns() const;  // flat j = i_t*G_r + i_r
  const GridSpec* grids = nullptr;                 // set by draw/evolve
};

// --- gain building blocks -------------------------------------------------

// Free-space spreading loss (c / (4 pi (f_c + delta) D))^2.
double spreading_loss(double delta, double distance, double f_c);

// Molecular absorption exp(-D * kappa_a). The callable maps a subcarrier
// offset delta to the absorption coefficient at carrier + delta (1/m); a null
// callable means no absorption.
double absorption_loss(double delta, double distance,
                       const std::function<double(double)>& kappa_a);

// Smooth-surface Fresnel coefficient with Rayleigh roughness attenuation.
// wave_impedance maps absolute frequency to the medium impedance Z(f); the
// refraction angle comes from Snell's law with Z/Z_o as the sine ratio.
cdouble reflection_coefficient(double delta, double incidence,
                               const std::function<cdouble(double)>& wave_impedance,
                               double roughness, double f_c);

// Z(f) for a non-magnetic medium with the given refractive index.
std::function<cdouble(double)> impedance_from_refractive_index(cdouble n);

// Frequency-dependent complex path gain alpha_l(delta) under either model.
cdouble path_coefficient(const ChannelPath& path, double delta, const SystemConfig& cfg);

// --- synthesis ------------------------------------------------------------

// H_k = sqrt(N_r N_t) sum_l alpha_l(delta_k) b_r b_t^H exp(-j 2 pi delta_k tau_l),
// with squinted UPA responses at offset delta_k.
CMat channel_matrix(const ChannelRealization& ch, int k, const SystemConfig& cfg);

// Draw a fresh realization. When cfg.on_grid, angles snap to the finest grid
// and support cells are kept pairwise distinct.
ChannelRealization draw_channel(const SystemConfig& cfg, const GridSpec& grids, Rng& rng);

// Frame transition: keep a uniformly chosen subset of n_common paths
// bit-identical, redraw the rest, recompute support.
ChannelRealization evolve_channel(const ChannelRealization& prev, const SystemConfig& cfg,
                                  const GridSpec& grids, Rng& rng);

}  // namespace subthz
