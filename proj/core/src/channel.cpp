#include "subthz/channel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace subthz {

double SystemConfig::subcarrier_offset(int k) const {
  if (k < 1 || k > n_subcarriers)
    throw std::invalid_argument("subcarrier_offset: k out of range");
  return (double(k) - (double(n_subcarriers) + 1.0) / 2.0) * bandwidth /
         double(n_subcarriers);
}

double SystemConfig::gain_variance() const {
  return sigma_alpha2 > 0.0 ? sigma_alpha2 : 1.0 / double(n_paths);
}

void SystemConfig::validate() const {
  if (f_c <= 0.0 || bandwidth <= 0.0) throw std::invalid_argument("config: f_c and B must be positive");
  if (bandwidth >= 2.0 * f_c) throw std::invalid_argument("config: B must be below 2 f_c");
  if (n_subcarriers < 1) throw std::invalid_argument("config: K_o must be >= 1");
  if (n_rx.v < 1 || n_rx.h < 1 || n_tx.v < 1 || n_tx.h < 1)
    throw std::invalid_argument("config: array dims must be >= 1");
  if (n_paths < 1) throw std::invalid_argument("config: L must be >= 1");
  if (n_common < 0 || n_common > n_paths)
    throw std::invalid_argument("config: L_cm must satisfy 0 <= L_cm <= L");
  if (tau_min < 0.0 || tau_max < tau_min)
    throw std::invalid_argument("config: bad delay window");
}

std::vector<long long> ChannelRealization::support_columns() const {
  if (!grids) throw std::logic_error("support_columns: realization has no grid spec");
  std::vector<long long> cols;
  cols.reserve(support.size());
  for (const auto& [ir, it] : support) cols.push_back(grids->fine_column(ir, it));
  return cols;
}

double spreading_loss(double delta, double distance, double f_c) {
  if (distance <= 0.0) throw std::invalid_argument("spreading_loss: distance must be positive");
  const double f = f_c + delta;
  if (f <= 0.0) throw std::invalid_argument("spreading_loss: f_c + delta must be positive");
  const double r = kSpeedOfLight / (4.0 * kPi * f * distance);
  return r * r;
}

double absorption_loss(double delta, double distance,
                       const std::function<double(double)>& kappa_a) {
  if (distance < 0.0) throw std::invalid_argument("absorption_loss: negative distance");
  const double coeff = kappa_a ? kappa_a(delta) : 0.0;
  if (coeff < 0.0) throw std::invalid_argument("absorption_loss: negative coefficient");
  return std::exp(-distance * coeff);
}

cdouble reflection_coefficient(double delta, double incidence,
                               const std::function<cdouble(double)>& wave_impedance,
                               double roughness, double f_c) {
  const double f = f_c + delta;
  const cdouble z = wave_impedance(f);
  // Snell: sin(phi_r) = (Z / Z_o) sin(phi_i); complex for lossy media.
  const cdouble sin_r = (z / kWaveImpedance) * std::sin(incidence);
  const cdouble cos_r = std::sqrt(cdouble(1.0, 0.0) - sin_r * sin_r);
  const double cos_i = std::cos(incidence);
  const cdouble num = z * cos_i - kWaveImpedance * cos_r;
  const cdouble den = z * cos_i + kWaveImpedance * cos_r;
  if (std::abs(den) == 0.0)
    throw std::invalid_argument("reflection_coefficient: degenerate impedance pair");
  const double rough_arg = 4.0 * kPi * f * roughness * cos_i / kSpeedOfLight;
  const double rough = std::exp(-0.5 * rough_arg * rough_arg);
  return (num / den) * rough;
}

std::function<cdouble(double)> impedance_from_refractive_index(cdouble n) {
  if (std::abs(n) == 0.0)
    throw std::invalid_argument("impedance_from_refractive_index: zero index");
  return [n](double) { return kWaveImpedance / n; };
}

cdouble path_coefficient(const ChannelPath& path, double delta, const SystemConfig& cfg) {
  if (cfg.gain_model == GainModel::kApproximate || !path.physical) {
    const double squint = 1.0 + delta / cfg.f_c;
    return path.alpha_ref / squint;
  }
  const PhysicalPath& p = *path.physical;
  double chi_mag = 1.0;
  if (!p.line_of_sight) {
    const cdouble chi = reflection_coefficient(
        delta, p.incidence, impedance_from_refractive_index(p.refractive_index),
        p.roughness, cfg.f_c);
    chi_mag = std::abs(chi);
  }
  const double spread = spreading_loss(delta, p.distance, cfg.f_c);
  const double absorb =
      absorption_loss(delta, p.distance, [&cfg](double) { return cfg.absorption_coeff; });
  const double mag = chi_mag * std::sqrt(spread * absorb);
  return std::polar(mag, -2.0 * kPi * cfg.f_c * path.tau);
}

CMat channel_matrix(const ChannelRealization& ch, int k, const SystemConfig& cfg) {
  const double delta = cfg.subcarrier_offset(k);
  const double scale = std::sqrt(double(cfg.n_rx.count()) * double(cfg.n_tx.count()));
  CMat h = CMat::Zero(cfg.n_rx.count(), cfg.n_tx.count());
  for (const ChannelPath& p : ch.paths) {
    const cdouble alpha = path_coefficient(p, delta, cfg);
    const cdouble fsel = std::polar(1.0, -2.0 * kPi * delta * p.tau);
    const CVec br = upa_vector(cfg.n_rx, p.angles.aoa_h, p.angles.aoa_v, delta, cfg.f_c);
    const CVec bt = upa_vector(cfg.n_tx, p.angles.aod_h, p.angles.aod_v, delta, cfg.f_c);
    h.noalias() += (scale * alpha * fsel) * (br * bt.adjoint());
  }
  return h;
}

namespace {

AngleTuple draw_angles(const SystemConfig& cfg, Rng& rng) {
  AngleTuple t;
  if (cfg.angle_prior == AnglePrior::kUniformSpatial) {
    t.aod_h = rng.uniform(-0.5, 0.5);
    t.aod_v = rng.uniform(-0.5, 0.5);
    t.aoa_h = rng.uniform(-0.5, 0.5);
    t.aoa_v = rng.uniform(-0.5, 0.5);
    return t;
  }
  // Half-wavelength spacing: psi_h = cos(az) sin(pol) / 2, psi_v = sin(az) sin(pol) / 2.
  const auto project = [&rng](double& ph, double& pv) {
    const double az = rng.uniform(-kPi, kPi);
    const double pol = rng.uniform(-kPi / 2.0, kPi / 2.0);
    ph = 0.5 * std::cos(az) * std::sin(pol);
    pv = 0.5 * std::sin(az) * std::sin(pol);
  };
  project(t.aod_h, t.aod_v);
  project(t.aoa_h, t.aoa_v);
  return t;
}

ChannelPath draw_path(const SystemConfig& cfg, Rng& rng, bool line_of_sight) {
  ChannelPath p;
  p.alpha_ref = rng.cnormal(cfg.gain_variance());
  p.tau = rng.uniform(cfg.tau_min, cfg.tau_max);
  p.angles = draw_angles(cfg, rng);
  if (cfg.gain_model == GainModel::kPhysical) {
    PhysicalPath phys;
    phys.line_of_sight = line_of_sight;
    phys.distance = std::max(kSpeedOfLight * p.tau, 1e-3);
    phys.incidence = line_of_sight ? 0.0 : rng.uniform(0.0, 0.45 * kPi);
    phys.roughness = cfg.surface_roughness;
    phys.refractive_index = cfg.refractive_index;
    p.physical = phys;
  }
  return p;
}

// Support cell of one path at the finest grid.
std::pair<long long, long long> support_cell(const AngleTuple& t, const GridSpec& grids) {
  const long long j = grids.nearest_fine_column(t);
  const auto [ir, it] = grids.fine_column_split(j);
  return {ir, it};
}

}  // namespace

ChannelRealization draw_channel(const SystemConfig& cfg, const GridSpec& grids, Rng& rng) {
  cfg.validate();
  grids.validate();
  ChannelRealization ch;
  ch.grids = &grids;
  std::set<std::pair<long long, long long>> used;
  for (int l = 0; l < cfg.n_paths; ++l) {
    ChannelPath p;
    std::pair<long long, long long> cell;
    // Distinct support cells keep |Omega| = L; redraw on (rare) collisions.
    for (int attempt = 0;; ++attempt) {
      p = draw_path(cfg, rng, /*line_of_sight=*/l == 0);
      if (cfg.on_grid) p.angles = grids.snap_to_fine(p.angles);
      cell = support_cell(p.angles, grids);
      if (used.insert(cell).second) break;
      if (attempt > 256)
        throw std::runtime_error("draw_channel: could not find distinct support cells");
    }
    ch.paths.push_back(std::move(p));
    ch.support.push_back(cell);
  }
  return ch;
}

ChannelRealization evolve_channel(const ChannelRealization& prev, const SystemConfig& cfg,
                                  const GridSpec& grids, Rng& rng) {
  if (int(prev.paths.size()) != cfg.n_paths)
    throw std::invalid_argument("evolve_channel: path count mismatch");
  // Uniform subset of retained paths via partial Fisher-Yates.
  std::vector<int> order(cfg.n_paths);
  for (int i = 0; i < cfg.n_paths; ++i) order[i] = i;
  for (int i = 0; i < cfg.n_common; ++i) {
    const int j = i + int(rng.uniform_index(std::uint64_t(cfg.n_paths - i)));
    std::swap(order[i], order[j]);
  }
  std::vector<bool> keep(cfg.n_paths, false);
  for (int i = 0; i < cfg.n_common; ++i) keep[order[i]] = true;

  ChannelRealization ch;
  ch.grids = &grids;
  ch.paths = prev.paths;
  ch.support = prev.support;
  std::set<std::pair<long long, long long>> used;
  for (int l = 0; l < cfg.n_paths; ++l)
    if (keep[l]) used.insert(prev.support[l]);
  for (int l = 0; l < cfg.n_paths; ++l) {
    if (keep[l]) continue;
    for (int attempt = 0;; ++attempt) {
      ChannelPath p = draw_path(cfg, rng, /*line_of_sight=*/l == 0);
      if (cfg.on_grid) p.angles = grids.snap_to_fine(p.angles);
      const auto cell = support_cell(p.angles, grids);
      if (used.insert(cell).second) {
        ch.paths[l] = std::move(p);
        ch.support[l] = cell;
        break;
      }
      if (attempt > 256)
        throw std::runtime_error("evolve_channel: could not find distinct support cells");
    }
  }
  return ch;
}

}  // namespace subthz
