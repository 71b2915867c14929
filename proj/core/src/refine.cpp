#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "subthz/estimators.hpp"

// Per-path frequency-structure refinement. The per-pilot coefficient of a
// path follows gamma_k = sqrt(N_r N_t) * alpha_ref / (1 + delta_k/f_c) *
// z^(k - (K_o+1)/2) with a unit-modulus generator z = exp(-j 2 pi B tau /
// K_o). Ratios of squint-corrected coefficients at consecutive pilots expose
// z^delta_p; averaging the principal roots and projecting back to the unit
// circle recovers z, hence the delay, and a single LS fit recovers alpha_ref.
namespace subthz {

std::vector<PathEstimate> refine_paths(const std::vector<CVec>& q_pilot,
                                       const std::vector<SupportEntry>& support,
                                       const std::vector<int>& pilots,
                                       const SystemConfig& cfg,
                                       const EstimatorParams& par) {
  const int kp = int(pilots.size());
  if (kp < 2) throw std::invalid_argument("refine_paths: need at least two pilots");
  if (int(q_pilot.size()) != kp)
    throw std::invalid_argument("refine_paths: coefficient/pilot count mismatch");
  const int dp = kp > 1 ? pilots[1] - pilots[0] : 1;
  const double centre = (double(cfg.n_subcarriers) + 1.0) / 2.0;
  const double scale = std::sqrt(double(cfg.n_rx.count()) * double(cfg.n_tx.count()));

  std::vector<PathEstimate> out;
  out.reserve(support.size());
  for (std::size_t l = 0; l < support.size(); ++l) {
    PathEstimate pe;
    pe.angles = support[l].angles;

    // Squint-corrected coefficient sequence for this path.
    std::vector<cdouble> gamma(kp);
    std::vector<double> squint(kp);
    for (int i = 0; i < kp; ++i) {
      gamma[i] = q_pilot[i](Eigen::Index(l));
      squint[i] = 1.0 + cfg.subcarrier_offset(pilots[i]) / cfg.f_c;
    }

    // Average the principal delta_p-th roots of consecutive ratios.
    cdouble acc{0.0, 0.0};
    int kept = 0;
    for (int i = 1; i < kp; ++i) {
      if (std::abs(gamma[i - 1]) < par.ratio_floor || std::abs(gamma[i]) < par.ratio_floor)
        continue;  // degenerate ratio, skip
      const cdouble ratio = (gamma[i] * squint[i]) / (gamma[i - 1] * squint[i - 1]);
      acc += std::exp(std::log(ratio) / double(dp));
      ++kept;
    }
    cdouble z{1.0, 0.0};
    if (kept > 0) {
      acc /= double(kept);
      // The generator is a pure phase; magnitude deviations are noise and
      // destabilize the z^(k-centre) extrapolation, so project to |z| = 1.
      if (std::abs(acc) > 0.0) z = acc / std::abs(acc);
    }

    // Reference-gain fit for a candidate generator; returns the fit residual.
    const auto fit_alpha = [&](cdouble zc, cdouble* alpha) {
      cdouble num{0.0, 0.0};
      double den = 0.0;
      std::vector<cdouble> c(kp);
      for (int i = 0; i < kp; ++i) {
        c[i] = scale / squint[i] * std::pow(zc, cdouble(double(pilots[i]) - centre, 0.0));
        num += std::conj(c[i]) * gamma[i];
        den += std::norm(c[i]);
      }
      const cdouble a = den > 0.0 ? num / den : cdouble{0.0, 0.0};
      double resid = 0.0;
      for (int i = 0; i < kp; ++i) resid += std::norm(gamma[i] - a * c[i]);
      if (alpha) *alpha = a;
      return resid;
    };

    if (par.disambiguate_delay && kept > 0) {
      // The root average fixes z only up to a delta_p-th root of unity; try
      // every branch and keep the one explaining the coefficients best.
      double best = std::numeric_limits<double>::infinity();
      cdouble best_z = z;
      for (int m = 0; m < dp; ++m) {
        const cdouble zc = z * std::polar(1.0, 2.0 * kPi * double(m) / double(dp));
        const double resid = fit_alpha(zc, nullptr);
        if (resid < best) {
          best = resid;
          best_z = zc;
        }
      }
      z = best_z;
    }

    pe.z = z;
    pe.tau = -double(cfg.n_subcarriers) / (2.0 * kPi * cfg.bandwidth) * std::arg(z);
    fit_alpha(z, &pe.alpha_ref);
    out.push_back(pe);
  }
  return out;
}

}  // namespace subthz
