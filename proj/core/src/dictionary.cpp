#include "subthz/dictionary.hpp"

#include <stdexcept>

#include "subthz/linalg.hpp"

namespace subthz {

namespace {

// Tx / rx factor vectors whose Kronecker product is the equivalent column:
//   u = ((b_t^H X)^T) kron ((b_r^H W)^H).
CVec tx_factor(const CMat& x, const CVec& bt) { return x.transpose() * bt.conjugate(); }
CVec rx_factor(const CMat& w, const CVec& br) { return w.adjoint() * br; }

}  // namespace

CVec DictionarySet::column(int pilot_pos, const AngleTuple& t) const {
  const CMat& w = beams.w[pilot_pos];
  const CMat& x = beams.x[pilot_pos];
  const double delta = squint ? cfg->subcarrier_offset(beams.pilots[pilot_pos]) : 0.0;
  const CVec bt = upa_vector(cfg->n_tx, t.aod_h, t.aod_v, delta, cfg->f_c);
  const CVec br = upa_vector(cfg->n_rx, t.aoa_h, t.aoa_v, delta, cfg->f_c);
  const CVec tf = tx_factor(x, bt);
  const CVec rf = rx_factor(w, br);
  CVec u(tf.size() * rf.size());
  for (Eigen::Index i = 0; i < tf.size(); ++i)
    u.segment(i * rf.size(), rf.size()) = tf(i) * rf;
  return u;
}

CMat DictionarySet::columns(int pilot_pos, const std::vector<AngleTuple>& ts) const {
  CMat m(beams.w[pilot_pos].cols() * beams.x[pilot_pos].cols(), Eigen::Index(ts.size()));
  for (std::size_t c = 0; c < ts.size(); ++c) m.col(Eigen::Index(c)) = column(pilot_pos, ts[c]);
  return m;
}

CVec DictionarySet::fine_column(int pilot_pos, long long j) const {
  return column(pilot_pos, grids.fine_tuple(j));
}

DictionarySet build_dictionaries(const SystemConfig& cfg, const GridSpec& grids,
                                 const BeamSet& beams, bool use_squint) {
  grids.validate();
  DictionarySet d;
  d.cfg = &cfg;
  d.grids = grids;
  d.beams = beams;
  d.squint = use_squint;

  const auto grid_r = uniform_grid(grids.g_sub_r);
  const auto grid_t = uniform_grid(grids.g_sub_t);
  for (std::size_t p = 0; p < beams.pilots.size(); ++p) {
    const double delta = use_squint ? cfg.subcarrier_offset(beams.pilots[p]) : 0.0;
    // Level-1 array responses, columns h-major / v-minor.
    CMat ar(cfg.n_rx.count(), grids.coarse_cols_r());
    for (int ih = 0; ih < grids.g_sub_r; ++ih)
      for (int iv = 0; iv < grids.g_sub_r; ++iv)
        ar.col(GridSpec::pair_to_flat(ih, iv, grids.g_sub_r)) =
            upa_vector(cfg.n_rx, grid_r[ih], grid_r[iv], delta, cfg.f_c);
    CMat at(cfg.n_tx.count(), grids.coarse_cols_t());
    for (int ih = 0; ih < grids.g_sub_t; ++ih)
      for (int iv = 0; iv < grids.g_sub_t; ++iv)
        at.col(GridSpec::pair_to_flat(ih, iv, grids.g_sub_t)) =
            upa_vector(cfg.n_tx, grid_t[ih], grid_t[iv], delta, cfg.f_c);
    const CMat tx = (at.adjoint() * beams.x[p]).transpose();  // T_p x G_t1
    const CMat rx = (ar.adjoint() * beams.w[p]).adjoint();    // Q_p x G_r1
    d.theta1.push_back(kron(tx, rx));
  }
  return d;
}

std::vector<CVec> vectorize_observations(const Observation& obs) {
  std::vector<CVec> ys;
  ys.reserve(obs.y.size());
  for (const CMat& y : obs.y) ys.push_back(vec(y));
  return ys;
}

}  // namespace subthz
