#include "subthz/codebook.hpp"

#include <cmath>
#include <stdexcept>

namespace subthz {

double wrap_angle(double psi) {
  double w = psi - std::floor(psi + 0.5);
  if (w >= 0.5) w -= 1.0;  // guard the floating edge case psi + 0.5 == next int
  return w;
}

CVec steering_vector(int n, double psi, double delta, double f_c) {
  if (n < 1) throw std::invalid_argument("steering_vector: n must be >= 1");
  if (f_c <= 0.0) throw std::invalid_argument("steering_vector: f_c must be positive");
  const double squint = 1.0 + delta / f_c;
  const double scale = 1.0 / std::sqrt(double(n));
  CVec a(n);
  for (int i = 0; i < n; ++i)
    a(i) = std::polar(scale, -2.0 * kPi * double(i) * squint * psi);
  return a;
}

CVec upa_vector(UpaDims dims, double psi_h, double psi_v, double delta, double f_c) {
  const CVec ah = steering_vector(dims.h, psi_h, delta, f_c);
  const CVec av = steering_vector(dims.v, psi_v, delta, f_c);
  CVec b(dims.count());
  for (int ih = 0; ih < dims.h; ++ih)
    for (int iv = 0; iv < dims.v; ++iv) b(ih * dims.v + iv) = ah(ih) * av(iv);
  return b;
}

std::vector<double> uniform_grid(int g) {
  if (g < 1) throw std::invalid_argument("uniform_grid: g must be >= 1");
  std::vector<double> grid(g);
  for (int i = 0; i < g; ++i) grid[i] = (double(i) - double(g - 1) / 2.0) / double(g);
  return grid;
}

std::vector<double> hierarchical_subcodebook(int g_sub, int level, double parent) {
  if (g_sub < 2) throw std::invalid_argument("hierarchical_subcodebook: g_sub must be >= 2");
  if (level < 1) throw std::invalid_argument("hierarchical_subcodebook: level must be >= 1");
  const double step = std::pow(double(g_sub), -double(level));
  std::vector<double> grid(g_sub);
  for (int i = 0; i < g_sub; ++i)
    grid[i] = wrap_angle(parent + (double(i) - double(g_sub - 1) / 2.0) * step);
  return grid;
}

int GridSpec::fine_per_dim_r() const {
  long long g = 1;
  for (int m = 0; m < levels; ++m) g *= g_sub_r;
  return int(g);
}

int GridSpec::fine_per_dim_t() const {
  long long g = 1;
  for (int m = 0; m < levels; ++m) g *= g_sub_t;
  return int(g);
}

long long GridSpec::fine_cols_r() const {
  return (long long)(fine_per_dim_r()) * fine_per_dim_r();
}

long long GridSpec::fine_cols_t() const {
  return (long long)(fine_per_dim_t()) * fine_per_dim_t();
}

long long GridSpec::pair_to_flat(int ih, int iv, int per_dim) {
  return (long long)(ih)*per_dim + iv;
}

std::pair<int, int> GridSpec::flat_to_pair(long long flat, int per_dim) {
  return {int(flat / per_dim), int(flat % per_dim)};
}

long long GridSpec::fine_column(long long ir, long long it) const {
  return it * fine_cols_r() + ir;
}

std::pair<long long, long long> GridSpec::fine_column_split(long long j) const {
  const long long gr = fine_cols_r();
  return {j % gr, j / gr};
}

int GridSpec::coarse_column(int ir, int it) const { return it * coarse_cols_r() + ir; }

std::pair<int, int> GridSpec::coarse_column_split(int j) const {
  return {j % coarse_cols_r(), j / coarse_cols_r()};
}

namespace {

double grid_angle(long long idx, long long g) {
  return (double(idx) - double(g - 1) / 2.0) / double(g);
}

long long nearest_grid_index(double psi, long long g) {
  const double w = wrap_angle(psi);
  long long i = std::llround(w * double(g) + double(g - 1) / 2.0);
  if (i < 0) i = 0;
  if (i >= g) i = g - 1;
  return i;
}

}  // namespace

AngleTuple GridSpec::fine_tuple(long long column) const {
  const auto [ir, it] = fine_column_split(column);
  const int gr = fine_per_dim_r();
  const int gt = fine_per_dim_t();
  const auto [irh, irv] = flat_to_pair(ir, gr);
  const auto [ith, itv] = flat_to_pair(it, gt);
  AngleTuple tpl;
  tpl.aoa_h = grid_angle(irh, gr);
  tpl.aoa_v = grid_angle(irv, gr);
  tpl.aod_h = grid_angle(ith, gt);
  tpl.aod_v = grid_angle(itv, gt);
  return tpl;
}

AngleTuple GridSpec::coarse_tuple(int column) const {
  const auto [ir, it] = coarse_column_split(column);
  const auto [irh, irv] = flat_to_pair(ir, g_sub_r);
  const auto [ith, itv] = flat_to_pair(it, g_sub_t);
  AngleTuple tpl;
  tpl.aoa_h = grid_angle(irh, g_sub_r);
  tpl.aoa_v = grid_angle(irv, g_sub_r);
  tpl.aod_h = grid_angle(ith, g_sub_t);
  tpl.aod_v = grid_angle(itv, g_sub_t);
  return tpl;
}

long long GridSpec::nearest_fine_column(const AngleTuple& t) const {
  const int gr = fine_per_dim_r();
  const int gt = fine_per_dim_t();
  const long long ir = pair_to_flat(int(nearest_grid_index(t.aoa_h, gr)),
                                    int(nearest_grid_index(t.aoa_v, gr)), gr);
  const long long it = pair_to_flat(int(nearest_grid_index(t.aod_h, gt)),
                                    int(nearest_grid_index(t.aod_v, gt)), gt);
  return fine_column(ir, it);
}

AngleTuple GridSpec::snap_to_fine(const AngleTuple& t) const {
  return fine_tuple(nearest_fine_column(t));
}

int GridSpec::coarse_parent(long long fine_col) const {
  // Every fine codeword lies strictly within half a level-1 step of its
  // hierarchy parent, so nearest level-1 codeword per dimension is exact.
  const AngleTuple t = fine_tuple(fine_col);
  const int ir = int(pair_to_flat(int(nearest_grid_index(t.aoa_h, g_sub_r)),
                                  int(nearest_grid_index(t.aoa_v, g_sub_r)), g_sub_r));
  const int it = int(pair_to_flat(int(nearest_grid_index(t.aod_h, g_sub_t)),
                                  int(nearest_grid_index(t.aod_v, g_sub_t)), g_sub_t));
  return coarse_column(ir, it);
}

void GridSpec::validate() const {
  if (g_sub_r < 2 || g_sub_t < 2)
    throw std::invalid_argument("GridSpec: sub-codebook sizes must be >= 2");
  if (levels < 1) throw std::invalid_argument("GridSpec: levels must be >= 1");
  if (fine_per_dim_r() > (1 << 20) || fine_per_dim_t() > (1 << 20))
    throw std::invalid_argument("GridSpec: fine grid too large");
}

cdouble beam_pattern(const CMat& w, double psi, double psi_i, double delta, double f_c) {
  const int n = int(w.rows());
  const CVec a = steering_vector(n, psi, delta, f_c);
  const CVec ai = steering_vector(n, psi_i, delta, f_c);
  const CVec wa = w.adjoint() * a;
  const CVec wai = w.adjoint() * ai;
  return wa.dot(wai);  // (w^H a)^H (w^H a_i)
}

cdouble expected_beam_pattern(int n, int q, double psi, double psi_i, double delta,
                              double f_c) {
  const CVec a = steering_vector(n, psi, delta, f_c);
  const CVec ai = steering_vector(n, psi_i, delta, f_c);
  return (double(q) / double(n)) * a.dot(ai);
}

}  // namespace subthz
