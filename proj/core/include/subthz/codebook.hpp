#pragma once

#include <vector>

#include "subthz/types.hpp"

// Array-response vectors, angular grids and the multi-level codebook
// hierarchy. Spatial angles psi live in [-0.5, 0.5): psi = (d/lambda_c) *
// cos(azimuth) * sin(polar) style projections with d = lambda_c/2, so the
// full grid never aliases. Frequency-dependent phase terms carry the
// (1 + delta/f_c) factor so that beams formed at the carrier squint at
// subcarrier offsets delta != 0.
namespace subthz {

struct UpaDims {
  int v = 1;  // vertical elements
  int h = 1;  // horizontal elements
  int count() const { return v * h; }
};

// Wrap a spatial angle into [-0.5, 0.5).
double wrap_angle(double psi);

// Uniform linear array response, unit l2 norm:
//   a_n = (1/sqrt(N)) exp(-j 2 pi n (1 + delta/f_c) psi), n = 0..N-1.
CVec steering_vector(int n, double psi, double delta, double f_c);

// Uniform planar array response: horizontal steering kron vertical steering.
// Element (ih, iv) of the grid sits at flat position ih*dims.v + iv.
CVec upa_vector(UpaDims dims, double psi_h, double psi_v, double delta, double f_c);

// Symmetric uniform grid of g points: (i - (g-1)/2)/g for i = 0..g-1.
std::vector<double> uniform_grid(int g);

// Level-m sub-codebook of g_sub points centred on a parent codeword:
//   parent + (i - (g_sub-1)/2)/g_sub^m, wrapped into [-0.5, 0.5).
// Level 1 with parent 0 reproduces uniform_grid(g_sub).
std::vector<double> hierarchical_subcodebook(int g_sub, int level, double parent);

// Angle 4-tuple in sweep order: horizontal AOD, vertical AOD, horizontal AOA,
// vertical AOA.
struct AngleTuple {
  double aod_h = 0.0;
  double aod_v = 0.0;
  double aoa_h = 0.0;
  double aoa_v = 0.0;
};

// Grid hierarchy shared by dictionary construction and the hierarchical
// search. Per-dimension sub-codebook sizes may differ between tx and rx; the
// finest grid has g_sub^levels points per dimension and coincides with
// uniform_grid of that size.
struct GridSpec {
  int g_sub_r = 4;  // per rx dimension (both h and v)
  int g_sub_t = 4;  // per tx dimension
  int levels = 1;   // M

  int fine_per_dim_r() const;
  int fine_per_dim_t() const;
  // Flat fine grid sizes G_r = G_hr * G_vr, G_t = G_ht * G_vt.
  long long fine_cols_r() const;
  long long fine_cols_t() const;
  // Level-1 grid sizes.
  int coarse_cols_r() const { return g_sub_r * g_sub_r; }
  int coarse_cols_t() const { return g_sub_t * g_sub_t; }

  // Pair index <-> flat index within one array side, h-major / v-minor:
  // flat = ih * per_dim + iv. All indices 0-based.
  static long long pair_to_flat(int ih, int iv, int per_dim);
  static std::pair<int, int> flat_to_pair(long long flat, int per_dim);

  // Dictionary column index for an (rx, tx) pair: j = it * G_r + ir.
  long long fine_column(long long ir, long long it) const;
  std::pair<long long, long long> fine_column_split(long long j) const;
  int coarse_column(int ir, int it) const;
  std::pair<int, int> coarse_column_split(int j) const;

  // Angles of grid cells.
  AngleTuple fine_tuple(long long column) const;
  AngleTuple coarse_tuple(int column) const;

  // Nearest fine-grid cell for arbitrary angles (used for support bookkeeping
  // and on-grid snapping).
  long long nearest_fine_column(const AngleTuple& t) const;
  AngleTuple snap_to_fine(const AngleTuple& t) const;

  // Level-1 ancestor of a fine column (nearest level-1 codeword per
  // dimension); used to seed hierarchical refinement and to carry support
  // across frames for the coarse-grid solver.
  int coarse_parent(long long fine_column) const;

  void validate() const;
};

// Combined beam pattern through a measurement matrix w (N x Q):
//   p = (w^H a(psi))^H (w^H a(psi_i)), steering at offset delta.
cdouble beam_pattern(const CMat& w, double psi, double psi_i, double delta, double f_c);

// Ensemble mean of the pattern over random constant-modulus w:
//   (Q/N) a(psi)^H a(psi_i).
cdouble expected_beam_pattern(int n, int q, double psi, double psi_i, double delta,
                              double f_c);

}  // namespace subthz
