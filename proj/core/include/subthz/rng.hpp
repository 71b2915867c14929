#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "subthz/types.hpp"

namespace subthz {

// Derives an independent stream seed from a root seed and a coordinate path
// (e.g. {purpose, axis, trial, frame, subcarrier}). Counter-based splitting:
// the same coordinates always yield the same stream, irrespective of how many
// other streams were consumed, which keeps multi-threaded sweeps reproducible.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path);

// Deterministic draw helpers on top of mt19937_64. Distribution transforms are
// implemented here (not std::*_distribution) so sequences are identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer on [0, n), n >= 1.
  std::uint64_t uniform_index(std::uint64_t n);
  // Standard normal via Box-Muller.
  double normal();
  // Circularly symmetric complex normal with the given total variance.
  cdouble cnormal(double variance);
  // Uniform phase on [0, 2*pi).
  double phase();

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace subthz
