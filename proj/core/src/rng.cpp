#include "subthz/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace subthz {

namespace {

// splitmix64 finalizer; good avalanche, cheap.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix(root ^ 0x5bf03635c2a69bbaULL);
  for (std::uint64_t p : path) h = mix(h ^ mix(p + 0x632be59bd9b4e019ULL));
  return h;
}

double Rng::uniform() {
  // 53 random bits -> [0,1) with full double resolution.
  return double(eng_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - // NOLINT
                              (std::numeric_limits<std::uint64_t>::max() % n);
  std::uint64_t x;
  do {
    x = eng_();
  } while (x >= limit && limit != 0);
  return x % n;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

cdouble Rng::cnormal(double variance) {
  if (variance < 0.0) throw std::invalid_argument("cnormal: negative variance");
  if (variance == 0.0) return {0.0, 0.0};
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  // Magnitude and phase of a CN(0, variance) sample in one shot.
  return std::polar(std::sqrt(-variance * std::log(u1)), 2.0 * kPi * u2);
}

double Rng::phase() { return 2.0 * kPi * uniform(); }

}  // namespace subthz
