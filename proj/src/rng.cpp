#include "photonlab/rng.hpp"

#include <cmath>
#include <numbers>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace photonlab {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) {
  // FNV-1a over the label, folded into the parent.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(parent ^ mix64(h));
}

// Ziggurat samplers; each call consumes engine output only.
double Rng::normal() { return boost::random::normal_distribution<double>()(engine_); }

double Rng::exponential(double mean) { return mean * boost::random::exponential_distribution<double>()(engine_); }

std::uint64_t Rng::geometric_trials(double p) {
  if (p >= 1.0) return 1;
  const double k = std::floor(std::log(uniform_pos()) / std::log1p(-p));
  if (k > 9.0e18) return static_cast<std::uint64_t>(9.0e18);
  return 1 + static_cast<std::uint64_t>(k);
}

double Rng::gamma(double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double IndexedRng::normal(std::uint64_t index) const {
  const double u1 = 1.0 - uniform(index, 1);
  const double u2 = uniform(index, 2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace photonlab
