#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace photonlab {

/// Name recorded in configs and provenance. The engine is std::mt19937_64,
/// whose output sequence is fixed by the C++ standard. std:: distributions are
/// implementation-defined, so the samplers below are either written out or
/// taken from Boost.Random, whose algorithms are fixed.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64";

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent child seed from a parent seed and a label.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);

/// 53-bit uniform double in [0, 1).
inline double bits_to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential generator used where draws are naturally ordered in time.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform() { return bits_to_unit(engine_()); }
  /// Uniform in (0, 1]; safe as a log argument.
  double uniform_pos() { return 1.0 - uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  double exponential(double mean);
  double normal();
  /// Number of Bernoulli(p) trials up to and including the first success.
  std::uint64_t geometric_trials(double p);
  /// Gamma(shape, 1) for shape >= 1 (Marsaglia-Tsang).
  double gamma(double shape);

 private:
  std::mt19937_64 engine_;
};

/// Counter-based draws indexed by event ordinal, so per-photon decisions are
/// independent of processing order or partitioning.
class IndexedRng {
 public:
  explicit IndexedRng(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  double uniform(std::uint64_t index, std::uint64_t lane = 0) const {
    return bits_to_unit(mix64(key_ ^ mix64(index * 0x9e3779b97f4a7c15ULL + lane)));
  }
  bool bernoulli(std::uint64_t index, double p) const { return uniform(index) < p; }
  /// Box-Muller draw from two lanes of the same index.
  double normal(std::uint64_t index) const;

 private:
  std::uint64_t key_;
};

}  // namespace photonlab
