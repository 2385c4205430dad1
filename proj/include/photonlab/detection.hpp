#pragma once

#include <cstdint>
#include <vector>

#include "photonlab/event_stream.hpp"

namespace photonlab {

/// Single-photon avalanche detector. Jitter is Gaussian, specified by FWHM.
/// Dead time is non-paralyzable.
struct DetectorConfig {
  double efficiency = 1.0;
  double jitter_fwhm = 800.0 / 1.4142135623730951;  // ps; two such detectors give 800 ps
  double dead_time = 50'000.0;                       // ps
  double dark_rate = 0.0;                            // 1/s

  void validate() const;
};

/// FWHM -> standard deviation of a Gaussian.
double fwhm_to_sigma(double fwhm);

/// Efficiency thinning, Gaussian timing jitter, Poisson dark counts (tagged
/// dark), re-sort, then non-paralyzable dead-time suppression.
EventStream detect(const EventStream& stream, const DetectorConfig& cfg, std::uint64_t seed);

/// Drops any click that falls within `dead_time` ps after the last accepted click.
EventStream apply_dead_time(const EventStream& stream, double dead_time);

struct FringeSample {
  double window_start = 0.0;  // s
  std::uint64_t counts = 0;
};

/// Single-detector counts in contiguous windows.
struct FringeTrace {
  double window = 10e-3;  // s
  std::vector<FringeSample> samples;

  std::uint64_t total_counts() const;
};

/// Counts per full window of length `window` seconds starting at t = 0. A
/// trailing partial window is not reported.
FringeTrace count_rate_trace(const EventStream& stream, double window);

}  // namespace photonlab
