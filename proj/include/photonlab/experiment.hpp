#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "photonlab/config.hpp"
#include "photonlab/correlator.hpp"
#include "photonlab/detection.hpp"
#include "photonlab/event_stream.hpp"

namespace photonlab {

/// Fitted fringe contrast (Imax - Imin) / (Imax + Imin) with bootstrap error.
struct VisibilityFit {
  double visibility = 0.0;
  double error = 0.0;
  int fringes = 0;  // neighborhoods used in the fit
};

/// Where the combined run's g2(0) came from.
enum class ZeroDelayEstimator { window, peak_ratio };

struct RunResult {
  CoincidenceHistogram histogram;
  G2Estimate g2;
  FringeTrace fringe;
  std::optional<VisibilityFit> visibility;
  ValueWithError g2_zero;
  ZeroDelayEstimator g2_zero_estimator = ZeroDelayEstimator::window;
  std::optional<PeakAnalysis> peaks;
  ClassicalityReport classicality;
  double g2_mean = 0.0;
  bool windowed_normalization = false;  // accidentals from per-window rates

  // Detector click records for both HBT arms (A also feeds the fringe trace).
  EventStream channel_a;
  EventStream channel_b;
  std::uint64_t emitted = 0;

  // Provenance.
  std::uint64_t seed = 0;
  std::string config_hash;
  nlohmann::json config_echo;
};

/// Photon streams at the two detector outputs of one simulated run.
struct ChannelStreams {
  std::uint64_t emitted = 0;
  EventStream a;
  EventStream b;
};

/// The seed a config will run with; throws ConfigError when none is set.
std::uint64_t resolved_seed(const ExperimentConfig& cfg);

/// Emitter, background, bandpass, scanned Michelson, splitter and both
/// detectors, each stage seeded from `seed` by name.
ChannelStreams simulate_channels(const ExperimentConfig& cfg, std::uint64_t seed);

/// One combined run: histogram and g2 from both channels, fringe trace from
/// channel A, all from the same photons.
RunResult run_combined(const ExperimentConfig& cfg);

/// Fits a + b cos(phi) + c sin(phi), phi = 2 pi x / lambda, within each
/// one-wavelength neighborhood of a monotonic scan ramp and returns
/// sqrt(<b/a>^2 + <c/a>^2) with the sampling-noise bias removed.
/// Throws InsufficientDataError with fewer than three usable neighborhoods.
VisibilityFit extract_visibility(const FringeTrace& trace, const ScanWaveform& scan, const SpectralLine& line);

struct SweepPoint {
  double path_difference = 0.0;  // m, scan center
  double delay = 0.0;            // s
  VisibilityFit fit;
};

/// Repeats the fringe measurement with the scan centered on each path
/// difference; point i is seeded from the master seed and its index.
std::vector<SweepPoint> sweep_visibility(const ExperimentConfig& cfg, std::span<const double> path_differences);

/// Upward crossings of the trace's mid level (with hysteresis) for windows
/// starting in [t_begin, t_end).
int count_fringes(const FringeTrace& trace, double t_begin, double t_end);

enum class FringePhase { constructive, destructive };

/// Keeps clicks whose interferometer phase at their timestamp has cos > 0
/// (constructive) or cos < 0 (destructive).
EventStream gate_by_phase(const EventStream& clicks, const SpectralLine& line, const ScanWaveform& scan,
                          FringePhase phase);

/// Bin-by-bin shape comparison of two histograms after normalizing each to
/// unit total; z_i = (p1 - p2) / sigma with Poisson errors.
struct ShapeComparison {
  std::vector<double> z;
  double max_abs_z = 0.0;
  std::size_t worst_bin = 0;
};
ShapeComparison compare_shapes(const CoincidenceHistogram& a, const CoincidenceHistogram& b);

nlohmann::json summary_json(const RunResult& result);

}  // namespace photonlab
