#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "photonlab/correlator.hpp"
#include "photonlab/detection.hpp"
#include "photonlab/emitters.hpp"
#include "photonlab/optics.hpp"
#include "photonlab/rng.hpp"

namespace photonlab {

struct HistogramSettings {
  Picoseconds bin_width = 37;
  Picoseconds range = 66'000;  // five 13.2 ns periods
  HistogramMode mode = HistogramMode::start_stop;
  Picoseconds zero_window = 400;  // half width of the pooled g2(0) window
};

struct BandpassSettings {
  double signal_transmission = 1.0;
  double background_transmission = 1.0;
};

/// Full description of one combined run: emitter -> bandpass -> scanned
/// Michelson -> 50:50 splitter -> two detectors.
struct ExperimentConfig {
  std::string rng = std::string(kRngAlgorithm);
  std::optional<std::uint64_t> seed;
  double duration = 60.0;  // s
  EmitterConfig emitter = TwoLevelCwConfig{};
  double background_rate = 0.0;  // 1/s, before the bandpass
  BandpassSettings bandpass;
  SpectralLine line;
  ScanWaveform scan;
  double splitter_reflectance = 0.5;
  std::array<DetectorConfig, 2> detectors;
  HistogramSettings histogram;
  double fringe_window = 10e-3;  // s

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Parses a config document. Throws ParseError (with a JSON pointer) for
/// syntax errors, unknown keys, missing fields and wrong types.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Fully expanded config, every default filled in.
nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json emitter_to_json(const EmitterConfig& cfg);
/// Parses an emitter object of the form {"type": ..., ...}.
EmitterConfig parse_emitter(const nlohmann::json& doc, const std::string& pointer = "/emitter");

/// FNV-1a 64 of `bytes` as 16 hex digits.
std::string hash_hex(std::string_view bytes);

/// FNV-1a 64 over the canonical (sorted-key, compact) JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

std::string_view to_string(HistogramMode mode);
std::string_view to_string(LineShape shape);
std::string_view to_string(ScanKind kind);

}  // namespace photonlab
