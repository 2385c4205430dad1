#pragma once

#include <cstdint>
#include <variant>

#include "photonlab/event_stream.hpp"

namespace photonlab {

// Source configurations. Rates are per second; pulse timing is in picoseconds.
// validate() throws ConfigError on invariant violations.

/// Ideal laser: homogeneous Poisson emission.
struct CoherentSourceConfig {
  double rate = 5e4;
  void validate() const;
};

/// Chaotic light: intensity |E(t)|^2 of a complex Gaussian field whose
/// first-order coherence decays as exp(-|tau| / coherence_time).
struct ThermalSourceConfig {
  double rate = 1e5;
  double coherence_time = 10e-9;
  int grid_divisions = 20;  // field samples per coherence time
  void validate() const;
};

/// Continuously pumped two-level emitter, classical rate-equation cycle.
struct TwoLevelCwConfig {
  double pump_rate = 1e8;
  double decay_rate = 1e8;
  double quantum_efficiency = 1.0;
  void validate() const;
};

/// Pulsed single emitter with optional re-excitation within the same pulse.
struct PulsedEmitterConfig {
  Picoseconds rep_period = 13'200;
  double lifetime = 1'000.0;  // ps
  double emission_prob = 1.0;
  double reexcitation_prob = 0.0;
  double reexcitation_delay = 2'000.0;  // ps
  void validate() const;
};

/// Train of n-photon number states.
struct FockPulseConfig {
  int n = 1;
  Picoseconds rep_period = 13'200;
  double lifetime = 1'000.0;  // ps
  void validate() const;
};

using EmitterConfig =
    std::variant<CoherentSourceConfig, ThermalSourceConfig, TwoLevelCwConfig, PulsedEmitterConfig, FockPulseConfig>;

EventStream gen_coherent(const CoherentSourceConfig& cfg, double duration, std::uint64_t seed);
EventStream gen_thermal(const ThermalSourceConfig& cfg, double duration, std::uint64_t seed);
EventStream gen_two_level_cw(const TwoLevelCwConfig& cfg, double duration, std::uint64_t seed);
EventStream gen_pulsed(const PulsedEmitterConfig& cfg, double duration, std::uint64_t seed);
EventStream gen_fock_train(const FockPulseConfig& cfg, double duration, std::uint64_t seed);

/// Dispatches on the held configuration.
EventStream generate(const EmitterConfig& cfg, double duration, std::uint64_t seed);
void validate(const EmitterConfig& cfg);

/// Mean emitted photon rate (1/s) implied by a configuration.
double mean_rate(const EmitterConfig& cfg);

/// Merges an independent Poisson stream of background-tagged photons.
EventStream add_background(const EventStream& stream, double rate, std::uint64_t seed);

/// Homogeneous Poisson process over [0, duration] with the given tag.
EventStream poisson_stream(double rate, Picoseconds duration, EventTag tag, std::uint64_t seed);

}  // namespace photonlab
