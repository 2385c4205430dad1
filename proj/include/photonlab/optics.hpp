#pragma once

#include <cstdint>
#include <utility>

#include "photonlab/event_stream.hpp"

namespace photonlab {

enum class LineShape { lorentzian, gaussian, delta };

/// Emission line. `linewidth` is an angular-frequency half width at half
/// maximum (1/s) for both lorentzian and gaussian shapes.
struct SpectralLine {
  double center_wavelength_nm = 700.0;
  LineShape shape = LineShape::lorentzian;
  double linewidth = 1e9;

  void validate() const;
  double angular_frequency() const;  // omega_0 = 2 pi c / lambda
  double wavelength_m() const { return center_wavelength_nm * 1e-9; }
};

enum class ScanKind { fixed, triangular };

/// Interferometer path difference versus time. The triangular wave starts at
/// `offset` and rises first, spanning offset +/- amplitude over one period.
struct ScanWaveform {
  ScanKind kind = ScanKind::fixed;
  double amplitude = 0.0;  // m
  double frequency = 0.01; // Hz
  double offset = 0.0;     // m

  void validate() const;
  double path_difference(double t_seconds) const;
  /// Path difference ramps up (+1) or down (-1) at t; 0 for a fixed scan.
  int direction(double t_seconds) const;
  /// Index of the monotonic half-ramp containing t.
  std::int64_t segment(double t_seconds) const;
};

struct VisibilitySample {
  double delay = 0.0;       // s
  double visibility = 1.0;  // |Fourier transform of the normalized spectrum|
};

VisibilitySample visibility_from_spectrum(const SpectralLine& line, double delay);

/// Interference phase omega_0 * tau for a given path difference, computed as
/// 2 pi * path / lambda to avoid an extra rounding through the speed of light.
double interference_phase(const SpectralLine& line, double path_difference);

/// Probability that a photon leaves through the output port toward the
/// detectors: (1 + v(tau) cos(omega_0 tau)) / 2 with tau = path_difference / c.
double michelson_exit_prob(const SpectralLine& line, double path_difference);

/// Per-photon Bernoulli self-interference using the scan position at each
/// photon's timestamp. Signal photons interfere according to `line`;
/// background photons are treated as broadband and exit with probability 1/2;
/// dark events pass unchanged.
EventStream michelson_transmit(const EventStream& stream, const SpectralLine& line, const ScanWaveform& scan,
                               std::uint64_t seed);

/// Routes each event to the first output with probability `reflectance`.
std::pair<EventStream, EventStream> beamsplitter_route(const EventStream& stream, double reflectance,
                                                       std::uint64_t seed);

/// Tag-dependent thinning; dark events are unaffected.
EventStream bandpass_filter(const EventStream& stream, double signal_transmission, double background_transmission,
                            std::uint64_t seed);

}  // namespace photonlab
