#include "photonlab/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <fmt/format.h>

#include "photonlab/errors.hpp"
#include "photonlab/rng.hpp"

namespace photonlab {
namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

template <typename Keep>
EventStream thin(const EventStream& stream, Keep keep) {
  std::vector<Event> out;
  out.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (keep(i, stream[i])) out.push_back(stream[i]);
  }
  return EventStream(std::move(out), stream.duration());
}

}  // namespace

void SpectralLine::validate() const {
  if (!std::isfinite(center_wavelength_nm) || center_wavelength_nm <= 0.0) {
    throw ConfigError("spectral line: center_wavelength must be > 0");
  }
  if (!std::isfinite(linewidth) || linewidth < 0.0) {
    throw ConfigError("spectral line: linewidth must be finite and >= 0 (spectrum not normalizable)");
  }
}

double SpectralLine::angular_frequency() const {
  return 2.0 * std::numbers::pi * kSpeedOfLight / wavelength_m();
}

void ScanWaveform::validate() const {
  if (!std::isfinite(amplitude) || amplitude < 0.0) throw ConfigError("scan: amplitude must be >= 0");
  if (!std::isfinite(offset)) throw ConfigError("scan: offset must be finite");
  if (kind == ScanKind::triangular && (!std::isfinite(frequency) || frequency <= 0.0)) {
    throw ConfigError("scan: triangular scan needs frequency > 0");
  }
}

double ScanWaveform::path_difference(double t) const {
  if (kind == ScanKind::fixed) return offset;
  const double cycles = t * frequency;
  const double phase = cycles - std::floor(cycles);
  double tri = 0.0;
  if (phase < 0.25) tri = 4.0 * phase;
  else if (phase < 0.75) tri = 2.0 - 4.0 * phase;
  else tri = 4.0 * phase - 4.0;
  return offset + amplitude * tri;
}

std::int64_t ScanWaveform::segment(double t) const {
  if (kind == ScanKind::fixed) return 0;
  return static_cast<std::int64_t>(std::floor(2.0 * t * frequency + 0.5));
}

int ScanWaveform::direction(double t) const {
  if (kind == ScanKind::fixed || amplitude == 0.0) return 0;
  return segment(t) % 2 == 0 ? 1 : -1;
}

VisibilitySample visibility_from_spectrum(const SpectralLine& line, double delay) {
  line.validate();
  if (!std::isfinite(delay) || delay < 0.0) throw ConfigError("visibility: delay must be >= 0");
  double v = 1.0;
  switch (line.shape) {
    case LineShape::lorentzian:
      v = std::exp(-line.linewidth * delay);
      break;
    case LineShape::gaussian: {
      // HWHM gamma -> standard deviation gamma / sqrt(2 ln 2); |FT| = exp(-sigma^2 tau^2 / 2).
      const double x = line.linewidth * delay;
      v = std::exp(-x * x / (4.0 * std::numbers::ln2));
      break;
    }
    case LineShape::delta:
      v = 1.0;
      break;
  }
  return {delay, v};
}

double interference_phase(const SpectralLine& line, double path_difference) {
  return 2.0 * std::numbers::pi * path_difference / line.wavelength_m();
}

double michelson_exit_prob(const SpectralLine& line, double path_difference) {
  const double tau = std::abs(path_difference) / kSpeedOfLight;
  const double v = visibility_from_spectrum(line, tau).visibility;
  const double p = 0.5 * (1.0 + v * std::cos(interference_phase(line, path_difference)));
  return std::clamp(p, 0.0, 1.0);
}

EventStream michelson_transmit(const EventStream& stream, const SpectralLine& line, const ScanWaveform& scan,
                               std::uint64_t seed) {
  line.validate();
  scan.validate();
  const IndexedRng rng(seed);
  return thin(stream, [&](std::size_t i, const Event& e) {
    switch (e.tag) {
      case EventTag::signal:
        return rng.bernoulli(i, michelson_exit_prob(line, scan.path_difference(ps_to_seconds(e.time))));
      case EventTag::background:
        return rng.bernoulli(i, 0.5);
      case EventTag::dark:
        return true;
    }
    return true;
  });
}

std::pair<EventStream, EventStream> beamsplitter_route(const EventStream& stream, double reflectance,
                                                       std::uint64_t seed) {
  if (!is_probability(reflectance)) throw ConfigError("beam splitter: reflectance must lie in [0, 1]");
  const IndexedRng rng(seed);
  std::vector<Event> a;
  std::vector<Event> b;
  a.reserve(static_cast<std::size_t>(static_cast<double>(stream.size()) * reflectance) + 16);
  b.reserve(static_cast<std::size_t>(static_cast<double>(stream.size()) * (1.0 - reflectance)) + 16);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    (rng.bernoulli(i, reflectance) ? a : b).push_back(stream[i]);
  }
  return {EventStream(std::move(a), stream.duration()), EventStream(std::move(b), stream.duration())};
}

EventStream bandpass_filter(const EventStream& stream, double signal_transmission, double background_transmission,
                            std::uint64_t seed) {
  if (!is_probability(signal_transmission) || !is_probability(background_transmission)) {
    throw ConfigError("bandpass filter: transmissions must lie in [0, 1]");
  }
  const IndexedRng rng(seed);
  return thin(stream, [&](std::size_t i, const Event& e) {
    switch (e.tag) {
      case EventTag::signal: return rng.bernoulli(i, signal_transmission);
      case EventTag::background: return rng.bernoulli(i, background_transmission);
      case EventTag::dark: return true;
    }
    return true;
  });
}

}  // namespace photonlab
