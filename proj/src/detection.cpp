#include "photonlab/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "photonlab/emitters.hpp"
#include "photonlab/errors.hpp"
#include "photonlab/rng.hpp"

namespace photonlab {

void DetectorConfig::validate() const {
  if (!std::isfinite(efficiency) || efficiency < 0.0 || efficiency > 1.0) {
    throw ConfigError("detector: efficiency must lie in [0, 1]");
  }
  if (!std::isfinite(jitter_fwhm) || jitter_fwhm < 0.0) throw ConfigError("detector: jitter_fwhm must be >= 0");
  if (!std::isfinite(dead_time) || dead_time < 0.0) throw ConfigError("detector: dead_time must be >= 0");
  if (!std::isfinite(dark_rate) || dark_rate < 0.0) throw ConfigError("detector: dark_rate must be >= 0");
}

double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2)); }

EventStream apply_dead_time(const EventStream& stream, double dead_time) {
  if (dead_time <= 0.0) return stream;
  std::vector<Event> out;
  out.reserve(stream.size());
  bool have_last = false;
  Picoseconds last = 0;
  for (const auto& e : stream) {
    if (have_last && static_cast<double>(e.time - last) < dead_time) continue;
    out.push_back(e);
    last = e.time;
    have_last = true;
  }
  return EventStream(std::move(out), stream.duration());
}

EventStream detect(const EventStream& stream, const DetectorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const IndexedRng efficiency_rng(derive_seed(seed, "efficiency"));
  const IndexedRng jitter_rng(derive_seed(seed, "jitter"));
  const double sigma = fwhm_to_sigma(cfg.jitter_fwhm);
  const Picoseconds duration = stream.duration();

  std::vector<Event> clicks;
  clicks.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (!efficiency_rng.bernoulli(i, cfg.efficiency)) continue;
    Event e = stream[i];
    if (sigma > 0.0) {
      const double t = static_cast<double>(e.time) + sigma * jitter_rng.normal(i);
      e.time = std::clamp(static_cast<Picoseconds>(std::llround(t)), Picoseconds{0}, duration);
    }
    clicks.push_back(e);
  }
  if (sigma > 0.0) {
    std::stable_sort(clicks.begin(), clicks.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
  }
  EventStream jittered(std::move(clicks), duration);
  if (cfg.dark_rate > 0.0) {
    jittered = merge(jittered, poisson_stream(cfg.dark_rate, duration, EventTag::dark, derive_seed(seed, "dark")));
  }
  return apply_dead_time(jittered, cfg.dead_time);
}

std::uint64_t FringeTrace::total_counts() const {
  std::uint64_t total = 0;
  for (const auto& s : samples) total += s.counts;
  return total;
}

FringeTrace count_rate_trace(const EventStream& stream, double window) {
  if (!std::isfinite(window) || window <= 0.0) throw ConfigError("count rate trace: window must be > 0");
  const Picoseconds width = seconds_to_ps(window);
  if (width <= 0) throw ConfigError("count rate trace: window shorter than 1 ps");

  FringeTrace trace;
  trace.window = window;
  const std::int64_t n = stream.duration() / width;
  trace.samples.resize(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    trace.samples[static_cast<std::size_t>(k)].window_start = ps_to_seconds(k * width);
  }
  for (const auto& e : stream) {
    const std::int64_t k = e.time / width;
    if (k < n) ++trace.samples[static_cast<std::size_t>(k)].counts;
  }
  return trace;
}

}  // namespace photonlab
