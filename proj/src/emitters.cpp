#include "photonlab/emitters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fmt/format.h>

#include "photonlab/errors.hpp"
#include "photonlab/rng.hpp"

namespace photonlab {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

Picoseconds checked_duration(double duration) {
  if (!std::isfinite(duration) || duration < 0.0) {
    throw ConfigError(fmt::format("duration must be a nonnegative number of seconds, got {}", duration));
  }
  return seconds_to_ps(duration);
}

Picoseconds to_tick(double t_ps) { return static_cast<Picoseconds>(std::floor(t_ps)); }

void sort_by_time(std::vector<Event>& events) {
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
}

}  // namespace

void CoherentSourceConfig::validate() const {
  require(std::isfinite(rate) && rate > 0.0, "coherent source: rate must be > 0");
}

void ThermalSourceConfig::validate() const {
  require(std::isfinite(rate) && rate > 0.0, "thermal source: rate must be > 0");
  require(std::isfinite(coherence_time) && coherence_time > 0.0, "thermal source: coherence_time must be > 0");
  require(grid_divisions >= 1, "thermal source: grid_divisions must be >= 1");
}

void TwoLevelCwConfig::validate() const {
  require(std::isfinite(pump_rate) && pump_rate > 0.0, "two-level source: pump_rate must be > 0");
  require(std::isfinite(decay_rate) && decay_rate > 0.0, "two-level source: decay_rate must be > 0");
  require(is_probability(quantum_efficiency), "two-level source: quantum_efficiency must lie in [0, 1]");
}

void PulsedEmitterConfig::validate() const {
  require(rep_period > 0, "pulsed source: rep_period must be > 0");
  require(std::isfinite(lifetime) && lifetime > 0.0, "pulsed source: lifetime must be > 0");
  require(is_probability(emission_prob), "pulsed source: emission_prob must lie in [0, 1]");
  require(is_probability(reexcitation_prob), "pulsed source: reexcitation_prob must lie in [0, 1]");
  require(std::isfinite(reexcitation_delay) && reexcitation_delay > 0.0,
          "pulsed source: reexcitation_delay must be > 0");
}

void FockPulseConfig::validate() const {
  require(n >= 1, "fock source: n must be >= 1");
  require(rep_period > 0, "fock source: rep_period must be > 0");
  require(std::isfinite(lifetime) && lifetime > 0.0, "fock source: lifetime must be > 0");
}

EventStream poisson_stream(double rate, Picoseconds duration, EventTag tag, std::uint64_t seed) {
  std::vector<Event> events;
  if (rate <= 0.0 || duration <= 0) return EventStream(std::move(events), std::max<Picoseconds>(duration, 0));
  Rng rng(seed);
  const double mean_gap_ps = kPsPerSecond / rate;
  events.reserve(static_cast<std::size_t>(rate * ps_to_seconds(duration) * 1.01) + 16);
  double t = 0.0;
  for (;;) {
    t += rng.exponential(mean_gap_ps);
    const Picoseconds tick = to_tick(t);
    if (tick > duration) break;
    events.push_back({tick, tag});
  }
  return EventStream(std::move(events), duration);
}

EventStream gen_coherent(const CoherentSourceConfig& cfg, double duration, std::uint64_t seed) {
  cfg.validate();
  return poisson_stream(cfg.rate, checked_duration(duration), EventTag::signal, seed);
}

EventStream gen_thermal(const ThermalSourceConfig& cfg, double duration, std::uint64_t seed) {
  cfg.validate();
  const Picoseconds total = checked_duration(duration);
  std::vector<Event> events;
  if (total == 0) return EventStream(std::move(events), 0);

  Rng rng(seed);
  const double tc_ps = cfg.coherence_time * kPsPerSecond;
  const double dt = tc_ps / cfg.grid_divisions;
  // Exact Ornstein-Uhlenbeck update for a unit-power complex Gaussian field.
  const double decay = std::exp(-dt / tc_ps);
  const double kick = std::sqrt((1.0 - decay * decay) / 2.0);
  const double rate_per_ps = cfg.rate / kPsPerSecond;

  std::complex<double> field(rng.normal() * std::sqrt(0.5), rng.normal() * std::sqrt(0.5));
  double intensity_lo = rate_per_ps * std::norm(field);
  double budget = rng.exponential(1.0);  // unit-rate clock in candidate mass
  const auto cells = static_cast<std::int64_t>(std::ceil(static_cast<double>(total) / dt));
  events.reserve(static_cast<std::size_t>(cfg.rate * duration * 1.05) + 16);

  for (std::int64_t cell = 0; cell < cells; ++cell) {
    field = decay * field + std::complex<double>(kick * rng.normal(), kick * rng.normal());
    const double intensity_hi = rate_per_ps * std::norm(field);
    const double bound = std::max(intensity_lo, intensity_hi);
    const double cell_start = static_cast<double>(cell) * dt;
    double s = 0.0;
    // Thinning against the cell's max of the linearly interpolated intensity.
    while (bound > 0.0 && budget <= bound * (dt - s)) {
      s += budget / bound;
      budget = rng.exponential(1.0);
      const double lambda = intensity_lo + (intensity_hi - intensity_lo) * (s / dt);
      if (rng.uniform() * bound < lambda) {
        const Picoseconds tick = to_tick(cell_start + s);
        if (tick <= total) events.push_back({tick, EventTag::signal});
      }
    }
    if (bound > 0.0) budget -= bound * (dt - s);
    intensity_lo = intensity_hi;
  }
  return EventStream(std::move(events), total);
}

EventStream gen_two_level_cw(const TwoLevelCwConfig& cfg, double duration, std::uint64_t seed) {
  cfg.validate();
  const Picoseconds total = checked_duration(duration);
  std::vector<Event> events;
  if (total == 0 || cfg.quantum_efficiency == 0.0) return EventStream(std::move(events), total);

  Rng rng(seed);
  const double pump_mean_ps = kPsPerSecond / cfg.pump_rate;
  const double decay_mean_ps = kPsPerSecond / cfg.decay_rate;
  const double emitted_rate = cfg.pump_rate * cfg.decay_rate / (cfg.pump_rate + cfg.decay_rate);
  events.reserve(static_cast<std::size_t>(emitted_rate * cfg.quantum_efficiency * duration * 1.05) + 16);

  // Each cycle: ground -> excited after Exp(P), excited -> ground after Exp(Gamma),
  // emitting one photon. Cycles between detected photons are geometric in the
  // quantum efficiency; m cycles sum to Gamma(m)/P + Gamma(m)/Gamma.
  double t = 0.0;
  for (;;) {
    const std::uint64_t cycles = rng.geometric_trials(cfg.quantum_efficiency);
    if (cycles == 1) {
      t += rng.exponential(pump_mean_ps) + rng.exponential(decay_mean_ps);
    } else {
      const auto m = static_cast<double>(cycles);
      t += rng.gamma(m) * pump_mean_ps + rng.gamma(m) * decay_mean_ps;
    }
    const Picoseconds tick = to_tick(t);
    if (tick > total) break;
    events.push_back({tick, EventTag::signal});
  }
  return EventStream(std::move(events), total);
}

EventStream gen_pulsed(const PulsedEmitterConfig& cfg, double duration, std::uint64_t seed) {
  cfg.validate();
  const Picoseconds total = checked_duration(duration);
  if (total < cfg.rep_period) throw ConfigError("pulsed source: duration must be at least one rep_period");

  std::vector<Event> events;
  if (cfg.emission_prob == 0.0) return EventStream(std::move(events), total);
  const std::int64_t pulses = total / cfg.rep_period + 1;  // pulses at k*T for k*T <= duration
  const double expected = static_cast<double>(pulses) * cfg.emission_prob * (1.0 + cfg.reexcitation_prob);
  events.reserve(static_cast<std::size_t>(expected * 1.05) + 16);

  Rng rng(seed);
  std::int64_t pulse = -1;
  for (;;) {
    pulse += static_cast<std::int64_t>(rng.geometric_trials(cfg.emission_prob));
    if (pulse >= pulses) break;
    const double t0 = static_cast<double>(pulse * cfg.rep_period);
    const double first = t0 + rng.exponential(cfg.lifetime);
    if (to_tick(first) <= total) events.push_back({to_tick(first), EventTag::signal});
    if (cfg.reexcitation_prob > 0.0 && rng.bernoulli(cfg.reexcitation_prob)) {
      const double second = first + rng.exponential(cfg.reexcitation_delay);
      if (to_tick(second) <= total) events.push_back({to_tick(second), EventTag::signal});
    }
  }
  sort_by_time(events);
  return EventStream(std::move(events), total);
}

EventStream gen_fock_train(const FockPulseConfig& cfg, double duration, std::uint64_t seed) {
  cfg.validate();
  const Picoseconds total = checked_duration(duration);
  if (total < cfg.rep_period) throw ConfigError("fock source: duration must be at least one rep_period");

  const std::int64_t pulses = total / cfg.rep_period + 1;
  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(pulses * cfg.n));
  Rng rng(seed);
  for (std::int64_t k = 0; k < pulses; ++k) {
    const double t0 = static_cast<double>(k * cfg.rep_period);
    for (int i = 0; i < cfg.n; ++i) {
      const Picoseconds tick = to_tick(t0 + rng.exponential(cfg.lifetime));
      if (tick <= total) events.push_back({tick, EventTag::signal});
    }
  }
  sort_by_time(events);
  return EventStream(std::move(events), total);
}

EventStream generate(const EmitterConfig& cfg, double duration, std::uint64_t seed) {
  return std::visit(
      [&](const auto& c) -> EventStream {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CoherentSourceConfig>) return gen_coherent(c, duration, seed);
        else if constexpr (std::is_same_v<T, ThermalSourceConfig>) return gen_thermal(c, duration, seed);
        else if constexpr (std::is_same_v<T, TwoLevelCwConfig>) return gen_two_level_cw(c, duration, seed);
        else if constexpr (std::is_same_v<T, PulsedEmitterConfig>) return gen_pulsed(c, duration, seed);
        else return gen_fock_train(c, duration, seed);
      },
      cfg);
}

void validate(const EmitterConfig& cfg) {
  std::visit([](const auto& c) { c.validate(); }, cfg);
}

double mean_rate(const EmitterConfig& cfg) {
  return std::visit(
      [](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CoherentSourceConfig> || std::is_same_v<T, ThermalSourceConfig>) {
          return c.rate;
        } else if constexpr (std::is_same_v<T, TwoLevelCwConfig>) {
          return c.quantum_efficiency * c.pump_rate * c.decay_rate / (c.pump_rate + c.decay_rate);
        } else if constexpr (std::is_same_v<T, PulsedEmitterConfig>) {
          return c.emission_prob * (1.0 + c.reexcitation_prob) * kPsPerSecond / static_cast<double>(c.rep_period);
        } else {
          return c.n * kPsPerSecond / static_cast<double>(c.rep_period);
        }
      },
      cfg);
}

EventStream add_background(const EventStream& stream, double rate, std::uint64_t seed) {
  if (!std::isfinite(rate) || rate < 0.0) throw ConfigError("background rate must be >= 0");
  if (rate == 0.0) return stream;
  return merge(stream, poisson_stream(rate, stream.duration(), EventTag::background, seed));
}

}  // namespace photonlab
