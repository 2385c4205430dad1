#include "photonlab/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "photonlab/errors.hpp"

namespace photonlab {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void require_sorted(const EventStream& s, const char* name) {
  if (!s.is_valid()) throw ParseError(fmt::format("{} stream is not ordered", name));
}

// exp(a) * erfc(x), stable when exp(a) overflows or erfc(x) underflows.
double exp_erfc(double a, double x) {
  if (x < 20.0 && a < 600.0) return std::exp(a) * std::erfc(x);
  const double x2 = x * x;
  const double erfcx = (1.0 - 0.5 / x2 + 0.75 / (x2 * x2)) / (x * std::sqrt(std::numbers::pi));
  return std::exp(a - x2) * erfcx;
}

}  // namespace

CoincidenceHistogram CoincidenceHistogram::empty(Picoseconds bin_width, Picoseconds range) {
  if (bin_width <= 0) throw ConfigError("histogram: bin_width must be > 0");
  if (range < 0) throw ConfigError("histogram: range must be >= 0");
  CoincidenceHistogram h;
  h.bin_width = bin_width;
  h.half_bins = range / bin_width;
  h.counts.assign(static_cast<std::size_t>(2 * h.half_bins + 1), 0);
  return h;
}

std::uint64_t CoincidenceHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::optional<std::size_t> CoincidenceHistogram::bin_of(Picoseconds delay) const {
  const std::int64_t k = floor_div(delay + bin_width / 2, bin_width);
  if (k < -half_bins || k > half_bins) return std::nullopt;
  return static_cast<std::size_t>(k + half_bins);
}

CoincidenceHistogram start_stop_histogram(const EventStream& start, const EventStream& stop, Picoseconds bin_width,
                                          Picoseconds range) {
  require_sorted(start, "start");
  require_sorted(stop, "stop");
  auto h = CoincidenceHistogram::empty(bin_width, range);
  h.mode = HistogramMode::start_stop;
  h.n_starts = start.size();
  h.n_stops = stop.size();
  h.duration = std::max(start.duration(), stop.duration());

  // Positive delays: first stop strictly after each start.
  std::size_t j = 0;
  for (const auto& s : start) {
    while (j < stop.size() && stop[j].time <= s.time) ++j;
    if (j == stop.size()) break;
    if (auto bin = h.bin_of(stop[j].time - s.time)) ++h.counts[*bin];
  }
  // Negative delays: the same measurement with the roles swapped.
  std::size_t i = 0;
  for (const auto& p : stop) {
    while (i < start.size() && start[i].time <= p.time) ++i;
    if (i == start.size()) break;
    if (auto bin = h.bin_of(p.time - start[i].time)) ++h.counts[*bin];
  }
  return h;
}

namespace {

CoincidenceHistogram pair_histogram(const EventStream& a, const EventStream& b, Picoseconds bin_width,
                                    Picoseconds range, bool skip_same_index) {
  auto h = CoincidenceHistogram::empty(bin_width, range);
  h.n_starts = a.size();
  h.n_stops = b.size();
  h.duration = std::max(a.duration(), b.duration());
  // Delays covered by bins -K..K: [-K w - w/2, K w + w - w/2).
  const Picoseconds lo = -h.half_bins * bin_width - bin_width / 2;
  const Picoseconds hi = h.half_bins * bin_width + bin_width - bin_width / 2;
  std::size_t first = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Picoseconds t = a[i].time;
    while (first < b.size() && b[first].time - t < lo) ++first;
    for (std::size_t j = first; j < b.size() && b[j].time - t < hi; ++j) {
      if (skip_same_index && j == i) continue;
      const std::int64_t k = floor_div(b[j].time - t + bin_width / 2, bin_width);
      ++h.counts[static_cast<std::size_t>(k + h.half_bins)];
    }
  }
  return h;
}

}  // namespace

CoincidenceHistogram all_pairs_histogram(const EventStream& a, const EventStream& b, Picoseconds bin_width,
                                         Picoseconds range) {
  require_sorted(a, "first");
  require_sorted(b, "second");
  auto h = pair_histogram(a, b, bin_width, range, false);
  h.mode = HistogramMode::all_pairs;
  return h;
}

CoincidenceHistogram autocorrelation_histogram(const EventStream& a, Picoseconds bin_width, Picoseconds range) {
  require_sorted(a, "input");
  auto h = pair_histogram(a, a, bin_width, range, true);
  h.mode = HistogramMode::auto_pairs;
  return h;
}

CoincidenceHistogram build_histogram(HistogramMode mode, const EventStream& a, const EventStream& b,
                                     Picoseconds bin_width, Picoseconds range) {
  switch (mode) {
    case HistogramMode::start_stop: return start_stop_histogram(a, b, bin_width, range);
    case HistogramMode::all_pairs: return all_pairs_histogram(a, b, bin_width, range);
    case HistogramMode::auto_pairs: return autocorrelation_histogram(a, bin_width, range);
  }
  throw ConfigError("unknown histogram mode");
}

CoincidenceHistogram rebin(const CoincidenceHistogram& h, int factor) {
  if (factor < 1 || factor % 2 == 0) throw ConfigError("rebin: factor must be a positive odd integer");
  const std::int64_t half_group = (factor - 1) / 2;
  CoincidenceHistogram out = h;
  out.bin_width = h.bin_width * factor;
  out.half_bins = (h.half_bins - half_group) / factor;
  if (out.half_bins < 0) throw ConfigError("rebin: histogram too narrow for factor");
  out.counts.assign(static_cast<std::size_t>(2 * out.half_bins + 1), 0);
  for (std::int64_t j = -out.half_bins; j <= out.half_bins; ++j) {
    std::uint64_t sum = 0;
    for (std::int64_t k = j * factor - half_group; k <= j * factor + half_group; ++k) {
      sum += h.counts[static_cast<std::size_t>(k + h.half_bins)];
    }
    out.counts[static_cast<std::size_t>(j + out.half_bins)] = sum;
  }
  return out;
}

G2Estimate normalize_g2(const CoincidenceHistogram& h) {
  if (h.n_starts == 0 || h.n_stops == 0 || h.duration <= 0) {
    throw NormalizationError(fmt::format(
        "g2 normalization undefined: n_starts={}, n_stops={}, duration={} ps", h.n_starts, h.n_stops, h.duration));
  }
  // Auto-correlation pairs exclude i == j, so there are n (n - 1) candidates.
  const double n_b = h.mode == HistogramMode::auto_pairs ? static_cast<double>(h.n_stops) - 1.0
                                                         : static_cast<double>(h.n_stops);
  const double expected =
      static_cast<double>(h.n_starts) * n_b * static_cast<double>(h.bin_width) / static_cast<double>(h.duration);
  return normalize_g2(h, expected);
}

G2Estimate normalize_g2(const CoincidenceHistogram& h, double accidentals_per_bin) {
  if (!(accidentals_per_bin > 0.0) || !std::isfinite(accidentals_per_bin)) {
    throw NormalizationError("g2 normalization undefined: zero accidental rate");
  }
  G2Estimate est;
  est.bin_width = h.bin_width;
  est.accidentals_per_bin = accidentals_per_bin;
  est.bins.reserve(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto c = static_cast<double>(h.counts[i]);
    est.bins.push_back({h.tau_center(i), c / accidentals_per_bin, std::sqrt(std::max(c, 1.0)) / accidentals_per_bin});
  }
  return est;
}

double windowed_accidentals(const EventStream& a, const EventStream& b, Picoseconds bin_width, Picoseconds window) {
  if (bin_width <= 0 || window <= 0) throw ConfigError("windowed accidentals: bin_width and window must be > 0");
  const Picoseconds duration = std::max(a.duration(), b.duration());
  if (duration <= 0) throw NormalizationError("windowed accidentals: zero duration");
  const auto windows = static_cast<std::size_t>((duration + window - 1) / window);
  std::vector<double> na(windows, 0.0);
  std::vector<double> nb(windows, 0.0);
  auto fill = [&](const EventStream& s, std::vector<double>& n) {
    for (const auto& e : s) n[std::min(static_cast<std::size_t>(e.time / window), windows - 1)] += 1.0;
  };
  fill(a, na);
  fill(b, nb);
  double sum = 0.0;
  for (std::size_t k = 0; k < windows; ++k) {
    const Picoseconds start = static_cast<Picoseconds>(k) * window;
    const auto length = static_cast<double>(std::min(window, duration - start));
    sum += na[k] * nb[k] / length;
  }
  return sum * static_cast<double>(bin_width);
}

ValueWithError zero_delay_g2(const CoincidenceHistogram& h, Picoseconds half_window) {
  return zero_delay_g2(h, normalize_g2(h).accidentals_per_bin, half_window);
}

ValueWithError zero_delay_g2(const CoincidenceHistogram& h, double accidentals_per_bin, Picoseconds half_window) {
  if (!(accidentals_per_bin > 0.0)) throw NormalizationError("g2 normalization undefined: zero accidental rate");
  double counts = 0.0;
  double expected = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (std::abs(h.tau_center(i)) <= half_window) {
      counts += static_cast<double>(h.counts[i]);
      expected += accidentals_per_bin;
    }
  }
  return {counts / expected, std::sqrt(std::max(counts, 1.0)) / expected};
}

double analytic_g2(const EmitterConfig& model, double tau) {
  return std::visit(
      [tau](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        c.validate();
        const double t = std::abs(tau);
        if constexpr (std::is_same_v<T, CoherentSourceConfig>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, ThermalSourceConfig>) {
          return 1.0 + std::exp(-2.0 * t / c.coherence_time);
        } else if constexpr (std::is_same_v<T, TwoLevelCwConfig>) {
          return 1.0 - std::exp(-(c.pump_rate + c.decay_rate) * t);
        } else {
          const double period = ps_to_seconds(c.rep_period);
          if (std::llround(t / period) != 0) return 1.0;
          if constexpr (std::is_same_v<T, PulsedEmitterConfig>) {
            if (c.emission_prob == 0.0) throw NormalizationError("pulsed source with zero emission probability");
            const double mean = c.emission_prob * (1.0 + c.reexcitation_prob);
            return 2.0 * c.emission_prob * c.reexcitation_prob / (mean * mean);
          } else {
            return 1.0 - 1.0 / c.n;
          }
        }
      },
      model);
}

double two_level_g2_convolved(double k, double sigma, double tau) {
  if (sigma <= 0.0) return 1.0 - std::exp(-k * std::abs(tau));
  const double s2 = sigma * std::sqrt(2.0);
  const double base = 0.5 * k * k * sigma * sigma;
  const double left = exp_erfc(base - k * tau, (k * sigma * sigma - tau) / s2);
  const double right = exp_erfc(base + k * tau, (k * sigma * sigma + tau) / s2);
  return 1.0 - 0.5 * (left + right);
}

PeakAnalysis pulsed_peak_areas(const CoincidenceHistogram& h, Picoseconds rep_period) {
  if (rep_period <= 0) throw ConfigError("peak areas: rep_period must be > 0");
  if (h.range() < 2 * rep_period) {
    throw ConfigError(fmt::format("peak areas: histogram range {} ps is below 2 x rep_period ({} ps)", h.range(),
                                  2 * rep_period));
  }
  // Peak k is kept only if its whole window lies inside the histogram span.
  const double span = (static_cast<double>(h.half_bins) + 0.5) * static_cast<double>(h.bin_width);
  const double period = static_cast<double>(rep_period);
  const auto max_peak = static_cast<std::int64_t>(std::floor((span - 0.5 * period) / period));

  std::vector<std::uint64_t> areas(static_cast<std::size_t>(2 * max_peak + 1), 0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double tau = static_cast<double>(h.tau_center(i));
    const auto k = static_cast<std::int64_t>(std::floor(tau / period + 0.5));
    if (k < -max_peak || k > max_peak) continue;
    areas[static_cast<std::size_t>(k + max_peak)] += h.counts[i];
  }

  PeakAnalysis out;
  double side_sum = 0.0;
  for (std::int64_t k = -max_peak; k <= max_peak; ++k) {
    const std::uint64_t a = areas[static_cast<std::size_t>(k + max_peak)];
    out.peaks.push_back({k, a});
    if (k != 0) side_sum += static_cast<double>(a);
  }
  const double side_mean = side_sum / static_cast<double>(2 * max_peak);
  const auto central = static_cast<double>(areas[static_cast<std::size_t>(max_peak)]);
  if (side_mean <= 0.0) throw NormalizationError("peak areas: side peaks are empty");
  out.central_ratio = central / side_mean;
  const double central_term = std::sqrt(std::max(central, 1.0)) / side_mean;
  const double side_term = out.central_ratio / std::sqrt(side_sum);
  out.ratio_error = std::hypot(central_term, side_term);
  return out;
}

PulseWindowG2 pulse_window_g2(const EventStream& stream, Picoseconds rep_period) {
  if (rep_period <= 0) throw ConfigError("pulse window g2: rep_period must be > 0");
  PulseWindowG2 out;
  out.windows = stream.duration() / rep_period;
  if (out.windows == 0) throw InsufficientDataError("pulse window g2: stream shorter than one period");

  std::int64_t current = -1;
  std::uint64_t in_window = 0;
  auto flush = [&] {
    if (in_window > 1) out.same_window_pairs += in_window * (in_window - 1) / 2;
  };
  for (const auto& e : stream) {
    const std::int64_t w = e.time / rep_period;
    if (w >= out.windows) break;
    if (w != current) {
      flush();
      current = w;
      in_window = 0;
    }
    ++in_window;
    ++out.photons;
  }
  flush();
  if (out.photons == 0) throw NormalizationError("pulse window g2: no photons");
  const double windows = static_cast<double>(out.windows);
  const double mean = static_cast<double>(out.photons) / windows;
  out.g2 = (2.0 * static_cast<double>(out.same_window_pairs) / windows) / (mean * mean);
  return out;
}

ClassicalityReport classical_bounds_check(const G2Estimate& g2, double k_sigma, std::optional<ValueWithError> zero) {
  ClassicalityReport report;
  report.k_sigma = k_sigma;
  if (g2.bins.empty()) return report;
  const G2Bin& center = g2.bins[g2.zero_index()];
  const ValueWithError z = zero.value_or(ValueWithError{center.g2, center.error});
  report.g2_zero = z.value;
  report.g2_zero_error = z.error;

  // The one-sided tail of a single k-sigma test is shared across all bins, so
  // classical data trips a flag no more often than one k-sigma test would.
  const double tests = static_cast<double>(g2.bins.size() + (zero ? 1 : 0));
  const double tail = 0.5 * std::erfc(k_sigma / std::numbers::sqrt2) / tests;
  report.threshold = std::max(k_sigma, std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * tail));

  // Under the classical null each bin's spread is set by its expected counts.
  const double expected = g2.accidentals_per_bin;
  auto null_error = [&](double level, double observed_error) {
    return expected > 0.0 ? std::sqrt(std::max(level, 0.0) / expected) : observed_error;
  };

  if (zero) {
    const double below = (1.0 - z.value) / z.error;
    if (z.error > 0.0 && below > report.threshold) {
      report.violations.push_back({g2.zero_index(), 0, BoundKind::below_one, below});
    }
  }
  for (std::size_t i = 0; i < g2.bins.size(); ++i) {
    const G2Bin& b = g2.bins[i];
    const double e1 = null_error(1.0, b.error);
    if (e1 > 0.0) {
      const double below = (1.0 - b.g2) / e1;
      if (below > report.threshold) report.violations.push_back({i, b.tau, BoundKind::below_one, below});
    }
    if (i != g2.zero_index()) {
      const double combined = std::hypot(null_error(z.value, b.error), z.error);
      if (combined > 0.0) {
        const double above = (b.g2 - z.value) / combined;
        if (above > report.threshold) report.violations.push_back({i, b.tau, BoundKind::exceeds_zero_delay, above});
      }
    }
  }
  report.nonclassical = !report.violations.empty();
  report.single_photon = z.value + k_sigma * z.error < 0.5;
  return report;
}

}  // namespace photonlab
