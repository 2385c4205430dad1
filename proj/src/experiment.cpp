#include "photonlab/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <fmt/format.h>

#include "photonlab/emitters.hpp"
#include "photonlab/errors.hpp"
#include "photonlab/optics.hpp"
#include "photonlab/rng.hpp"

namespace photonlab {
namespace {

constexpr int kBootstrapDraws = 400;
constexpr std::uint64_t kBootstrapSeed = 0x76697369'62696c74ULL;
constexpr std::size_t kMinSamplesPerFringe = 6;

struct FringeFit {
  double beta = 0.0;   // cosine amplitude / mean
  double delta = 0.0;  // sine amplitude / mean
};

// Solves the 3x3 normal equations of y = a + b cos(phi) + c sin(phi).
std::optional<std::array<double, 3>> fit_sinusoid(std::span<const double> phi, std::span<const double> y) {
  std::array<std::array<double, 4>, 3> m{};
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const std::array<double, 3> x{1.0, std::cos(phi[i]), std::sin(phi[i])};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += x[r] * x[c];
      m[r][3] += x[r] * y[i];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-9 * static_cast<double>(phi.size())) return std::nullopt;
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return std::array<double, 3>{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

// Debiased modulus of the mean (beta, delta) vector.
double debiased_visibility(std::span<const FringeFit> fits, std::span<const std::size_t> pick) {
  const auto n = static_cast<double>(pick.size());
  double mb = 0.0;
  double md = 0.0;
  for (std::size_t i : pick) {
    mb += fits[i].beta;
    md += fits[i].delta;
  }
  mb /= n;
  md /= n;
  double vb = 0.0;
  double vd = 0.0;
  for (std::size_t i : pick) {
    vb += (fits[i].beta - mb) * (fits[i].beta - mb);
    vd += (fits[i].delta - md) * (fits[i].delta - md);
  }
  // Variance of the means: sample variance / n.
  const double noise = (vb + vd) / ((n - 1.0) * n);
  return std::sqrt(std::max(0.0, mb * mb + md * md - noise));
}

}  // namespace

std::uint64_t resolved_seed(const ExperimentConfig& cfg) { return cfg.seed.value_or(0); }

ChannelStreams simulate_channels(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  EventStream photons = generate(cfg.emitter, cfg.duration, derive_seed(seed, "emitter"));
  ChannelStreams out;
  out.emitted = photons.size();
  photons = add_background(photons, cfg.background_rate, derive_seed(seed, "background"));
  photons = bandpass_filter(photons, cfg.bandpass.signal_transmission, cfg.bandpass.background_transmission,
                            derive_seed(seed, "bandpass"));
  photons = michelson_transmit(photons, cfg.line, cfg.scan, derive_seed(seed, "michelson"));
  auto [a, b] = beamsplitter_route(photons, cfg.splitter_reflectance, derive_seed(seed, "splitter"));
  out.a = detect(a, cfg.detectors[0], derive_seed(seed, "detector_a"));
  out.b = detect(b, cfg.detectors[1], derive_seed(seed, "detector_b"));
  return out;
}

RunResult run_combined(const ExperimentConfig& cfg) {
  RunResult result;
  result.seed = resolved_seed(cfg);
  result.config_hash = config_hash(cfg);
  result.config_echo = to_json(cfg);

  ChannelStreams channels = simulate_channels(cfg, result.seed);
  result.emitted = channels.emitted;
  result.channel_a = std::move(channels.a);
  result.channel_b = std::move(channels.b);

  result.histogram = build_histogram(cfg.histogram.mode, result.channel_a, result.channel_b, cfg.histogram.bin_width,
                                     cfg.histogram.range);
  // A scanned interferometer modulates both arms together, so accidentals are
  // counted from the rates in each fringe window rather than the run averages.
  const bool scanned = cfg.scan.kind != ScanKind::fixed && cfg.scan.amplitude > 0.0;
  result.windowed_normalization = scanned;
  if (scanned) {
    const double expected = windowed_accidentals(result.channel_a, result.channel_b, cfg.histogram.bin_width,
                                                 seconds_to_ps(cfg.fringe_window));
    result.g2 = normalize_g2(result.histogram, expected);
  } else {
    result.g2 = normalize_g2(result.histogram);
  }
  double sum = 0.0;
  for (const auto& bin : result.g2.bins) sum += bin.g2;
  result.g2_mean = sum / static_cast<double>(result.g2.bins.size());

  std::optional<Picoseconds> period;
  if (const auto* p = std::get_if<PulsedEmitterConfig>(&cfg.emitter)) period = p->rep_period;
  if (const auto* f = std::get_if<FockPulseConfig>(&cfg.emitter)) period = f->rep_period;
  if (period && result.histogram.range() >= 2 * *period) {
    result.peaks = pulsed_peak_areas(result.histogram, *period);
    result.g2_zero = {result.peaks->central_ratio, result.peaks->ratio_error};
    result.g2_zero_estimator = ZeroDelayEstimator::peak_ratio;
  } else {
    result.g2_zero = zero_delay_g2(result.histogram, result.g2.accidentals_per_bin, cfg.histogram.zero_window);
    result.g2_zero_estimator = ZeroDelayEstimator::window;
  }
  result.classicality = classical_bounds_check(result.g2, 3.0, result.g2_zero);

  result.fringe = count_rate_trace(result.channel_a, cfg.fringe_window);
  try {
    result.visibility = extract_visibility(result.fringe, cfg.scan, cfg.line);
  } catch (const InsufficientDataError&) {
    result.visibility.reset();
  }
  return result;
}

VisibilityFit extract_visibility(const FringeTrace& trace, const ScanWaveform& scan, const SpectralLine& line) {
  scan.validate();
  line.validate();
  const double lambda = line.wavelength_m();

  // Group windows by (monotonic ramp, wavelength index) in time order.
  std::vector<FringeFit> fits;
  std::vector<double> phi;
  std::vector<double> y;
  double x_min = 0.0;
  double x_max = 0.0;
  auto close_group = [&] {
    if (phi.size() >= kMinSamplesPerFringe && x_max - x_min >= 0.5 * lambda) {
      if (auto p = fit_sinusoid(phi, y); p && (*p)[0] > 0.0) {
        fits.push_back({(*p)[1] / (*p)[0], (*p)[2] / (*p)[0]});
      }
    }
    phi.clear();
    y.clear();
  };
  std::optional<std::pair<std::int64_t, std::int64_t>> current;
  for (const auto& s : trace.samples) {
    const double t = s.window_start + 0.5 * trace.window;
    const double x = scan.path_difference(t);
    const std::pair<std::int64_t, std::int64_t> key{scan.segment(t),
                                                    static_cast<std::int64_t>(std::floor(x / lambda))};
    if (current != key) {
      close_group();
      current = key;
      x_min = x_max = x;
    }
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
    phi.push_back(interference_phase(line, x));
    y.push_back(static_cast<double>(s.counts));
  }
  close_group();

  if (fits.size() < 3) {
    throw InsufficientDataError(
        fmt::format("visibility fit needs at least 3 fringe neighborhoods, found {}", fits.size()));
  }

  std::vector<std::size_t> all(fits.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  VisibilityFit out;
  out.fringes = static_cast<int>(fits.size());
  out.visibility = debiased_visibility(fits, all);

  Rng rng(kBootstrapSeed);
  std::vector<std::size_t> pick(fits.size());
  double s1 = 0.0;
  double s2 = 0.0;
  for (int draw = 0; draw < kBootstrapDraws; ++draw) {
    for (auto& p : pick) p = static_cast<std::size_t>(rng.uniform() * static_cast<double>(fits.size()));
    const double v = debiased_visibility(fits, pick);
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / kBootstrapDraws;
  out.error = std::sqrt(std::max(0.0, s2 / kBootstrapDraws - mean * mean));
  return out;
}

std::vector<SweepPoint> sweep_visibility(const ExperimentConfig& cfg, std::span<const double> path_differences) {
  const std::uint64_t master = resolved_seed(cfg);
  std::vector<SweepPoint> out;
  out.reserve(path_differences.size());
  for (std::size_t i = 0; i < path_differences.size(); ++i) {
    const double d = path_differences[i];
    if (!std::isfinite(d) || d < 0.0) throw ConfigError("sweep: path differences must be >= 0");
    ExperimentConfig point = cfg;
    point.scan.offset = d;
    const ChannelStreams ch = simulate_channels(point, derive_seed(master, fmt::format("sweep/{}", i)));
    const FringeTrace trace = count_rate_trace(ch.a, point.fringe_window);
    out.push_back({d, d / kSpeedOfLight, extract_visibility(trace, point.scan, point.line)});
  }
  return out;
}

int count_fringes(const FringeTrace& trace, double t_begin, double t_end) {
  std::vector<double> y;
  for (const auto& s : trace.samples) {
    if (s.window_start >= t_begin && s.window_start < t_end) y.push_back(static_cast<double>(s.counts));
  }
  if (y.size() < 3) return 0;
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double mid = 0.5 * (*lo_it + *hi_it);
  const double band = 0.25 * (*hi_it - *lo_it);
  if (band <= 0.0) return 0;
  int crossings = 0;
  bool high = y.front() > mid;
  for (double v : y) {
    if (!high && v > mid + band) {
      high = true;
      ++crossings;
    } else if (high && v < mid - band) {
      high = false;
    }
  }
  return crossings;
}

EventStream gate_by_phase(const EventStream& clicks, const SpectralLine& line, const ScanWaveform& scan,
                          FringePhase phase) {
  std::vector<Event> kept;
  for (const auto& e : clicks) {
    const double c = std::cos(interference_phase(line, scan.path_difference(ps_to_seconds(e.time))));
    if ((phase == FringePhase::constructive && c > 0.0) || (phase == FringePhase::destructive && c < 0.0)) {
      kept.push_back(e);
    }
  }
  return EventStream(std::move(kept), clicks.duration());
}

ShapeComparison compare_shapes(const CoincidenceHistogram& a, const CoincidenceHistogram& b) {
  if (a.bin_width != b.bin_width || a.half_bins != b.half_bins) {
    throw ConfigError("shape comparison needs identical binning");
  }
  const auto ta = static_cast<double>(a.total());
  const auto tb = static_cast<double>(b.total());
  if (ta == 0.0 || tb == 0.0) throw NormalizationError("shape comparison: empty histogram");
  ShapeComparison out;
  out.z.resize(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ca = static_cast<double>(a.counts[i]);
    const auto cb = static_cast<double>(b.counts[i]);
    const double var = ca / (ta * ta) + cb / (tb * tb);
    if (var <= 0.0) continue;
    out.z[i] = (ca / ta - cb / tb) / std::sqrt(var);
    if (std::abs(out.z[i]) > out.max_abs_z) {
      out.max_abs_z = std::abs(out.z[i]);
      out.worst_bin = i;
    }
  }
  return out;
}

nlohmann::json summary_json(const RunResult& r) {
  nlohmann::json s;
  s["config_hash"] = r.config_hash;
  s["seed"] = r.seed;
  s["rng"] = kRngAlgorithm;
  s["emitted_photons"] = r.emitted;
  s["clicks_a"] = r.channel_a.size();
  s["clicks_b"] = r.channel_b.size();
  s["coincidences"] = r.histogram.total();
  s["histogram_mode"] = to_string(r.histogram.mode);
  s["g2_zero"] = r.g2_zero.value;
  s["g2_zero_error"] = r.g2_zero.error;
  s["g2_zero_estimator"] = r.g2_zero_estimator == ZeroDelayEstimator::window ? "window" : "peak_ratio";
  s["g2_mean"] = r.g2_mean;
  s["accidentals_per_bin"] = r.g2.accidentals_per_bin;
  s["normalization"] = r.windowed_normalization ? "windowed_rates" : "run_average";
  s["bound_violations"] = r.classicality.violations.size();
  s["bound_threshold_sigma"] = r.classicality.threshold;
  s["nonclassical"] = r.classicality.nonclassical;
  s["single_photon"] = r.classicality.single_photon;
  s["verdict"] = r.classicality.single_photon ? "single-photon" : (r.classicality.nonclassical ? "nonclassical"
                                                                                                 : "classical");
  if (r.visibility) {
    s["visibility"] = {{"value", r.visibility->visibility},
                       {"error", r.visibility->error},
                       {"fringes", r.visibility->fringes}};
  } else {
    s["visibility"] = nullptr;
  }
  if (r.peaks) {
    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& p : r.peaks->peaks) peaks.push_back({{"index", p.index}, {"area", p.area}});
    s["peaks"] = peaks;
  }
  s["fringe_window"] = r.fringe.window;
  s["fringe_total_counts"] = r.fringe.total_counts();
  return s;
}

}  // namespace photonlab
