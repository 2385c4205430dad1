// Acceptance gate: each criterion prints one PASS/FAIL line; the exit status
// is nonzero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "photonlab/config.hpp"
#include "photonlab/correlator.hpp"
#include "photonlab/detection.hpp"
#include "photonlab/emitters.hpp"
#include "photonlab/experiment.hpp"
#include "photonlab/io.hpp"
#include "photonlab/optics.hpp"

namespace fs = std::filesystem;
using namespace photonlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr DetectorConfig kIdeal{1.0, 0.0, 0.0, 0.0};
constexpr double kFwhmToSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

ExperimentConfig base_config(std::uint64_t seed, double duration, EmitterConfig emitter) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.duration = duration;
  cfg.emitter = emitter;
  cfg.line.shape = LineShape::delta;
  cfg.scan = {};  // fixed at zero path difference: every photon reaches the splitter
  cfg.detectors = {kIdeal, kIdeal};
  return cfg;
}

ChannelStreams channels(const ExperimentConfig& cfg) { return simulate_channels(cfg, *cfg.seed); }

double rmse(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

// 1. Coherent light: flat g2, on the 370 ps binning of the laser example.
Outcome poisson_baseline() {
  ExperimentConfig cfg = base_config(101, 1.0, CoherentSourceConfig{3e6});
  cfg.detectors = {DetectorConfig{}, DetectorConfig{}};
  const ChannelStreams ch = channels(cfg);
  const CoincidenceHistogram h = all_pairs_histogram(ch.a, ch.b, 370, 50'000);
  const G2Estimate g2 = normalize_g2(h);
  const double sigma = 1.0 / std::sqrt(g2.accidentals_per_bin);
  double sum = 0.0;
  double worst = 0.0;
  for (const auto& b : g2.bins) {
    sum += b.g2;
    worst = std::max(worst, std::abs(b.g2 - 1.0) / sigma);
  }
  const double mean = sum / static_cast<double>(g2.bins.size());
  return {std::abs(mean - 1.0) <= 0.02 && worst <= 4.0,
          fmt::format("{} photons, mean g2 {:.4f} over +/-50 ns, worst of {} bins {:.2f} sigma", ch.emitted, mean,
                      g2.bins.size(), worst)};
}

// Intensity autocorrelation of a complex Gaussian field with exp(-|tau|/tc)
// field correlation, by direct Monte Carlo at lags k * dt.
std::vector<double> gaussian_field_oracle(double tc, double dt, std::size_t steps, std::size_t max_lag) {
  std::mt19937_64 gen(20240611);
  std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
  const double a = std::exp(-dt / tc);
  const double kick = std::sqrt(1.0 - a * a);
  std::vector<double> intensity(steps);
  std::complex<double> e(n01(gen), n01(gen));
  for (auto& i : intensity) {
    e = a * e + kick * std::complex<double>(n01(gen), n01(gen));
    i = std::norm(e);
  }
  double mean = 0.0;
  for (double i : intensity) mean += i;
  mean /= static_cast<double>(steps);
  std::vector<double> g2(max_lag + 1);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < steps; ++t) s += intensity[t] * intensity[t + lag];
    g2[lag] = s / static_cast<double>(steps - lag) / (mean * mean);
  }
  return g2;
}

// 2. Thermal light: bunching peak of height 2 decaying over the coherence time.
Outcome thermal_bunching() {
  const double tc = 10e-9;
  const Picoseconds w = 250;
  const Picoseconds range = 50'000;
  ExperimentConfig cfg = base_config(102, 0.1, ThermalSourceConfig{2e7, tc});
  const ChannelStreams ch = channels(cfg);
  const G2Estimate g2 = normalize_g2(all_pairs_histogram(ch.a, ch.b, w, range));
  const auto oracle = gaussian_field_oracle(tc, ps_to_seconds(w), 4'000'000, static_cast<std::size_t>(range / w));
  std::vector<double> measured;
  std::vector<double> expected;
  double tail = 0.0;
  int tail_bins = 0;
  for (const auto& b : g2.bins) {
    measured.push_back(b.g2);
    expected.push_back(oracle[static_cast<std::size_t>(std::abs(b.tau) / w)]);
    if (std::abs(ps_to_seconds(b.tau)) >= 4.0 * tc) {
      tail += b.g2;
      ++tail_bins;
    }
  }
  const double zero = g2.bins[g2.zero_index()].g2;
  const double err = rmse(measured, expected);
  tail /= tail_bins;
  return {std::abs(zero - 2.0) <= 0.1 && err <= 0.07 && std::abs(tail - 1.0) <= 0.05,
          fmt::format("g2(0) {:.3f} (oracle {:.3f}), RMSE {:.4f}, mean beyond 4 tc {:.4f}", zero, oracle[0], err,
                      tail)};
}

// Numerical convolution of 1 - exp(-k|tau|) with a Gaussian of std sigma,
// averaged over a histogram bin.
double convolved_dip(double k, double sigma, double tau, double width) {
  const auto gauss = [&](double s) { return std::exp(-0.5 * s * s / (sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi)); };
  const auto at = [&](double t) {
    const auto f = [&](double s) { return (1.0 - std::exp(-k * std::abs(t - s))) * gauss(s); };
    // Split at the kink of the dip.
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -12.0 * sigma, t, 8, 1e-12) +
           boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, t, 12.0 * sigma, 8, 1e-12);
  };
  double s = 0.0;
  const int n = 9;
  for (int i = 0; i < n; ++i) s += at(tau + width * ((i + 0.5) / n - 0.5));
  return s / n;
}

// 3. Two-level cw antibunching, ideal and with 800 ps system jitter.
Outcome cw_antibunching() {
  const TwoLevelCwConfig emitter{1e8, 1e8, 1.0};
  const double k = emitter.pump_rate + emitter.decay_rate;
  ExperimentConfig cfg = base_config(103, 0.1, emitter);
  const ChannelStreams ideal = channels(cfg);
  const G2Estimate g2 = normalize_g2(all_pairs_histogram(ideal.a, ideal.b, 37, 20'000));
  std::vector<double> measured;
  std::vector<double> expected;
  for (const auto& b : g2.bins) {
    measured.push_back(b.g2);
    expected.push_back(1.0 - std::exp(-k * std::abs(ps_to_seconds(b.tau))));
  }
  const double zero = g2.bins[g2.zero_index()].g2;
  const double err = rmse(measured, expected);

  // Two detectors of 800/sqrt(2) ps FWHM each give an 800 ps pair response.
  DetectorConfig jittery = kIdeal;
  jittery.jitter_fwhm = 800.0 / std::sqrt(2.0);
  cfg.seed = 104;
  cfg.detectors = {jittery, jittery};
  const ChannelStreams blurred = channels(cfg);
  const G2Estimate g2j = normalize_g2(rebin(all_pairs_histogram(blurred.a, blurred.b, 37, 20'000), 5));
  const double sigma = 800e-12 / kFwhmToSigma;
  const double width = ps_to_seconds(g2j.bin_width);
  double worst = 0.0;
  for (const auto& b : g2j.bins) {
    worst = std::max(worst, std::abs(b.g2 - convolved_dip(k, sigma, ps_to_seconds(b.tau), width)));
  }
  const double lifted = g2j.bins[g2j.zero_index()].g2;
  return {zero <= 0.05 && err <= 0.05 && worst <= 0.05,
          fmt::format("ideal g2(0) {:.4f}, RMSE {:.4f}; 800 ps jitter: g2(0) {:.3f} (oracle {:.3f}), worst bin "
                      "deviation {:.4f} at {} ps bins",
                      zero, err, lifted, convolved_dip(k, sigma, 0.0, width), worst, g2j.bin_width)};
}

// 4. Pulsed source into a 50:50 splitter with ideal detectors: suppressed
// central peak; re-excitation and background against pair counting over the
// simulated pulse outcomes.
Outcome pulsed_suppression() {
  const Picoseconds period = 13'200;
  const double duration = 0.05;
  PulsedEmitterConfig clean;
  clean.rep_period = period;
  const EventStream s0 = gen_pulsed(clean, duration, 105);
  const auto [a0, b0] = beamsplitter_route(s0, 0.5, 205);
  const PeakAnalysis p0 = pulsed_peak_areas(all_pairs_histogram(a0, b0, 37, 5 * period), period);

  PulsedEmitterConfig reexc = clean;
  reexc.reexcitation_prob = 0.2;
  const EventStream signal = gen_pulsed(reexc, duration, 106);
  const double signal_rate = static_cast<double>(signal.size()) / duration;
  const double bg_rate = 0.1 * signal_rate;
  const EventStream mixed = add_background(signal, bg_rate, 306);
  const auto [a1, b1] = beamsplitter_route(mixed, 0.5, 406);
  const PeakAnalysis p1 = pulsed_peak_areas(all_pairs_histogram(a1, b1, 37, 5 * period), period);

  // Photon number per pulse from the signal events.
  std::map<std::int64_t, std::uint64_t> per_pulse;
  for (const auto& e : signal) ++per_pulse[e.time / period];
  const auto pulses = static_cast<double>(signal.duration() / period);
  double n1 = 0.0;
  double n2 = 0.0;
  for (const auto& [pulse, n] : per_pulse) {
    n1 += static_cast<double>(n);
    n2 += static_cast<double>(n) * static_cast<double>(n - 1);
  }
  n1 /= pulses;
  n2 /= pulses;
  // Background adds uncorrelated counts to every peak window of one period.
  const double b = bg_rate * ps_to_seconds(period);
  const double oracle = (n2 + 2.0 * n1 * b + b * b) / ((n1 + b) * (n1 + b));
  const double rel = p1.central_ratio / oracle - 1.0;
  return {p0.central_ratio <= 0.02 && std::abs(rel) <= 0.2,
          fmt::format("clean ratio {:.4f}; re-excitation 0.2 + 10% background ratio {:.4f} vs oracle {:.4f} "
                      "({:+.1f}%)",
                      p0.central_ratio, p1.central_ratio, oracle, 100.0 * rel)};
}

// Exhaustive enumeration of the same-window pair estimator.
double brute_force_window_g2(const EventStream& s, Picoseconds period) {
  const auto& ev = s.events();
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    for (std::size_t j = i + 1; j < ev.size(); ++j) {
      if (ev[i].time / period == ev[j].time / period) ++pairs;
    }
  }
  const auto windows = static_cast<double>(s.duration() / period);
  const double mean = static_cast<double>(ev.size()) / windows;
  return 2.0 * static_cast<double>(pairs) / windows / (mean * mean);
}

// Exhaustive enumeration of the central/side peak ratio over all (a, b) pairs.
double brute_force_peak_ratio(const EventStream& a, const EventStream& b, Picoseconds w, Picoseconds range,
                              Picoseconds period) {
  const Picoseconds half_bins = range / w;
  const double span = (static_cast<double>(half_bins) + 0.5) * static_cast<double>(w);
  const auto max_peak = static_cast<std::int64_t>(std::floor((span - 0.5 * period) / period));
  std::vector<double> areas(static_cast<std::size_t>(2 * max_peak + 1), 0.0);
  for (const auto& x : a) {
    for (const auto& y : b) {
      const Picoseconds d = y.time - x.time;
      const auto bin = static_cast<Picoseconds>(std::floor((static_cast<double>(d) + 0.5 * w) / w));
      if (bin < -half_bins || bin > half_bins) continue;
      const auto k = static_cast<std::int64_t>(std::floor(static_cast<double>(bin * w) / period + 0.5));
      if (k < -max_peak || k > max_peak) continue;
      areas[static_cast<std::size_t>(k + max_peak)] += 1.0;
    }
  }
  double side = 0.0;
  for (std::int64_t k = -max_peak; k <= max_peak; ++k) {
    if (k != 0) side += areas[static_cast<std::size_t>(k + max_peak)];
  }
  return areas[static_cast<std::size_t>(max_peak)] / (side / static_cast<double>(2 * max_peak));
}

// 5. Fock states: pulse-integrated g2(0) = 1 - 1/n.
Outcome fock_formula() {
  const Picoseconds period = 13'200;
  bool pass = true;
  std::string detail;
  for (int n : {1, 2, 3, 5}) {
    FockPulseConfig cfg;
    cfg.n = n;
    cfg.rep_period = period;
    const double expected = 1.0 - 1.0 / n;

    const EventStream s = gen_fock_train(cfg, 2e5 * ps_to_seconds(period), 500 + static_cast<std::uint64_t>(n));
    const auto [a, b] = beamsplitter_route(s, 0.5, 600 + static_cast<std::uint64_t>(n));
    const double peak = pulsed_peak_areas(all_pairs_histogram(a, b, 37, 5 * period), period).central_ratio;
    const double window = pulse_window_g2(s, period).g2;

    const EventStream small = gen_fock_train(cfg, 1e3 * ps_to_seconds(period), 700 + static_cast<std::uint64_t>(n));
    const auto [sa, sb] = beamsplitter_route(small, 0.5, 800 + static_cast<std::uint64_t>(n));
    const double lib_window = pulse_window_g2(small, period).g2;
    const double lib_peak = pulsed_peak_areas(all_pairs_histogram(sa, sb, 37, 5 * period), period).central_ratio;
    const bool cross = std::abs(lib_window - brute_force_window_g2(small, period)) <= 1e-12 &&
                       std::abs(lib_peak - brute_force_peak_ratio(sa, sb, 37, 5 * period, period)) <= 1e-12;

    const bool ok = std::abs(peak - expected) <= 0.03 && std::abs(window - expected) <= 0.03 && cross;
    pass &= ok;
    detail += fmt::format("{}n={}: peak {:.4f} window {:.4f} (1-1/n {:.4f}){}", detail.empty() ? "" : "; ", n, peak,
                          window, expected, cross ? "" : " [enumeration mismatch]");
  }
  return {pass, detail};
}

// 6. Start-stop approximates all-pairs only for ranges well below the mean
// stop interval.
Outcome start_stop_validity() {
  ExperimentConfig cfg = base_config(107, 60.0, CoherentSourceConfig{1e5});
  cfg.detectors = {DetectorConfig{}, DetectorConfig{}};
  const ChannelStreams ch = channels(cfg);
  const double rate_b = static_cast<double>(ch.b.size()) / cfg.duration;

  const auto max_z = [&](Picoseconds w, Picoseconds range) {
    const G2Estimate ss = normalize_g2(start_stop_histogram(ch.a, ch.b, w, range));
    const G2Estimate ap = normalize_g2(all_pairs_histogram(ch.a, ch.b, w, range));
    double worst = 0.0;
    for (std::size_t i = 0; i < ss.bins.size(); ++i) {
      const double e = std::hypot(ss.bins[i].error, ap.bins[i].error);
      if (e > 0.0) worst = std::max(worst, std::abs(ss.bins[i].g2 - ap.bins[i].g2) / e);
    }
    return worst;
  };
  const double mean_interval = 1.0 / rate_b;
  const double near = max_z(1'000, 100'000);
  const auto long_range = static_cast<Picoseconds>(2.0 * mean_interval * 1e12);
  const double far = max_z(500'000, long_range);
  return {near <= 3.0 && far > 5.0,
          fmt::format("stop rate {:.0f}/s (mean interval {:.1f} us); range 100 ns max |z| {:.2f}; range {:.0f} us "
                      "max |z| {:.1f}",
                      rate_b, mean_interval * 1e6, near, far, ps_to_seconds(long_range) * 1e6)};
}

// 7. Visibility decays as exp(-gamma tau) for a Lorentzian line.
Outcome visibility_law() {
  ExperimentConfig cfg = base_config(108, 10.0, CoherentSourceConfig{1e6});
  cfg.line.shape = LineShape::lorentzian;
  cfg.line.linewidth = 1e11;
  cfg.scan = {ScanKind::triangular, 2e-6, 0.1, 0.0};
  const double unit = kSpeedOfLight / cfg.line.linewidth;
  const std::vector<double> offsets{0.0, unit, 2.0 * unit, 3.0 * unit};
  const auto points = sweep_visibility(cfg, offsets);
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double expected = std::exp(-cfg.line.linewidth * points[i].delay);
    pass &= std::abs(points[i].fit.visibility - expected) <= 0.05;
    detail += fmt::format("{:.3f} (exp {:.3f}), ", points[i].fit.visibility, expected);
  }

  // Noiseless synthetic trace with a configured contrast of 0.8.
  const ScanWaveform scan{ScanKind::triangular, 20e-6, 0.01, 0.0};
  const SpectralLine line;
  FringeTrace trace;
  trace.window = 10e-3;
  for (int i = 0; i < 6000; ++i) {
    const double start = i * trace.window;
    const double phase = 2.0 * std::numbers::pi * scan.path_difference(start + 0.5 * trace.window) /
                         (line.center_wavelength_nm * 1e-9);
    trace.samples.push_back({start, static_cast<std::uint64_t>(std::llround(1e4 * (1.0 + 0.8 * std::cos(phase))))});
  }
  const double v = extract_visibility(trace, scan, line).visibility;
  pass &= std::abs(v - 0.8) <= 0.01;
  return {pass, fmt::format("sweep {}synthetic v=0.8 -> {:.4f}", detail, v)};
}

// 8. One seeded run yields both antibunching and high-contrast fringes.
Outcome combined_run() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"combined_pulsed.json", "combined_cw.json"}) {
    const ExperimentConfig cfg = load_config((fs::path(PHOTONLAB_CONFIG_DIR) / name).string());
    const RunResult r = run_combined(cfg);
    const double bound = r.g2_zero.value + 3.0 * r.g2_zero.error;
    const double v = r.visibility ? r.visibility->visibility : 0.0;
    const double quarter = 0.25 / cfg.scan.frequency;
    const int fringes = count_fringes(r.fringe, 0.0, quarter);
    const double expected_fringes = cfg.scan.amplitude / (cfg.line.center_wavelength_nm * 1e-9);

    // Same histogram from clicks on constructive vs destructive fringe halves,
    // compared per peak for pulsed light and on ~2 ns bins for cw light.
    const auto gated = [&](FringePhase phase) {
      const CoincidenceHistogram h =
          build_histogram(cfg.histogram.mode, gate_by_phase(r.channel_a, cfg.line, cfg.scan, phase),
                          gate_by_phase(r.channel_b, cfg.line, cfg.scan, phase), cfg.histogram.bin_width,
                          cfg.histogram.range);
      if (const auto* p = std::get_if<PulsedEmitterConfig>(&cfg.emitter)) {
        const PeakAnalysis peaks = pulsed_peak_areas(h, p->rep_period);
        CoincidenceHistogram per_peak = CoincidenceHistogram::empty(p->rep_period, peaks.peaks.back().index * p->rep_period);
        for (std::size_t i = 0; i < peaks.peaks.size(); ++i) per_peak.counts[i] = peaks.peaks[i].area;
        return per_peak;
      }
      return rebin(h, 55);
    };
    const ShapeComparison shapes = compare_shapes(gated(FringePhase::constructive), gated(FringePhase::destructive));

    const bool ok = bound < 0.5 && v >= 0.9 && std::abs(fringes - expected_fringes) < 1.0 && shapes.max_abs_z <= 3.0;
    pass &= ok;
    detail += fmt::format("{}{}: g2(0)+3s {:.3f}, v {:.4f}, fringes in first quarter {} (expect {:.2f}), gated "
                          "shape max |z| {:.2f} over {} bins",
                          detail.empty() ? "" : "; ", name, bound, v, fringes, expected_fringes, shapes.max_abs_z,
                          shapes.z.size());
  }
  return {pass, detail};
}

int run_cli(const std::string& args) {
  const std::string cmd = "env -u PHOTONLAB_SEED '" + std::string(PHOTONLAB_CLI) + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 9. Repeated CLI invocations produce identical bytes.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "photonlab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cfg = (fs::path(PHOTONLAB_CONFIG_DIR) / "cw_antibunching.json").string();
  for (const char* run : {"r1", "r2"}) {
    const fs::path dir = root / run;
    bool ok = run_cli(fmt::format("simulate -c '{}' -s 99 --duration 1 --export-streams -o '{}'", cfg,
                                  (dir / "sim").string())) == 0;
    ok &= run_cli(fmt::format("correlate '{}' '{}' --mode all_pairs -o '{}'", (dir / "sim" / "channel_a.phts").string(),
                              (dir / "sim" / "channel_b.phts").string(), (dir / "cor").string())) == 0;
    ok &= run_cli(fmt::format("oracle -m two_level --tau-ns 0,1,2,5 --jitter-fwhm-ps 800 -o '{}'",
                              (dir / "oracle.csv").string())) == 0;
    if (!ok) return {false, fmt::format("CLI invocation failed in {}", run)};
  }
  int files = 0;
  std::string mismatch;
  for (const auto& entry : fs::recursive_directory_iterator(root / "r1")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "r1");
    const fs::path other = root / "r2" / rel;
    if (!fs::exists(other) || read_file(entry.path()) != read_file(other)) mismatch += rel.string() + " ";
    ++files;
  }
  fs::remove_all(root);
  return {files > 0 && mismatch.empty(),
          mismatch.empty() ? fmt::format("{} files identical across two runs", files) : "differs: " + mismatch};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"poisson baseline", poisson_baseline},
      {"thermal bunching", thermal_bunching},
      {"cw antibunching", cw_antibunching},
      {"pulsed suppression", pulsed_suppression},
      {"fock formula", fock_formula},
      {"start-stop validity", start_stop_validity},
      {"visibility law", visibility_law},
      {"combined run", combined_run},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fmt::print("{} {} {}: {} [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail, secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
