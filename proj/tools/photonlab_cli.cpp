#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "photonlab/config.hpp"
#include "photonlab/correlator.hpp"
#include "photonlab/errors.hpp"
#include "photonlab/experiment.hpp"
#include "photonlab/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace photonlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDomain = 3;

constexpr const char* kFooter = R"(Exit codes:
  0  success
  2  input error (unreadable file, malformed JSON, unknown field, bad flag)
  3  domain invariant violation (config values out of range, g2 undefined)

Seed precedence: --seed, then "seed" in the config, then $PHOTONLAB_SEED, then 0.

Output files (every file carries the config hash: '# config_hash=...' in CSV,
an XML comment in SVG, a "config_hash" field in JSON):
  histogram.csv  tau_ps,counts        bin center delay (ps), coincidences
  g2.csv         tau_ps,g2,stderr     bin center delay (ps), normalized g2,
                                      Poisson standard error
  fringe.csv     window_start_s,counts  window start (s), clicks on detector A
  summary.json   g2(0), classicality verdict, visibility, click totals
  config.json    fully expanded configuration actually run
  *.svg          line/step plots of the tables above
  channel_a.phts, channel_b.phts  click timestamps (with --export-streams)

Timestamp inputs: binary (16-byte header "PHTS", u16 version, u16 channel,
u64 count, then little-endian u64 picoseconds) or CSV with one integer
picosecond timestamp per line ('#' lines ignored). Timestamps must be sorted.)";

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("PHOTONLAB_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::size_t used = 0;
  std::uint64_t value = 0;
  try {
    value = std::stoull(raw, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || raw[used] != '\0') throw ParseError(fmt::format("PHOTONLAB_SEED: not an unsigned integer: '{}'", raw));
  return value;
}

void write_bundle(const fs::path& dir, const std::map<std::string, std::string>& files) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) write_file_atomic(dir / name, content);
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

// simulate

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  bool export_streams = false;
  bool no_plots = false;
};

int run_simulate(const SimulateArgs& args) {
  ExperimentConfig cfg = load_config(args.config);
  if (args.seed) {
    cfg.seed = args.seed;
  } else if (!cfg.seed) {
    cfg.seed = env_seed().value_or(0);
  }
  if (args.duration) cfg.duration = *args.duration;
  cfg.validate();

  const RunResult result = run_combined(cfg);
  const std::string& hash = result.config_hash;

  std::map<std::string, std::string> files;
  json echo = result.config_echo;
  echo["config_hash"] = hash;
  files["config.json"] = dump(echo);
  files["summary.json"] = dump(summary_json(result));
  files["histogram.csv"] = histogram_csv(result.histogram, hash);
  files["g2.csv"] = g2_csv(result.g2, hash);
  files["fringe.csv"] = fringe_csv(result.fringe, hash);
  if (!args.no_plots) {
    files["histogram.svg"] = histogram_svg(result.histogram, hash);
    files["g2.svg"] = g2_svg(result.g2, hash);
    files["fringe.svg"] = fringe_svg(result.fringe, hash);
  }
  if (args.export_streams) {
    files["channel_a.phts"] = encode_timestamps_binary(result.channel_a, 0);
    files["channel_b.phts"] = encode_timestamps_binary(result.channel_b, 1);
  }
  write_bundle(args.out, files);

  fmt::print("config_hash {}\nseed {}\nclicks {} {}\ng2_zero {:.4f} +/- {:.4f}\n", hash, result.seed,
             result.channel_a.size(), result.channel_b.size(), result.g2_zero.value, result.g2_zero.error);
  if (result.visibility) {
    fmt::print("visibility {:.4f} +/- {:.4f}\n", result.visibility->visibility, result.visibility->error);
  }
  fmt::print("verdict {}\n", summary_json(result)["verdict"].get<std::string>());
  return kExitOk;
}

// correlate

struct CorrelateArgs {
  std::string file_a;
  std::string file_b;
  std::string out;
  Picoseconds bin_width = 37;
  Picoseconds range = 66'000;
  std::string mode = "start_stop";
  std::optional<Picoseconds> duration;
  Picoseconds zero_window = 400;
  bool no_plots = false;
};

int run_correlate(const CorrelateArgs& args) {
  if (args.bin_width <= 0) throw ConfigError("--bin-width must be > 0");
  if (args.range < args.bin_width) throw ConfigError("--range must be >= --bin-width");
  const HistogramMode mode = args.mode == "all_pairs" ? HistogramMode::all_pairs : HistogramMode::start_stop;

  const std::string bytes_a = read_file(args.file_a);
  const std::string bytes_b = read_file(args.file_b);
  TimestampFile a = decode_timestamps(bytes_a);
  TimestampFile b = decode_timestamps(bytes_b);
  const Picoseconds span = args.duration.value_or(std::max(a.stream.duration(), b.stream.duration()));
  if (span < a.stream.duration() || span < b.stream.duration()) {
    throw ParseError(fmt::format("--duration-ps {} is shorter than the recorded timestamps", span));
  }
  const EventStream sa({a.stream.begin(), a.stream.end()}, span);
  const EventStream sb({b.stream.begin(), b.stream.end()}, span);

  json params = {{"command", "correlate"},
                 {"bin_width_ps", args.bin_width},
                 {"range_ps", args.range},
                 {"mode", args.mode},
                 {"duration_ps", span},
                 {"zero_window_ps", args.zero_window},
                 {"input_a_hash", hash_hex(bytes_a)},
                 {"input_b_hash", hash_hex(bytes_b)}};
  const std::string hash = hash_hex(params.dump());
  params["config_hash"] = hash;

  const CoincidenceHistogram h = build_histogram(mode, sa, sb, args.bin_width, args.range);
  json summary = {{"config_hash", hash},
                  {"events_a", sa.size()},
                  {"events_b", sb.size()},
                  {"coincidences", h.total()},
                  {"histogram_mode", std::string(to_string(mode))},
                  {"g2_mean", nullptr},
                  {"g2_zero", nullptr},
                  {"g2_zero_error", nullptr}};
  G2Estimate g2;
  g2.bin_width = args.bin_width;
  if (sa.empty() || sb.empty()) {
    fmt::print(stderr, "warning: {} contains no timestamps; histogram is empty and g2 is undefined\n",
               sa.empty() ? args.file_a : args.file_b);
  } else {
    g2 = normalize_g2(h);
    double sum = 0.0;
    for (const auto& bin : g2.bins) sum += bin.g2;
    const ValueWithError zero = zero_delay_g2(h, args.zero_window);
    summary["g2_mean"] = sum / static_cast<double>(g2.bins.size());
    summary["g2_zero"] = zero.value;
    summary["g2_zero_error"] = zero.error;
  }

  std::map<std::string, std::string> files;
  files["config.json"] = dump(params);
  files["summary.json"] = dump(summary);
  files["histogram.csv"] = histogram_csv(h, hash);
  files["g2.csv"] = g2_csv(g2, hash);
  if (!args.no_plots) {
    files["histogram.svg"] = histogram_svg(h, hash);
    files["g2.svg"] = g2_svg(g2, hash);
  }
  write_bundle(args.out, files);
  fmt::print("config_hash {}\nevents {} {}\ncoincidences {}\n", hash, sa.size(), sb.size(), h.total());
  if (!summary["g2_mean"].is_null()) {
    fmt::print("g2_mean {:.4f}\ng2_zero {:.4f} +/- {:.4f}\n", summary["g2_mean"].get<double>(),
               summary["g2_zero"].get<double>(), summary["g2_zero_error"].get<double>());
  }
  return kExitOk;
}

// visibility

struct VisibilityArgs {
  std::string trace;
  std::string config;
  std::optional<std::string> out;
};

FringeTrace parse_fringe_csv(const std::string& bytes, double fallback_window) {
  FringeTrace trace;
  trace.window = fallback_window;
  std::istringstream in(bytes);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen && line.rfind("window_start_s", 0) == 0) {
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t used_t = 0;
      std::size_t used_c = 0;
      const std::string t_text = line.substr(0, comma);
      const std::string c_text = line.substr(comma + 1);
      const double t = std::stod(t_text, &used_t);
      const long long c = std::stoll(c_text, &used_c);
      if (used_t != t_text.size() || used_c != c_text.size() || c < 0) throw std::invalid_argument("trailing text");
      trace.samples.push_back({t, static_cast<std::uint64_t>(c)});
    } catch (const std::exception&) {
      throw ParseError(fmt::format("fringe CSV line {}: expected 'window_start_s,counts', got '{}'", line_no, line));
    }
  }
  if (trace.samples.size() >= 2) trace.window = trace.samples[1].window_start - trace.samples[0].window_start;
  if (!(trace.window > 0.0)) throw ParseError("fringe CSV: window starts must increase");
  return trace;
}

int run_visibility(const VisibilityArgs& args) {
  const ExperimentConfig cfg = load_config(args.config);
  cfg.validate();
  const std::string bytes = read_file(args.trace);
  const FringeTrace trace = parse_fringe_csv(bytes, cfg.fringe_window);
  const VisibilityFit fit = extract_visibility(trace, cfg.scan, cfg.line);
  const std::string hash = config_hash(cfg);
  const json doc = {{"config_hash", hash},
                    {"trace_hash", hash_hex(bytes)},
                    {"window_s", trace.window},
                    {"visibility", fit.visibility},
                    {"error", fit.error},
                    {"fringes", fit.fringes}};
  if (args.out) write_bundle(*args.out, {{"visibility.json", dump(doc)}});
  fmt::print("{}", dump(doc));
  return kExitOk;
}

// oracle

struct OracleArgs {
  std::string model;
  std::vector<double> tau_ns{0.0};
  double rate = 1e5;
  double coherence_time = 10e-9;
  double pump_rate = 1e8;
  double decay_rate = 1e8;
  double jitter_fwhm_ps = 0.0;
  double emission_prob = 1.0;
  double reexcitation_prob = 0.0;
  Picoseconds rep_period_ps = 13'200;
  int n = 1;
  double linewidth = 1e9;
  double wavelength_nm = 700.0;
  std::optional<std::string> out;
};

int run_oracle(const OracleArgs& args) {
  json params = {{"command", "oracle"}, {"model", args.model}};
  std::string column = "g2";
  std::function<double(double)> f;

  if (args.model == "lorentzian" || args.model == "gaussian" || args.model == "delta") {
    SpectralLine line;
    line.center_wavelength_nm = args.wavelength_nm;
    line.linewidth = args.linewidth;
    line.shape = args.model == "lorentzian" ? LineShape::lorentzian
                 : args.model == "gaussian" ? LineShape::gaussian
                                            : LineShape::delta;
    line.validate();
    params["linewidth"] = args.linewidth;
    params["center_wavelength_nm"] = args.wavelength_nm;
    column = "visibility";
    f = [line](double tau) { return visibility_from_spectrum(line, tau).visibility; };
  } else if (args.model == "two_level" && args.jitter_fwhm_ps > 0.0) {
    TwoLevelCwConfig c{args.pump_rate, args.decay_rate, 1.0};
    c.validate();
    params["pump_rate"] = args.pump_rate;
    params["decay_rate"] = args.decay_rate;
    params["jitter_fwhm_ps"] = args.jitter_fwhm_ps;
    const double k = args.pump_rate + args.decay_rate;
    const double sigma = fwhm_to_sigma(args.jitter_fwhm_ps * 1e-12);
    f = [k, sigma](double tau) { return two_level_g2_convolved(k, sigma, tau); };
  } else {
    EmitterConfig model;
    if (args.model == "coherent") {
      model = CoherentSourceConfig{args.rate};
    } else if (args.model == "thermal") {
      ThermalSourceConfig c;
      c.rate = args.rate;
      c.coherence_time = args.coherence_time;
      model = c;
    } else if (args.model == "two_level") {
      model = TwoLevelCwConfig{args.pump_rate, args.decay_rate, 1.0};
    } else if (args.model == "pulsed") {
      PulsedEmitterConfig c;
      c.rep_period = args.rep_period_ps;
      c.emission_prob = args.emission_prob;
      c.reexcitation_prob = args.reexcitation_prob;
      model = c;
    } else if (args.model == "fock") {
      FockPulseConfig c;
      c.n = args.n;
      c.rep_period = args.rep_period_ps;
      model = c;
    } else {
      throw ParseError(fmt::format("unknown model '{}'", args.model));
    }
    validate(model);
    params["emitter"] = emitter_to_json(model);
    f = [model](double tau) { return analytic_g2(model, tau); };
  }

  params["tau_ns"] = args.tau_ns;
  const std::string hash = hash_hex(params.dump());
  std::string out = fmt::format("# config_hash={}\ntau_ns,{}\n", hash, column);
  for (double t : args.tau_ns) fmt::format_to(std::back_inserter(out), "{:.9g},{:.9g}\n", t, f(t * 1e-9));
  if (args.out) {
    write_file_atomic(*args.out, out);
  } else {
    fmt::print("{}", out);
  }
  return kExitOk;
}

// validate-config

int run_validate(const std::string& path, bool print) {
  const ExperimentConfig cfg = load_config(path);
  cfg.validate();
  if (print) {
    json echo = to_json(cfg);
    echo["config_hash"] = config_hash(cfg);
    fmt::print("{}", dump(echo));
  } else {
    fmt::print("ok {}\n", config_hash(cfg));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"photonlab: photon-correlation and interferometry simulator"};
  app.footer(kFooter);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a combined HBT + Michelson simulation from a config file");
  simulate->add_option("-c,--config", sim.config, "Experiment config (JSON)")->required();
  simulate->add_option("-o,--out", sim.out, "Output directory")->required();
  simulate->add_option("-s,--seed", sim.seed, "Master seed (overrides config and PHOTONLAB_SEED)");
  simulate->add_option("--duration", sim.duration, "Override the run duration in seconds");
  simulate->add_flag("--export-streams", sim.export_streams, "Also write channel_a.phts and channel_b.phts");
  simulate->add_flag("--no-plots", sim.no_plots, "Skip SVG output");

  CorrelateArgs cor;
  auto* correlate = app.add_subcommand("correlate", "Histogram delays between two timestamp files");
  correlate->add_option("file_a", cor.file_a, "Start channel timestamps")->required();
  correlate->add_option("file_b", cor.file_b, "Stop channel timestamps")->required();
  correlate->add_option("-o,--out", cor.out, "Output directory")->required();
  correlate->add_option("--bin-width", cor.bin_width, "Bin width in ps")->capture_default_str();
  correlate->add_option("--range", cor.range, "Histogram half range in ps")->capture_default_str();
  correlate->add_option("--mode", cor.mode, "start_stop (TAC) or all_pairs")
      ->check(CLI::IsMember({"start_stop", "all_pairs"}))
      ->capture_default_str();
  correlate->add_option("--duration-ps", cor.duration, "Acquisition time in ps (default: last timestamp)");
  correlate->add_option("--zero-window", cor.zero_window, "Half width in ps of the pooled g2(0) window")
      ->capture_default_str();
  correlate->add_flag("--no-plots", cor.no_plots, "Skip SVG output");

  VisibilityArgs vis;
  auto* visibility = app.add_subcommand("visibility", "Fit fringe visibility to a count-rate trace");
  visibility->add_option("-t,--trace", vis.trace, "Fringe CSV (window_start_s,counts)")->required();
  visibility->add_option("-c,--config", vis.config, "Config providing the scan waveform and line")->required();
  visibility->add_option("-o,--out", vis.out, "Directory for visibility.json");

  OracleArgs orc;
  auto* oracle = app.add_subcommand("oracle", "Print analytic g2 or visibility values as CSV (tau_ns,g2|visibility)");
  oracle->add_option("-m,--model", orc.model,
                     "coherent | thermal | two_level | pulsed | fock | lorentzian | gaussian | delta")
      ->required();
  oracle->add_option("--tau-ns", orc.tau_ns, "Delays in ns")->delimiter(',');
  oracle->add_option("--rate", orc.rate, "Photon rate (1/s)")->capture_default_str();
  oracle->add_option("--coherence-time", orc.coherence_time, "Thermal coherence time (s)")->capture_default_str();
  oracle->add_option("--pump-rate", orc.pump_rate, "Two-level pump rate P (1/s)")->capture_default_str();
  oracle->add_option("--decay-rate", orc.decay_rate, "Two-level decay rate Gamma (1/s)")->capture_default_str();
  oracle->add_option("--jitter-fwhm-ps", orc.jitter_fwhm_ps, "Two-level: convolve with a Gaussian response (ps)");
  oracle->add_option("--emission-prob", orc.emission_prob, "Pulsed emission probability")->capture_default_str();
  oracle->add_option("--reexcitation-prob", orc.reexcitation_prob, "Pulsed re-excitation probability")
      ->capture_default_str();
  oracle->add_option("--rep-period-ps", orc.rep_period_ps, "Pulse period (ps)")->capture_default_str();
  oracle->add_option("-n", orc.n, "Fock photon number")->capture_default_str();
  oracle->add_option("--linewidth", orc.linewidth, "Line half width gamma (1/s)")->capture_default_str();
  oracle->add_option("--wavelength-nm", orc.wavelength_nm, "Center wavelength (nm)")->capture_default_str();
  oracle->add_option("-o,--out", orc.out, "Write the table to a file instead of stdout");

  std::string validate_path;
  bool print_expanded = false;
  auto* validate_cmd = app.add_subcommand("validate-config", "Parse and validate a config file");
  validate_cmd->add_option("config", validate_path, "Experiment config (JSON)")->required();
  validate_cmd->add_flag("--print", print_expanded, "Print the expanded config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (correlate->parsed()) return run_correlate(cor);
    if (visibility->parsed()) return run_visibility(vis);
    if (oracle->parsed()) return run_oracle(orc);
    if (validate_cmd->parsed()) return run_validate(validate_path, print_expanded);
  } catch (const ParseError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInput;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "invalid configuration: {}\n", e.what());
    return kExitDomain;
  } catch (const NormalizationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitDomain;
  } catch (const InsufficientDataError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitDomain;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInput;
  }
  return kExitInput;
}
