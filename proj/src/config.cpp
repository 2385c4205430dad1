#include "photonlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <fmt/format.h>

#include "photonlab/errors.hpp"

namespace photonlab {

using nlohmann::json;

std::string_view to_string(HistogramMode mode) {
  switch (mode) {
    case HistogramMode::start_stop: return "start_stop";
    case HistogramMode::all_pairs: return "all_pairs";
    case HistogramMode::auto_pairs: return "auto_pairs";
  }
  return "unknown";
}

std::string_view to_string(LineShape shape) {
  switch (shape) {
    case LineShape::lorentzian: return "lorentzian";
    case LineShape::gaussian: return "gaussian";
    case LineShape::delta: return "delta";
  }
  return "unknown";
}

std::string_view to_string(ScanKind kind) {
  return kind == ScanKind::fixed ? "fixed" : "triangular";
}

namespace {

// Reads one JSON object, remembering which keys were consumed so that
// unexpected keys (usually typos) are reported instead of silently ignored.
class ObjectReader {
 public:
  ObjectReader(const json& doc, std::string pointer) : doc_(doc), pointer_(std::move(pointer)) {
    if (!doc_.is_object()) fail("", "expected an object");
  }

  bool has(const char* key) const { return doc_.contains(key); }

  const json& child(const char* key) {
    seen_.insert(key);
    if (!doc_.contains(key)) fail(key, "required field is missing");
    return doc_.at(key);
  }

  double number(const char* key, std::optional<double> fallback = std::nullopt) {
    if (!doc_.contains(key)) return require_default(key, fallback);
    const json& v = child(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const char* key, std::optional<std::int64_t> fallback = std::nullopt) {
    if (!doc_.contains(key)) return require_default(key, fallback);
    const json& v = child(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const char* key) {
    const json& v = child(key);
    if (!v.is_number_unsigned()) fail(key, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const char* key, std::optional<std::string> fallback = std::nullopt) {
    if (!doc_.contains(key)) return require_default(key, fallback);
    const json& v = child(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::string path(const char* key) const { return pointer_ + "/" + key; }

  void finish() const {
    for (const auto& item : doc_.items()) {
      if (!seen_.contains(item.key())) fail(item.key(), "unknown field");
    }
  }

  [[noreturn]] void fail(std::string_view key, std::string_view message) const {
    const std::string where = key.empty() ? (pointer_.empty() ? std::string("/") : pointer_)
                                          : pointer_ + "/" + std::string(key);
    throw ParseError(fmt::format("{}: {}", where, message));
  }

 private:
  template <typename T>
  T require_default(const char* key, const std::optional<T>& fallback) {
    seen_.insert(key);
    if (!fallback) fail(key, "required field is missing");
    return *fallback;
  }

  const json& doc_;
  std::string pointer_;
  std::set<std::string, std::less<>> seen_;
};

LineShape parse_shape(ObjectReader& r) {
  const std::string s = r.string("shape", "lorentzian");
  if (s == "lorentzian") return LineShape::lorentzian;
  if (s == "gaussian") return LineShape::gaussian;
  if (s == "delta") return LineShape::delta;
  r.fail("shape", "expected one of lorentzian, gaussian, delta");
}

SpectralLine parse_line(const json& doc, const std::string& pointer) {
  ObjectReader r(doc, pointer);
  SpectralLine line;
  line.center_wavelength_nm = r.number("center_wavelength_nm", line.center_wavelength_nm);
  line.shape = parse_shape(r);
  line.linewidth = r.number("linewidth", line.linewidth);
  r.finish();
  return line;
}

ScanWaveform parse_scan(const json& doc, const std::string& pointer) {
  ObjectReader r(doc, pointer);
  ScanWaveform scan;
  const std::string kind = r.string("kind", "fixed");
  if (kind == "fixed") scan.kind = ScanKind::fixed;
  else if (kind == "triangular") scan.kind = ScanKind::triangular;
  else r.fail("kind", "expected one of fixed, triangular");
  scan.amplitude = r.number("amplitude", scan.amplitude);
  scan.frequency = r.number("frequency", scan.frequency);
  scan.offset = r.number("offset", scan.offset);
  r.finish();
  return scan;
}

DetectorConfig parse_detector(const json& doc, const std::string& pointer) {
  ObjectReader r(doc, pointer);
  DetectorConfig d;
  d.efficiency = r.number("efficiency", d.efficiency);
  d.jitter_fwhm = r.number("jitter_fwhm_ps", d.jitter_fwhm);
  d.dead_time = r.number("dead_time_ps", d.dead_time);
  d.dark_rate = r.number("dark_rate", d.dark_rate);
  r.finish();
  return d;
}

HistogramSettings parse_histogram(const json& doc, const std::string& pointer) {
  ObjectReader r(doc, pointer);
  HistogramSettings h;
  h.bin_width = r.integer("bin_width_ps", h.bin_width);
  h.range = r.integer("range_ps", h.range);
  const std::string mode = r.string("mode", "start_stop");
  if (mode == "start_stop") h.mode = HistogramMode::start_stop;
  else if (mode == "all_pairs") h.mode = HistogramMode::all_pairs;
  else r.fail("mode", "expected one of start_stop, all_pairs");
  h.zero_window = r.integer("zero_window_ps", h.zero_window);
  r.finish();
  return h;
}

json detector_to_json(const DetectorConfig& d) {
  return {{"efficiency", d.efficiency},
          {"jitter_fwhm_ps", d.jitter_fwhm},
          {"dead_time_ps", d.dead_time},
          {"dark_rate", d.dark_rate}};
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

EmitterConfig parse_emitter(const json& doc, const std::string& pointer) {
  ObjectReader r(doc, pointer);
  const std::string type = r.string("type");
  EmitterConfig out;
  if (type == "coherent") {
    CoherentSourceConfig c;
    c.rate = r.number("rate");
    out = c;
  } else if (type == "thermal") {
    ThermalSourceConfig c;
    c.rate = r.number("rate");
    c.coherence_time = r.number("coherence_time");
    c.grid_divisions = static_cast<int>(r.integer("grid_divisions", c.grid_divisions));
    out = c;
  } else if (type == "two_level_cw") {
    TwoLevelCwConfig c;
    c.pump_rate = r.number("pump_rate");
    c.decay_rate = r.number("decay_rate");
    c.quantum_efficiency = r.number("quantum_efficiency", c.quantum_efficiency);
    out = c;
  } else if (type == "pulsed") {
    PulsedEmitterConfig c;
    c.rep_period = r.integer("rep_period_ps", c.rep_period);
    c.lifetime = r.number("lifetime_ps", c.lifetime);
    c.emission_prob = r.number("emission_prob", c.emission_prob);
    c.reexcitation_prob = r.number("reexcitation_prob", c.reexcitation_prob);
    c.reexcitation_delay = r.number("reexcitation_delay_ps", c.reexcitation_delay);
    out = c;
  } else if (type == "fock") {
    FockPulseConfig c;
    c.n = static_cast<int>(r.integer("n"));
    c.rep_period = r.integer("rep_period_ps", c.rep_period);
    c.lifetime = r.number("lifetime_ps", c.lifetime);
    out = c;
  } else {
    r.fail("type", "expected one of coherent, thermal, two_level_cw, pulsed, fock");
  }
  r.finish();
  return out;
}

json emitter_to_json(const EmitterConfig& cfg) {
  return std::visit(
      [](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CoherentSourceConfig>) {
          return {{"type", "coherent"}, {"rate", c.rate}};
        } else if constexpr (std::is_same_v<T, ThermalSourceConfig>) {
          return {{"type", "thermal"},
                  {"rate", c.rate},
                  {"coherence_time", c.coherence_time},
                  {"grid_divisions", c.grid_divisions}};
        } else if constexpr (std::is_same_v<T, TwoLevelCwConfig>) {
          return {{"type", "two_level_cw"},
                  {"pump_rate", c.pump_rate},
                  {"decay_rate", c.decay_rate},
                  {"quantum_efficiency", c.quantum_efficiency}};
        } else if constexpr (std::is_same_v<T, PulsedEmitterConfig>) {
          return {{"type", "pulsed"},
                  {"rep_period_ps", c.rep_period},
                  {"lifetime_ps", c.lifetime},
                  {"emission_prob", c.emission_prob},
                  {"reexcitation_prob", c.reexcitation_prob},
                  {"reexcitation_delay_ps", c.reexcitation_delay}};
        } else {
          return {{"type", "fock"}, {"n", c.n}, {"rep_period_ps", c.rep_period}, {"lifetime_ps", c.lifetime}};
        }
      },
      cfg);
}

ExperimentConfig parse_config(const json& doc) {
  ObjectReader r(doc, "");
  ExperimentConfig cfg;
  cfg.rng = r.string("rng", cfg.rng);
  if (cfg.rng != kRngAlgorithm) r.fail("rng", fmt::format("unsupported generator; only {} is defined", kRngAlgorithm));
  if (r.has("seed")) cfg.seed = r.unsigned_integer("seed");
  cfg.duration = r.number("duration");
  cfg.emitter = parse_emitter(r.child("emitter"), "/emitter");
  cfg.background_rate = r.number("background_rate", cfg.background_rate);
  if (r.has("bandpass")) {
    ObjectReader b(r.child("bandpass"), "/bandpass");
    cfg.bandpass.signal_transmission = b.number("signal_transmission", 1.0);
    cfg.bandpass.background_transmission = b.number("background_transmission", 1.0);
    b.finish();
  }
  if (r.has("line")) cfg.line = parse_line(r.child("line"), "/line");
  if (r.has("scan")) cfg.scan = parse_scan(r.child("scan"), "/scan");
  cfg.splitter_reflectance = r.number("splitter_reflectance", cfg.splitter_reflectance);
  if (r.has("detectors")) {
    const json& dets = r.child("detectors");
    if (dets.is_object()) {
      cfg.detectors[0] = cfg.detectors[1] = parse_detector(dets, "/detectors");
    } else if (dets.is_array() && dets.size() == 2) {
      cfg.detectors[0] = parse_detector(dets[0], "/detectors/0");
      cfg.detectors[1] = parse_detector(dets[1], "/detectors/1");
    } else {
      r.fail("detectors", "expected one detector object or an array of two");
    }
  }
  if (r.has("histogram")) cfg.histogram = parse_histogram(r.child("histogram"), "/histogram");
  cfg.fringe_window = r.number("fringe_window", cfg.fringe_window);
  r.finish();
  return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    throw ParseError(fmt::format("line {}, column {}: invalid JSON ({})", line, column, e.what()));
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("{}: cannot open config file", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()));
  }
}

void ExperimentConfig::validate() const {
  if (rng != kRngAlgorithm) throw ConfigError("unsupported rng");
  if (!std::isfinite(duration) || duration <= 0.0) throw ConfigError("duration must be > 0");
  photonlab::validate(emitter);
  if (!std::isfinite(background_rate) || background_rate < 0.0) throw ConfigError("background_rate must be >= 0");
  auto prob = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
  if (!prob(bandpass.signal_transmission) || !prob(bandpass.background_transmission)) {
    throw ConfigError("bandpass transmissions must lie in [0, 1]");
  }
  line.validate();
  scan.validate();
  if (!prob(splitter_reflectance)) throw ConfigError("splitter_reflectance must lie in [0, 1]");
  for (const auto& d : detectors) d.validate();
  if (histogram.bin_width <= 0) throw ConfigError("histogram bin_width_ps must be > 0");
  if (histogram.range < 0) throw ConfigError("histogram range_ps must be >= 0");
  if (histogram.zero_window < 0) throw ConfigError("histogram zero_window_ps must be >= 0");
  if (!std::isfinite(fringe_window) || fringe_window <= 0.0) throw ConfigError("fringe_window must be > 0");
  if (std::holds_alternative<PulsedEmitterConfig>(emitter) || std::holds_alternative<FockPulseConfig>(emitter)) {
    const Picoseconds period = std::holds_alternative<PulsedEmitterConfig>(emitter)
                                   ? std::get<PulsedEmitterConfig>(emitter).rep_period
                                   : std::get<FockPulseConfig>(emitter).rep_period;
    if (seconds_to_ps(duration) < period) throw ConfigError("duration must cover at least one rep_period");
  }
}

json to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["rng"] = cfg.rng;
  if (cfg.seed) doc["seed"] = *cfg.seed;
  doc["duration"] = cfg.duration;
  doc["emitter"] = emitter_to_json(cfg.emitter);
  doc["background_rate"] = cfg.background_rate;
  doc["bandpass"] = {{"signal_transmission", cfg.bandpass.signal_transmission},
                     {"background_transmission", cfg.bandpass.background_transmission}};
  doc["line"] = {{"center_wavelength_nm", cfg.line.center_wavelength_nm},
                 {"shape", to_string(cfg.line.shape)},
                 {"linewidth", cfg.line.linewidth}};
  doc["scan"] = {{"kind", to_string(cfg.scan.kind)},
                 {"amplitude", cfg.scan.amplitude},
                 {"frequency", cfg.scan.frequency},
                 {"offset", cfg.scan.offset}};
  doc["splitter_reflectance"] = cfg.splitter_reflectance;
  doc["detectors"] = json::array({detector_to_json(cfg.detectors[0]), detector_to_json(cfg.detectors[1])});
  doc["histogram"] = {{"bin_width_ps", cfg.histogram.bin_width},
                      {"range_ps", cfg.histogram.range},
                      {"mode", to_string(cfg.histogram.mode)},
                      {"zero_window_ps", cfg.histogram.zero_window}};
  doc["fringe_window"] = cfg.fringe_window;
  return doc;
}

std::string hash_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string config_hash(const ExperimentConfig& cfg) { return hash_hex(to_json(cfg).dump()); }

}  // namespace photonlab
