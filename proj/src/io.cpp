#include "photonlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <fmt/format.h>

#include "photonlab/errors.hpp"

namespace photonlab {
namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return static_cast<T>(v);
}

TimestampFile finish(std::uint16_t channel, std::vector<Event> events, std::optional<Picoseconds> duration) {
  const Picoseconds last = events.empty() ? 0 : events.back().time;
  const Picoseconds span = duration.value_or(last);
  if (span < last) throw ParseError(fmt::format("duration {} ps is shorter than the last timestamp {} ps", span, last));
  return {channel, EventStream(std::move(events), span)};
}

TimestampFile decode_binary(std::string_view bytes, std::optional<Picoseconds> duration) {
  if (bytes.size() < 16) throw ParseError("binary timestamp file: truncated header");
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kTimestampVersion) throw ParseError(fmt::format("binary timestamp file: unsupported version {}", version));
  const auto channel = get_le<std::uint16_t>(bytes, 6);
  const auto count = get_le<std::uint64_t>(bytes, 8);
  if ((bytes.size() - 16) / 8 != count || (bytes.size() - 16) % 8 != 0) {
    throw ParseError(fmt::format("binary timestamp file: header declares {} events but payload holds {} bytes", count,
                                 bytes.size() - 16));
  }
  std::vector<Event> events;
  events.reserve(count);
  Picoseconds prev = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto raw = get_le<std::uint64_t>(bytes, 16 + 8 * i);
    if (raw > static_cast<std::uint64_t>(INT64_MAX)) throw ParseError("binary timestamp file: timestamp overflows");
    const auto t = static_cast<Picoseconds>(raw);
    if (t < prev) throw ParseError(fmt::format("binary timestamp file: timestamps not sorted at event {}", i));
    events.push_back({t, EventTag::signal});
    prev = t;
  }
  return finish(channel, std::move(events), duration);
}

TimestampFile decode_csv(std::string_view bytes, std::optional<Picoseconds> duration) {
  std::vector<Event> events;
  Picoseconds prev = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    Picoseconds t = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), t);
    if (ec != std::errc() || ptr != line.data() + line.size() || t < 0) {
      throw ParseError(fmt::format("timestamp CSV line {}: expected a nonnegative integer, got '{}'", line_no, line));
    }
    if (t < prev) throw ParseError(fmt::format("timestamp CSV line {}: timestamps not sorted", line_no));
    events.push_back({t, EventTag::signal});
    prev = t;
  }
  return finish(0, std::move(events), duration);
}

}  // namespace

std::string encode_timestamps_binary(const EventStream& stream, std::uint16_t channel) {
  std::string out;
  out.reserve(16 + 8 * stream.size());
  out.append(kTimestampMagic.data(), kTimestampMagic.size());
  put_le<std::uint16_t>(out, kTimestampVersion);
  put_le<std::uint16_t>(out, channel);
  put_le<std::uint64_t>(out, stream.size());
  for (const auto& e : stream) put_le<std::uint64_t>(out, static_cast<std::uint64_t>(e.time));
  return out;
}

std::string encode_timestamps_csv(const EventStream& stream) {
  std::string out;
  out.reserve(14 * stream.size());
  for (const auto& e : stream) fmt::format_to(std::back_inserter(out), "{}\n", e.time);
  return out;
}

TimestampFile decode_timestamps(std::string_view bytes, std::optional<Picoseconds> duration) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kTimestampMagic.data(), 4) == 0) {
    return decode_binary(bytes, duration);
  }
  return decode_csv(bytes, duration);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("{}: cannot open file", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

TimestampFile read_timestamps(const std::filesystem::path& path, std::optional<Picoseconds> duration) {
  const std::string bytes = read_file(path);
  try {
    return decode_timestamps(bytes, duration);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("{}: cannot write", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error(fmt::format("{}: write failed", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

std::string histogram_csv(const CoincidenceHistogram& h, std::string_view config_hash) {
  std::string out = fmt::format("# config_hash={}\n# bin_width_ps={} n_starts={} n_stops={} duration_ps={}\n",
                                config_hash, h.bin_width, h.n_starts, h.n_stops, h.duration);
  out += "tau_ps,counts\n";
  for (std::size_t i = 0; i < h.size(); ++i) fmt::format_to(std::back_inserter(out), "{},{}\n", h.tau_center(i), h.counts[i]);
  return out;
}

std::string g2_csv(const G2Estimate& g2, std::string_view config_hash) {
  std::string out = fmt::format("# config_hash={}\ntau_ps,g2,stderr\n", config_hash);
  for (const auto& b : g2.bins) fmt::format_to(std::back_inserter(out), "{},{:.9g},{:.9g}\n", b.tau, b.g2, b.error);
  return out;
}

std::string fringe_csv(const FringeTrace& trace, std::string_view config_hash) {
  std::string out = fmt::format("# config_hash={}\nwindow_start_s,counts\n", config_hash);
  for (const auto& s : trace.samples) {
    fmt::format_to(std::back_inserter(out), "{:.9g},{}\n", s.window_start, s.counts);
  }
  return out;
}

std::string svg_plot(const PlotSeries& series, const PlotStyle& style, std::string_view config_hash) {
  constexpr double width = 720.0;
  constexpr double height = 420.0;
  constexpr double left = 70.0;
  constexpr double right = 20.0;
  constexpr double top = 40.0;
  constexpr double bottom = 50.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (!series.x.empty()) {
    const auto [xmin, xmax] = std::minmax_element(series.x.begin(), series.x.end());
    const auto [ymin, ymax] = std::minmax_element(series.y.begin(), series.y.end());
    x0 = *xmin;
    x1 = *xmax;
    y0 = std::min(0.0, *ymin);
    y1 = *ymax;
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * plot_h; };

  std::string out;
  fmt::format_to(std::back_inserter(out),
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                 width, height, width, height);
  fmt::format_to(std::back_inserter(out), "<!-- config_hash={} -->\n", config_hash);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  fmt::format_to(std::back_inserter(out),
                 "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left, top,
                 plot_w, plot_h);
  fmt::format_to(std::back_inserter(out),
                 "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
                 left + plot_w / 2, style.title);
  fmt::format_to(std::back_inserter(out),
                 "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
                 left + plot_w / 2, height - 12, style.x_label);
  fmt::format_to(std::back_inserter(out),
                 "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                 "transform=\"rotate(-90 16 {})\">{}</text>\n",
                 top + plot_h / 2, top + plot_h / 2, style.y_label);
  const std::pair<double, double> x_ticks[] = {{x0, px(x0)}, {x1, px(x1)}};
  for (const auto& [value, pos] : x_ticks) {
    fmt::format_to(std::back_inserter(out),
                   "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"10\" "
                   "text-anchor=\"middle\">{:.4g}</text>\n",
                   pos, top + plot_h + 14, value);
  }
  const std::pair<double, double> y_ticks[] = {{y0, py(y0)}, {y1, py(y1)}};
  for (const auto& [value, pos] : y_ticks) {
    fmt::format_to(std::back_inserter(out),
                   "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"10\" "
                   "text-anchor=\"end\">{:.4g}</text>\n",
                   left - 4, pos + 4, value);
  }
  out += "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < series.x.size(); ++i) {
    if (style.steps && i > 0) fmt::format_to(std::back_inserter(out), "{:.2f},{:.2f} ", px(series.x[i]), py(series.y[i - 1]));
    fmt::format_to(std::back_inserter(out), "{:.2f},{:.2f} ", px(series.x[i]), py(series.y[i]));
  }
  out += "\"/>\n</svg>\n";
  return out;
}

std::string histogram_svg(const CoincidenceHistogram& h, std::string_view config_hash) {
  PlotSeries s;
  for (std::size_t i = 0; i < h.size(); ++i) {
    s.x.push_back(static_cast<double>(h.tau_center(i)) * 1e-3);
    s.y.push_back(static_cast<double>(h.counts[i]));
  }
  return svg_plot(s, {"Coincidence histogram", "delay (ns)", "coincidences", true}, config_hash);
}

std::string g2_svg(const G2Estimate& g2, std::string_view config_hash) {
  PlotSeries s;
  for (const auto& b : g2.bins) {
    s.x.push_back(static_cast<double>(b.tau) * 1e-3);
    s.y.push_back(b.g2);
  }
  return svg_plot(s, {"Normalized second-order correlation", "delay (ns)", "g2", false}, config_hash);
}

std::string fringe_svg(const FringeTrace& trace, std::string_view config_hash) {
  PlotSeries s;
  for (const auto& sample : trace.samples) {
    s.x.push_back(sample.window_start);
    s.y.push_back(static_cast<double>(sample.counts));
  }
  return svg_plot(s, {"Single-detector count rate", "time (s)", fmt::format("counts / {:g} s", trace.window), false},
                  config_hash);
}

}  // namespace photonlab
