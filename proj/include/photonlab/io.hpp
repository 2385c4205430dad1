#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "photonlab/correlator.hpp"
#include "photonlab/detection.hpp"
#include "photonlab/event_stream.hpp"

namespace photonlab {

// Binary timestamp file: 16-byte little-endian header followed by one u64
// picosecond timestamp per event.
//   offset 0  char[4] magic "PHTS"
//   offset 4  u16     version (1)
//   offset 6  u16     channel id
//   offset 8  u64     event count
inline constexpr std::array<char, 4> kTimestampMagic{'P', 'H', 'T', 'S'};
inline constexpr std::uint16_t kTimestampVersion = 1;

struct TimestampFile {
  std::uint16_t channel = 0;
  EventStream stream;
};

std::string encode_timestamps_binary(const EventStream& stream, std::uint16_t channel);
std::string encode_timestamps_csv(const EventStream& stream);

/// Decodes either format (binary is recognized by its magic). CSV accepts one
/// nonnegative integer per line; blank lines and '#' comments are skipped.
/// The stream duration is `duration` if given, else the last timestamp.
/// Throws ParseError on malformed or unsorted input.
TimestampFile decode_timestamps(std::string_view bytes, std::optional<Picoseconds> duration = std::nullopt);
TimestampFile read_timestamps(const std::filesystem::path& path, std::optional<Picoseconds> duration = std::nullopt);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Exports. Each embeds the config hash: a leading '#' line in CSV and an XML
// comment in SVG.
std::string histogram_csv(const CoincidenceHistogram& h, std::string_view config_hash);
std::string g2_csv(const G2Estimate& g2, std::string_view config_hash);
std::string fringe_csv(const FringeTrace& trace, std::string_view config_hash);

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool steps = false;
};

/// Minimal static line or step chart.
std::string svg_plot(const PlotSeries& series, const PlotStyle& style, std::string_view config_hash);

std::string histogram_svg(const CoincidenceHistogram& h, std::string_view config_hash);
std::string g2_svg(const G2Estimate& g2, std::string_view config_hash);
std::string fringe_svg(const FringeTrace& trace, std::string_view config_hash);

}  // namespace photonlab
