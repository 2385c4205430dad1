#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace photonlab {

/// Timestamps are integer picoseconds throughout.
using Picoseconds = std::int64_t;

inline constexpr double kPsPerSecond = 1e12;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Seconds -> nearest picosecond.
Picoseconds seconds_to_ps(double seconds);
inline double ps_to_seconds(Picoseconds ps) { return static_cast<double>(ps) / kPsPerSecond; }

enum class EventTag : std::uint8_t { signal = 0, background = 1, dark = 2 };

std::string_view to_string(EventTag tag);

struct Event {
  Picoseconds time = 0;
  EventTag tag = EventTag::signal;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Ordered photon (or click) record over the window [0, duration].
class EventStream {
 public:
  EventStream() = default;
  explicit EventStream(Picoseconds duration) : duration_(duration) {}
  /// Takes ownership of `events`; throws ConfigError if ordering or range
  /// invariants do not hold.
  EventStream(std::vector<Event> events, Picoseconds duration);

  Picoseconds duration() const { return duration_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  std::span<const Event> events() const { return events_; }
  const Event& operator[](std::size_t i) const { return events_[i]; }
  auto begin() const { return events_.begin(); }
  auto end() const { return events_.end(); }

  std::vector<Picoseconds> times() const;
  std::size_t count(EventTag tag) const;

  /// Returns true iff times are nondecreasing and within [0, duration].
  bool is_valid() const;

  friend bool operator==(const EventStream&, const EventStream&) = default;

 private:
  std::vector<Event> events_;
  Picoseconds duration_ = 0;
};

/// Sorted merge; ties keep `a` first. Duration is the larger of the two.
EventStream merge(const EventStream& a, const EventStream& b);

}  // namespace photonlab
