#include "photonlab/event_stream.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "photonlab/errors.hpp"

namespace photonlab {

Picoseconds seconds_to_ps(double seconds) {
  if (!std::isfinite(seconds)) throw ConfigError("time value is not finite");
  return static_cast<Picoseconds>(std::llround(seconds * kPsPerSecond));
}

std::string_view to_string(EventTag tag) {
  switch (tag) {
    case EventTag::signal: return "signal";
    case EventTag::background: return "background";
    case EventTag::dark: return "dark";
  }
  return "unknown";
}

EventStream::EventStream(std::vector<Event> events, Picoseconds duration)
    : events_(std::move(events)), duration_(duration) {
  if (duration_ < 0) throw ConfigError("event stream duration must be nonnegative");
  if (!is_valid()) {
    throw ConfigError(fmt::format("event stream violates ordering/range invariants ({} events, duration {} ps)",
                                  events_.size(), duration_));
  }
}

std::vector<Picoseconds> EventStream::times() const {
  std::vector<Picoseconds> out;
  out.reserve(events_.size());
  for (const auto& e : events_) out.push_back(e.time);
  return out;
}

std::size_t EventStream::count(EventTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(events_.begin(), events_.end(), [tag](const Event& e) { return e.tag == tag; }));
}

bool EventStream::is_valid() const {
  Picoseconds prev = 0;
  for (const auto& e : events_) {
    if (e.time < prev || e.time > duration_) return false;
    prev = e.time;
  }
  return true;
}

EventStream merge(const EventStream& a, const EventStream& b) {
  std::vector<Event> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out),
             [](const Event& x, const Event& y) { return x.time < y.time; });
  return EventStream(std::move(out), std::max(a.duration(), b.duration()));
}

}  // namespace photonlab
