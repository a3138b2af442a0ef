#pragma once

// Finite event-stream prefixes. times[0] is the time origin (always 0) and
// takes part in every window check like a real event.

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gran/curves.hpp"

namespace gran {

class StreamError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct EventStream {
  std::vector<std::int64_t> times{0};

  EventStream() = default;
  explicit EventStream(std::vector<std::int64_t> t) : times(std::move(t)) {
    if (times.empty() || times.front() != 0)
      throw StreamError("stream must start at t0 = 0");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (times[i] < times[i - 1])
        throw StreamError("timestamps decrease at index " + std::to_string(i));
  }

  /// Number of events after the origin.
  std::size_t events() const { return times.size() - 1; }
  std::int64_t at(std::size_t i) const { return times.at(i); }

  auto operator<=>(const EventStream&) const = default;
};

struct CoarseStream {
  std::size_t granularity = 1;
  EventStream stream;

  bool operator==(const CoarseStream&) const = default;
};

/// lower[k] <= t[i+k] - t[i] <= upper[k] for every window present in the prefix.
inline bool conforms(const EventStream& s, const Curve& c) {
  const auto& t = s.times;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t k = 1; k <= c.size() && i + k < t.size(); ++k) {
      const Bound d(t[i + k] - t[i]);
      if (d < c.lo(k) || d > c.up(k))
        return false;
    }
  }
  return true;
}

/// Every g-th timestamp: T_i = t_{g i}.
inline CoarseStream abstract(const EventStream& s, std::size_t g) {
  if (g == 0)
    throw StreamError("granularity must be >= 1");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < s.times.size(); i += g)
    out.push_back(s.times[i]);
  return CoarseStream{g, EventStream(std::move(out))};
}

/// True iff the coarse stream agrees with the fine stream's abstraction on
/// their common prefix.
inline bool is_refinement(const EventStream& fine, const CoarseStream& coarse) {
  const auto a = abstract(fine, coarse.granularity);
  const auto& x = a.stream.times;
  const auto& y = coarse.stream.times;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    if (x[i] != y[i])
      return false;
  return true;
}

inline std::string to_csv(const EventStream& s) {
  std::string out = "t\n";
  for (auto t : s.times)
    out += std::to_string(t) + "\n";
  return out;
}

inline EventStream stream_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "t")
    throw StreamError("expected header 't'");
  std::vector<std::int64_t> t;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    try {
      std::size_t used = 0;
      t.push_back(std::stoll(line, &used));
      if (used != line.size())
        throw StreamError("bad timestamp '" + line + "'");
    } catch (const std::invalid_argument&) {
      throw StreamError("bad timestamp '" + line + "'");
    }
  }
  return EventStream(std::move(t));
}

} // namespace gran
