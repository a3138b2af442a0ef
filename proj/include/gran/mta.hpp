#pragma once

// Mode-based description of a power-managed component: each mode has a
// service curve, optional buffer thresholds, dwell bounds and up to four
// kinds of outgoing transitions.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gran/curves.hpp"

namespace gran {

enum class TransitionKind { Sync, Timeout, BufferAbove, BufferBelow };

inline const char* to_string(TransitionKind k) {
  switch (k) {
  case TransitionKind::Sync: return "sync";
  case TransitionKind::Timeout: return "timeout";
  case TransitionKind::BufferAbove: return "buffer_above";
  case TransitionKind::BufferBelow: return "buffer_below";
  }
  return "?";
}

inline std::optional<TransitionKind> parse_transition_kind(const std::string& s) {
  if (s == "sync") return TransitionKind::Sync;
  if (s == "timeout") return TransitionKind::Timeout;
  if (s == "buffer_above") return TransitionKind::BufferAbove;
  if (s == "buffer_below") return TransitionKind::BufferBelow;
  return std::nullopt;
}

struct Transition {
  TransitionKind kind;
  std::string target;
  std::string channel; // sync only
};

struct Mode {
  std::string name;
  Curve service;
  std::optional<std::int64_t> buf_low;   // nullopt: -inf
  std::optional<std::int64_t> buf_high;  // nullopt: +inf
  std::int64_t dwell_min = 0;
  std::optional<std::int64_t> dwell_max; // nullopt: +inf
  std::vector<Transition> transitions;

  const Transition* find(TransitionKind k) const {
    auto it = std::find_if(transitions.begin(), transitions.end(),
                           [k](const Transition& t) { return t.kind == k; });
    return it == transitions.end() ? nullptr : &*it;
  }
};

struct Mta {
  std::vector<Mode> modes;
  std::string initial;
  std::int64_t initial_backlog = 0;
  std::vector<std::string> channels;

  std::optional<std::size_t> index_of(const std::string& name) const {
    for (std::size_t i = 0; i < modes.size(); ++i)
      if (modes[i].name == name)
        return i;
    return std::nullopt;
  }

  std::size_t target_index(const Transition& t) const { return *index_of(t.target); }
  std::size_t initial_index() const { return *index_of(initial); }
};

/// Returns a description of the first violated invariant, or nullopt.
/// A threshold or dwell bound is only meaningful as the guard of its
/// transition, so a finite bound without the matching transition is rejected.
inline std::optional<std::string> validate_mta(const Mta& m) {
  if (m.modes.empty())
    return "no modes";
  if (m.initial_backlog < 0)
    return "initial_backlog is negative";
  if (!m.index_of(m.initial))
    return "initial mode '" + m.initial + "' is not declared";
  std::set<std::string> names;
  for (const auto& mode : m.modes) {
    const std::string where = "mode '" + mode.name + "': ";
    if (!names.insert(mode.name).second)
      return where + "duplicate name";
    if (mode.service.empty())
      return where + "empty service curve";
    if (auto v = validate(mode.service))
      return where + "service curve " + describe(*v);
    if (mode.buf_low && mode.buf_high && *mode.buf_low > *mode.buf_high)
      return where + "buf_low > buf_high";
    if (mode.dwell_min < 0)
      return where + "negative dwell_min";
    if (mode.dwell_max && *mode.dwell_max < mode.dwell_min)
      return where + "dwell_min > dwell_max";
    std::set<TransitionKind> kinds;
    for (const auto& t : mode.transitions) {
      if (!kinds.insert(t.kind).second)
        return where + "more than one " + to_string(t.kind) + " transition";
      if (!m.index_of(t.target))
        return where + to_string(t.kind) + " transition targets undeclared mode '" + t.target + "'";
      switch (t.kind) {
      case TransitionKind::Sync:
        if (std::find(m.channels.begin(), m.channels.end(), t.channel) == m.channels.end())
          return where + "sync channel '" + t.channel + "' is not declared";
        break;
      case TransitionKind::Timeout:
        if (!mode.dwell_max)
          return where + "timeout transition requires finite dwell_max";
        break;
      case TransitionKind::BufferAbove:
        if (!mode.buf_high)
          return where + "buffer_above transition requires finite buf_high";
        break;
      case TransitionKind::BufferBelow:
        if (!mode.buf_low)
          return where + "buffer_below transition requires finite buf_low";
        break;
      }
    }
    if (mode.dwell_max && !mode.find(TransitionKind::Timeout))
      return where + "finite dwell_max without a timeout transition";
    if (mode.buf_high && !mode.find(TransitionKind::BufferAbove))
      return where + "finite buf_high without a buffer_above transition";
    if (mode.buf_low && !mode.find(TransitionKind::BufferBelow))
      return where + "finite buf_low without a buffer_below transition";
  }
  return std::nullopt;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0)))
    --q;
  return q;
}

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

/// Coarse-backlog brackets of the fine thresholds. Y values come from
/// buf_high (nullopt: +inf), H values from buf_low (nullopt: -inf).
struct CoarseThresholds {
  std::optional<std::int64_t> y_low, y_high;
  std::optional<std::int64_t> h_low, h_high;
  bool operator==(const CoarseThresholds&) const = default;
};

inline CoarseThresholds coarse_thresholds(std::optional<std::int64_t> b_low,
                                          std::optional<std::int64_t> b_high, std::int64_t g) {
  CoarseThresholds t;
  if (b_high) {
    t.y_low = floor_div(*b_high + 1, g);
    t.y_high = ceil_div(*b_high + 1, g);
  }
  if (b_low) {
    t.h_low = floor_div(*b_low - 1, g);
    t.h_high = ceil_div(*b_low - 1, g);
  }
  return t;
}

} // namespace gran
