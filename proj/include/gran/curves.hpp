#pragma once

// Interval-domain curves: a curve bounds the length of the time interval
// spanned by any k consecutive events, for k = 1..n. Index 0 is implicit
// (always 0) and never stored.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gran/bound.hpp"

namespace gran {

class CurveError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised by closure()/combine() when the tightened bounds cross.
class EmptyCurveError : public CurveError {
public:
  explicit EmptyCurveError(std::size_t k)
      : CurveError("empty: lower > upper at k=" + std::to_string(k)), index(k) {}
  std::size_t index;
};

struct Curve {
  std::vector<Bound> lower;
  std::vector<Bound> upper;

  Curve() = default;
  Curve(std::vector<Bound> lo, std::vector<Bound> up) : lower(std::move(lo)), upper(std::move(up)) {
    if (lower.size() != upper.size())
      throw CurveError("lower and upper have different lengths");
  }

  std::size_t size() const { return lower.size(); }
  bool empty() const { return lower.empty(); }

  // 1-based accessors, k in [1, size()].
  Bound lo(std::size_t k) const { return lower.at(k - 1); }
  Bound up(std::size_t k) const { return upper.at(k - 1); }
  Bound& lo(std::size_t k) { return lower.at(k - 1); }
  Bound& up(std::size_t k) { return upper.at(k - 1); }

  /// Curve with lower == upper == `values`.
  static Curve exact(const std::vector<std::int64_t>& values) {
    std::vector<Bound> v(values.begin(), values.end());
    return Curve(v, v);
  }

  bool operator==(const Curve&) const = default;
};

struct Violation {
  std::size_t index; // 1-based
  std::string what;
};

/// Event-count curve over window lengths 0..horizon.
struct CountCurve {
  std::vector<std::int64_t> values;
  std::size_t horizon() const { return values.empty() ? 0 : values.size() - 1; }
};

inline std::optional<Violation> validate(const Curve& c) {
  if (c.lower.size() != c.upper.size())
    return Violation{0, "lower and upper have different lengths"};
  for (std::size_t k = 1; k <= c.size(); ++k) {
    if (c.lo(k) < Bound(0))
      return Violation{k, "negative lower bound"};
    if (c.lo(k) > c.up(k))
      return Violation{k, "lower > upper"};
    if (k > 1 && c.lo(k) < c.lo(k - 1))
      return Violation{k, "lower not non-decreasing"};
    if (k > 1 && c.up(k) < c.up(k - 1))
      return Violation{k, "upper not non-decreasing"};
  }
  return std::nullopt;
}

inline std::string describe(const Violation& v) {
  return "k=" + std::to_string(v.index) + ": " + v.what;
}

/// upper[k] = min{D : a_lower(D) >= k}; unbounded when no such D within the horizon.
inline std::vector<Bound> pseudo_invert_upper(const CountCurve& a_lower, std::size_t n) {
  std::vector<Bound> out(n, kUnbounded);
  std::size_t d = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    while (d < a_lower.values.size() && a_lower.values[d] < static_cast<std::int64_t>(k))
      ++d;
    if (d < a_lower.values.size())
      out[k - 1] = Bound(static_cast<std::int64_t>(d));
  }
  return out;
}

/// lower[k] = max{D : a_upper(D) <= k}; unbounded when the count stays <= k
/// up to the horizon.
inline std::vector<Bound> pseudo_invert_lower(const CountCurve& a_upper, std::size_t n) {
  std::vector<Bound> out(n, Bound(0));
  const auto& v = a_upper.values;
  for (std::size_t k = 1; k <= n; ++k) {
    const auto kk = static_cast<std::int64_t>(k);
    if (v.empty() || v.back() <= kk) {
      out[k - 1] = kUnbounded;
      continue;
    }
    std::int64_t best = -1;
    for (std::size_t d = 0; d < v.size(); ++d)
      if (v[d] <= kk)
        best = static_cast<std::int64_t>(d);
    out[k - 1] = Bound(std::max<std::int64_t>(best, 0));
  }
  return out;
}

/// Granularity sampler: result(k) = c(g*k) for k = 1..floor(n/g).
inline Curve sample(const Curve& c, std::size_t g) {
  if (g == 0)
    throw CurveError("granularity must be >= 1");
  if (g > c.size())
    throw CurveError("granularity " + std::to_string(g) + " exceeds curve length " +
                     std::to_string(c.size()));
  const std::size_t m = c.size() / g;
  Curve out;
  out.lower.reserve(m);
  out.upper.reserve(m);
  for (std::size_t k = 1; k <= m; ++k) {
    out.lower.push_back(c.lo(g * k));
    out.upper.push_back(c.up(g * k));
  }
  return out;
}

namespace detail {

// a - b for the deconvolution rules; nullopt when the difference carries no
// information (unbounded minuend or subtrahend).
inline std::optional<std::int64_t> finite_diff(Bound a, Bound b) {
  if (!a.is_finite() || !b.is_finite())
    return std::nullopt;
  return a.value() - b.value();
}

inline std::optional<std::size_t> first_crossing(const Curve& c) {
  for (std::size_t k = 1; k <= c.size(); ++k)
    if (c.lo(k) > c.up(k))
      return k;
  return std::nullopt;
}

} // namespace detail

/// Fixpoint of the four tightening rules (subadditive upper, superadditive
/// lower, and the two deconvolution rules). Lower bounds only grow, upper
/// bounds only shrink. Throws EmptyCurveError when the bounds cross.
inline Curve closure(Curve c) {
  const std::size_t n = c.size();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 1; a <= n; ++a) {
      for (std::size_t b = 1; a + b <= n; ++b) {
        // R1
        const Bound su = c.up(a) + c.up(b);
        if (su < c.up(a + b)) {
          c.up(a + b) = su;
          changed = true;
        }
        // R2
        const Bound sl = c.lo(a) + c.lo(b);
        if (sl > c.lo(a + b)) {
          c.lo(a + b) = sl;
          changed = true;
        }
        // R3: upper[a] <= upper[a+b] - lower[b]
        if (auto d = detail::finite_diff(c.up(a + b), c.lo(b)); d && Bound(*d) < c.up(a)) {
          c.up(a) = Bound(*d);
          changed = true;
        }
        // R4: lower[a] >= lower[a+b] - upper[b]
        if (c.lo(a + b).is_infinite() && c.up(b).is_finite()) {
          if (c.lo(a).is_finite()) {
            c.lo(a) = kUnbounded;
            changed = true;
          }
        } else if (auto d = detail::finite_diff(c.lo(a + b), c.up(b)); d && Bound(*d) > c.lo(a)) {
          c.lo(a) = Bound(*d);
          changed = true;
        }
      }
    }
    if (auto k = detail::first_crossing(c))
      throw EmptyCurveError(*k);
  }
  if (auto k = detail::first_crossing(c))
    throw EmptyCurveError(*k);
  return c;
}

struct GranularCurve {
  std::size_t granularity;
  Curve curve;
};

/// Pointwise best bound from coarse curves rescaled to fine indices, before
/// any closure.
inline Curve combine_naive(const std::vector<GranularCurve>& inputs) {
  if (inputs.empty())
    throw CurveError("combine needs at least one curve");
  std::size_t n_out = 0;
  for (const auto& in : inputs) {
    if (in.granularity == 0)
      throw CurveError("granularity must be >= 1");
    if (auto v = validate(in.curve))
      throw CurveError("input at g=" + std::to_string(in.granularity) + " invalid: " + describe(*v));
    n_out = std::max(n_out, in.granularity * in.curve.size());
  }
  Curve out(std::vector<Bound>(n_out, Bound(0)), std::vector<Bound>(n_out, kUnbounded));
  for (std::size_t m = 1; m <= n_out; ++m) {
    for (const auto& in : inputs) {
      const std::size_t g = in.granularity;
      for (std::size_t k = 1; k <= in.curve.size(); ++k) {
        if (k * g >= m)
          out.up(m) = std::min(out.up(m), in.curve.up(k));
        if (k * g <= m)
          out.lo(m) = std::max(out.lo(m), in.curve.lo(k));
      }
    }
  }
  return out;
}

/// Naive combination followed by closure.
inline Curve combine(const std::vector<GranularCurve>& inputs) { return closure(combine_naive(inputs)); }

/// Mean of the per-side mean gaps between a fine curve and a coarse curve at
/// granularity g, over k = 1..coarse.size().
inline double distance(const Curve& fine, const Curve& coarse, std::size_t g) {
  if (g == 0 || coarse.empty() || coarse.size() > fine.size() / g)
    throw CurveError("incompatible curve lengths for distance");
  double lo_sum = 0;
  double up_sum = 0;
  for (std::size_t k = 1; k <= coarse.size(); ++k) {
    const auto dl = detail::finite_diff(fine.lo(g * k), coarse.lo(k));
    const auto du = detail::finite_diff(coarse.up(k), fine.up(g * k));
    if (!dl || !du)
      throw CurveError("distance undefined with unbounded entries at k=" + std::to_string(k));
    lo_sum += static_cast<double>(*dl);
    up_sum += static_cast<double>(*du);
  }
  const auto m = static_cast<double>(coarse.size());
  return (lo_sum / m + up_sum / m) / 2.0;
}

// CSV: header `k,xi_lower,xi_upper`, one row per k, `inf` for the sentinel.

inline std::string to_csv(const Curve& c) {
  std::string s = "k,xi_lower,xi_upper\n";
  for (std::size_t k = 1; k <= c.size(); ++k)
    s += std::to_string(k) + "," + c.lo(k).str() + "," + c.up(k).str() + "\n";
  return s;
}

namespace detail {

inline Bound parse_bound(const std::string& field, std::size_t line) {
  if (field == "inf")
    return kUnbounded;
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size())
    throw CurveError("line " + std::to_string(line) + ": bad value '" + field + "'");
  return Bound(v);
}

} // namespace detail

inline Curve from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "k,xi_lower,xi_upper")
    throw CurveError("line 1: expected header 'k,xi_lower,xi_upper'");
  Curve c;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');)
      f.push_back(cell);
    if (f.size() != 3)
      throw CurveError("line " + std::to_string(lineno) + ": expected 3 fields");
    if (f[0] != std::to_string(c.size() + 1))
      throw CurveError("line " + std::to_string(lineno) + ": expected k=" + std::to_string(c.size() + 1));
    c.lower.push_back(detail::parse_bound(f[1], lineno));
    c.upper.push_back(detail::parse_bound(f[2], lineno));
  }
  return c;
}

} // namespace gran
