#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gran/curves.hpp"

namespace gran::test {

inline std::vector<Bound> bounds(std::initializer_list<std::int64_t> v) { return {v.begin(), v.end()}; }

/// Valid curve with n points and finite constants in [0, maxc]; upper entries
/// are unbounded with probability p_inf.
inline Curve random_curve(std::mt19937& rng, std::size_t n, std::int64_t maxc, double p_inf = 0.0) {
  std::uniform_int_distribution<std::int64_t> val(0, maxc);
  std::bernoulli_distribution inf(p_inf);
  std::vector<std::int64_t> lo(n), up(n);
  for (auto& v : lo)
    v = val(rng);
  std::sort(lo.begin(), lo.end());
  Curve c;
  std::int64_t prev = 0;
  bool unbounded = false;
  for (std::size_t k = 0; k < n; ++k) {
    c.lower.push_back(Bound(lo[k]));
    std::int64_t u = std::max({prev, lo[k], val(rng)});
    prev = u;
    unbounded = unbounded || inf(rng);
    c.upper.push_back(unbounded ? kUnbounded : Bound(u));
  }
  return c;
}

} // namespace gran::test
