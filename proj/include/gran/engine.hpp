#pragma once

// Min-cost reachability over a network (uniform-cost search with best-cost
// dominance), the per-K / per-window analysis loops built on it, and a
// bounded trace explorer used by the property tests.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gran/automata.hpp"
#include "gran/curves.hpp"
#include "gran/translate.hpp"

namespace gran {

struct RunStats {
  std::uint64_t explored = 0;
  std::uint64_t stored = 0;
  std::uint64_t peak_frontier = 0;
  double millis = 0;
};

enum class SearchStatus { Reached, Unreachable, BudgetExceeded };

/// `cost` is exact when Reached and a lower bound when BudgetExceeded.
struct SearchResult {
  SearchStatus status = SearchStatus::Unreachable;
  std::int64_t cost = 0;
  RunStats stats;
};

struct SearchOptions {
  std::uint64_t state_budget = 10'000'000;
  bool dominance = true; // false: every generated state is pushed (test use)
};

namespace detail {

// Open-addressing set of fixed-width states stored back to back in one pool.
class StateStore {
public:
  explicit StateStore(std::size_t width) : width_(width) { slots_.assign(1024, kEmpty); }

  std::size_t size() const { return count_; }
  const ta::Slot* at(std::uint32_t id) const { return pool_.data() + static_cast<std::size_t>(id) * width_; }

  /// Returns (id, inserted).
  std::pair<std::uint32_t, bool> insert(const ta::Slot* s) {
    if ((count_ + 1) * 2 > slots_.size())
      grow();
    const std::uint64_t h = hash(s);
    std::size_t i = h & (slots_.size() - 1);
    while (slots_[i] != kEmpty) {
      if (std::memcmp(at(slots_[i]), s, width_ * sizeof(ta::Slot)) == 0)
        return {slots_[i], false};
      i = (i + 1) & (slots_.size() - 1);
    }
    const auto id = static_cast<std::uint32_t>(count_++);
    pool_.insert(pool_.end(), s, s + width_);
    slots_[i] = id;
    return {id, true};
  }

private:
  static constexpr std::uint32_t kEmpty = 0xffffffffu;

  std::uint64_t hash(const ta::Slot* s) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < width_; ++i) {
      h ^= static_cast<std::uint16_t>(s[i]);
      h *= 1099511628211ull;
    }
    return h ^ (h >> 29);
  }

  void grow() {
    std::vector<std::uint32_t> old(slots_.size() * 2, kEmpty);
    old.swap(slots_);
    for (auto id : old) {
      if (id == kEmpty)
        continue;
      std::size_t i = hash(at(id)) & (slots_.size() - 1);
      while (slots_[i] != kEmpty)
        i = (i + 1) & (slots_.size() - 1);
      slots_[i] = id;
    }
  }

  std::size_t width_;
  std::size_t count_ = 0;
  std::vector<ta::Slot> pool_;
  std::vector<std::uint32_t> slots_;
};

} // namespace detail

using Target = std::function<bool(const ta::Slot*)>;

/// Target: automaton `aut` is in location `loc`.
inline Target location_target(const ta::Network& net, const std::string& aut, const std::string& loc) {
  const auto a = net.automaton_index(aut);
  if (!a)
    throw ta::ModelError("no automaton '" + aut + "'");
  const auto l = net.automata()[*a].location_index(loc);
  if (!l)
    throw ta::ModelError("automaton '" + aut + "' has no location '" + loc + "'");
  return [a = *a, l = static_cast<ta::Slot>(*l)](const ta::Slot* s) { return s[a] == l; };
}

/// Least accumulated cost from the initial state to a target state.
inline SearchResult min_cost(const ta::Network& net, const Target& target, const SearchOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  SearchResult res;
  detail::StateStore store(net.width());
  std::vector<std::int64_t> best;
  using Entry = std::pair<std::int64_t, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  // without dominance every push gets its own copy
  std::vector<ta::Slot> copies;

  auto push = [&](const ta::Slot* s, std::int64_t cost) {
    if (!opt.dominance) {
      copies.insert(copies.end(), s, s + net.width());
      open.emplace(cost, static_cast<std::uint32_t>(copies.size() / net.width() - 1));
      ++res.stats.stored;
      return;
    }
    auto [id, fresh] = store.insert(s);
    if (fresh) {
      best.push_back(cost);
    } else if (cost < best[id]) {
      best[id] = cost;
    } else {
      return;
    }
    open.emplace(cost, id);
  };

  const auto init = net.initial();
  push(init.data(), 0);
  std::vector<ta::Slot> cur(net.width());
  while (!open.empty()) {
    res.stats.peak_frontier = std::max<std::uint64_t>(res.stats.peak_frontier, open.size());
    const auto [cost, id] = open.top();
    open.pop();
    const ta::Slot* s = opt.dominance ? store.at(id) : copies.data() + static_cast<std::size_t>(id) * net.width();
    if (opt.dominance && cost > best[id])
      continue;
    std::copy(s, s + net.width(), cur.begin());
    ++res.stats.explored;
    if (target(cur.data())) {
      res.status = SearchStatus::Reached;
      res.cost = cost;
      break;
    }
    net.for_each_successor(cur.data(), [&](const ta::Slot* succ, std::int64_t d) { push(succ, cost + d); });
    const std::uint64_t stored = opt.dominance ? store.size() : res.stats.stored;
    if (stored > opt.state_budget) {
      res.status = SearchStatus::BudgetExceeded;
      res.cost = open.empty() ? cost : std::min(cost, open.top().first);
      break;
    }
  }
  if (opt.dominance)
    res.stats.stored = store.size();
  res.stats.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

struct EngineOptions {
  std::uint64_t state_budget = 10'000'000;
  std::size_t jobs = 1;
};

struct PointResult {
  std::int64_t param = 0; // K for the lower curve, window length for the count curve
  SearchResult result;
};

struct LowerAnalysis {
  std::vector<Bound> lower;
  std::vector<PointResult> points;
  bool partial = false;
};

struct UpperAnalysis {
  std::vector<Bound> upper;
  CountCurve alpha; // min events in a half-open window of each length
  std::vector<PointResult> points;
  bool partial = false;
  bool truncated = false; // unbounded entries left because of the horizon
};

namespace detail {

template <class F>
void run_parallel(std::size_t count, std::size_t jobs, F&& f) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < std::min(jobs, count); ++j)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++)
        f(i);
    });
  for (auto& t : pool)
    t.join();
}

inline SearchResult observe(const std::vector<ta::Automaton>& system, const ObserverSpec& spec,
                            const EngineOptions& opt) {
  auto automata = system;
  automata.push_back(build_observer(spec));
  const ta::Network net(std::move(automata));
  SearchOptions so;
  so.state_budget = opt.state_budget;
  return min_cost(net, location_target(net, "observer", "Stop"), so);
}

} // namespace detail

/// lower[K] = least time spanned by K+1 consecutive output events, K = 1..n.
inline LowerAnalysis analyze_lower(const std::vector<ta::Automaton>& system, std::size_t n,
                                   const EngineOptions& opt = {}) {
  LowerAnalysis out;
  out.points.resize(n);
  detail::run_parallel(n, opt.jobs, [&](std::size_t i) {
    const auto k = static_cast<std::int64_t>(i + 1);
    out.points[i] = {k, detail::observe(system, {ObserverVariant::WindowMin, k, kProduce}, opt)};
  });
  for (const auto& p : out.points) {
    switch (p.result.status) {
    case SearchStatus::Reached: out.lower.emplace_back(p.result.cost); break;
    case SearchStatus::Unreachable: out.lower.push_back(kUnbounded); break;
    case SearchStatus::BudgetExceeded:
      out.lower.emplace_back(p.result.cost);
      out.partial = true;
      break;
    }
  }
  return out;
}

/// Only the window lengths where the count curve steps are searched for:
/// for each k the first length reaching k is located by galloping and then
/// bisection. The count curve is monotone, so every other length takes the
/// value of the nearest probed length below it.
inline UpperAnalysis analyze_upper(const std::vector<ta::Automaton>& system, std::size_t horizon, std::size_t n,
                                   const EngineOptions& opt = {}) {
  UpperAnalysis out;
  const auto target = static_cast<std::int64_t>(n);
  std::map<std::size_t, PointResult> probes;
  auto count_at = [&](std::size_t delta) {
    auto it = probes.find(delta);
    if (it == probes.end()) {
      const auto d = static_cast<std::int64_t>(delta);
      // an open window of length delta+1 holds the events of (s, s+delta]
      it = probes.emplace(delta, PointResult{d, detail::observe(system, {ObserverVariant::CountMin, d + 1, kProduce}, opt)})
               .first;
      if (it->second.result.status == SearchStatus::BudgetExceeded)
        out.partial = true;
    }
    const auto& r = it->second.result;
    std::int64_t a = r.status == SearchStatus::Unreachable ? target : r.cost;
    for (auto lo = probes.begin(); lo != it; ++lo)
      a = std::max(a, lo->second.result.status == SearchStatus::Unreachable ? target : lo->second.result.cost);
    return a;
  };

  std::size_t reached = 0, gap = 1; // count_at(reached) >= k - 1
  for (std::int64_t k = 1; k <= target; ++k) {
    if (count_at(reached) >= k)
      continue;
    std::size_t lo = reached, step = gap, hi = 0;
    while (lo < horizon) {
      const std::size_t probe = std::min(horizon, lo + step);
      if (count_at(probe) >= k) {
        hi = probe;
        break;
      }
      lo = probe;
      step *= 2;
    }
    if (hi == 0)
      break;
    // steps tend to repeat, so try just below the guess first
    if (hi - lo > 1) {
      if (count_at(hi - 1) >= k)
        hi = hi - 1;
      else
        lo = hi - 1;
    }
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      (count_at(mid) >= k ? hi : lo) = mid;
    }
    gap = hi - reached;
    reached = hi;
  }

  std::int64_t a = 0;
  const std::size_t last = probes.empty() ? 0 : probes.rbegin()->first;
  for (std::size_t d = 0; d <= last; ++d) {
    if (auto it = probes.find(d); it != probes.end())
      a = std::max(a, it->second.result.status == SearchStatus::Unreachable ? target : it->second.result.cost);
    out.alpha.values.push_back(a);
  }
  for (auto& [d, p] : probes)
    out.points.push_back(std::move(p));
  out.upper = pseudo_invert_upper(out.alpha, n);
  out.truncated = std::any_of(out.upper.begin(), out.upper.end(), [](Bound b) { return b.is_infinite(); });
  return out;
}

/// `K,cost,states_explored,states_stored,millis`; the first column carries
/// the window length for count-curve points.
inline std::string stats_csv(const std::vector<PointResult>& pts) {
  std::string s = "K,cost,states_explored,states_stored,millis\n";
  char ms[32];
  for (const auto& p : pts) {
    const std::string cost = p.result.status == SearchStatus::Unreachable ? "inf" : std::to_string(p.result.cost);
    std::snprintf(ms, sizeof ms, "%.3f", p.result.stats.millis);
    s += std::to_string(p.param) + "," + cost + "," + std::to_string(p.result.stats.explored) + "," +
         std::to_string(p.result.stats.stored) + "," + ms + "\n";
  }
  return s;
}

enum class TraceCollect {
  OnEvent,  // every prefix right after an event (and the empty one)
  AtHorizon // prefixes of runs that can still let time pass at the horizon
};

/// Timestamp sequences (origin included) of the events seen by the tap
/// automaton `tap` (see build_tap) over all runs up to `horizon`. Runs with
/// more than `max_events` events are cut.
inline std::set<std::vector<std::int64_t>> explore_traces(const ta::Network& net, const std::string& tap,
                                                          std::int64_t horizon, std::size_t max_events,
                                                          TraceCollect mode, std::size_t state_cap = 5'000'000) {
  const auto a = net.automaton_index(tap);
  if (!a)
    throw ta::ModelError("no automaton '" + tap + "'");
  auto bit = [&](const ta::Slot* s) { return net.counter(s, *a, 0); };
  struct Node {
    std::vector<ta::Slot> s;
    std::int64_t t;
    std::vector<std::int64_t> trace;
    bool operator<(const Node& o) const { return std::tie(t, trace, s) < std::tie(o.t, o.trace, o.s); }
  };
  std::set<std::vector<std::int64_t>> out;
  std::set<Node> seen;
  std::vector<Node> stack;
  auto visit = [&](Node n) {
    if (seen.size() > state_cap)
      throw std::runtime_error("trace exploration exceeded its state cap");
    if (seen.insert(n).second)
      stack.push_back(std::move(n));
  };
  visit({net.initial(), 0, {0}});
  if (mode == TraceCollect::OnEvent)
    out.insert({0});
  std::vector<ta::Slot> buf(net.width());
  while (!stack.empty()) {
    Node n = std::move(stack.back());
    stack.pop_back();
    std::int64_t cost = 0;
    if (net.delay_successor(n.s.data(), buf.data(), cost)) {
      if (n.t < horizon)
        visit({buf, n.t + 1, n.trace});
      else if (mode == TraceCollect::AtHorizon)
        out.insert(n.trace);
    }
    net.for_each_discrete(n.s.data(), [&](const ta::Slot* succ, std::int64_t) {
      Node m{std::vector<ta::Slot>(succ, succ + net.width()), n.t, n.trace};
      if (bit(succ) != bit(n.s.data())) {
        if (m.trace.size() > max_events)
          return;
        m.trace.push_back(n.t);
        if (mode == TraceCollect::OnEvent)
          out.insert(m.trace);
      }
      visit(std::move(m));
    });
  }
  return out;
}

} // namespace gran
