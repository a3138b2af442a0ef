#pragma once

// Brute-force ground truth: enumeration of conforming streams, infinite
// extendability of stream prefixes, and a direct simulator of MTA behavior
// (no timed automata involved) with exhaustive exploration.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "gran/curves.hpp"
#include "gran/mta.hpp"
#include "gran/streams.hpp"

namespace gran::oracle {

class OracleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A request beyond the fixed tractability bounds.
class BoundsError : public OracleError {
public:
  using OracleError::OracleError;
};

inline constexpr std::size_t kMaxCurvePoints = 8;
inline constexpr std::int64_t kMaxHorizon = 40;

/// All integer streams with exactly `timestamps` timestamps (origin
/// included), last one <= horizon, that conform to c. Sorted.
inline std::vector<EventStream> enumerate_conforming(const Curve& c, std::size_t timestamps, std::int64_t horizon,
                                                     std::size_t cap = 1'000'000) {
  std::vector<EventStream> out;
  if (timestamps == 0)
    return out;
  std::vector<std::int64_t> t{0};
  auto rec = [&](auto&& self) -> void {
    if (t.size() == timestamps) {
      if (out.size() >= cap)
        throw OracleError("enumeration exceeded its cap of " + std::to_string(cap) + " streams");
      out.emplace_back(t);
      return;
    }
    const std::size_t m = t.size(); // index of the next timestamp
    std::int64_t lo = t.back();
    std::int64_t hi = horizon;
    for (std::size_t k = 1; k <= c.size() && k <= m; ++k) {
      const Bound l = c.lo(k);
      if (l.is_infinite())
        return;
      lo = std::max(lo, t[m - k] + l.value());
      if (c.up(k).is_finite())
        hi = std::min(hi, t[m - k] + c.up(k).value());
    }
    for (std::int64_t v = lo; v <= hi; ++v) {
      t.push_back(v);
      self(self);
      t.pop_back();
    }
  };
  rec(rec);
  return out;
}

/// Decides whether a conforming finite prefix extends to an infinite
/// conforming stream. States are the capped distances from the last event
/// to the previous ones; the viable set is a greatest fixpoint.
class Viability {
public:
  explicit Viability(const Curve& c) : c_(c), n_(c.size()) {
    if (n_ == 0 || n_ > 6)
      throw BoundsError("viability supports 1..6 curve points");
    std::int64_t maxc = 0;
    for (std::size_t k = 1; k <= n_; ++k) {
      if (c.lo(k).is_finite())
        maxc = std::max(maxc, c.lo(k).value());
      if (c.up(k).is_finite())
        maxc = std::max(maxc, c.up(k).value());
    }
    cap_ = maxc + 1;
    std::size_t total = n_;
    for (std::size_t i = 1; i < n_; ++i)
      total *= static_cast<std::size_t>(cap_ + 1);
    viable_.assign(total, 1);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t id = 0; id < total; ++id) {
        if (!viable_[id])
          continue;
        if (!has_viable_step(decode(id))) {
          viable_[id] = 0;
          changed = true;
        }
      }
    }
  }

  /// s must conform to the curve.
  bool extendable(const EventStream& s) const {
    const auto& t = s.times;
    State st;
    st.count = std::min(t.size(), n_);
    st.dist.assign(n_, 0);
    for (std::size_t j = 1; j < st.count; ++j)
      st.dist[j] = std::min(cap_, t.back() - t[t.size() - 1 - j]);
    return viable_[encode(st)] != 0;
  }

private:
  struct State {
    std::size_t count = 1;          // events remembered, 1..n
    std::vector<std::int64_t> dist; // dist[0] = 0, dist[j] for j < count
  };

  std::size_t encode(const State& s) const {
    std::size_t id = s.count - 1;
    for (std::size_t j = 1; j < n_; ++j)
      id = id * static_cast<std::size_t>(cap_ + 1) + static_cast<std::size_t>(j < s.count ? s.dist[j] : 0);
    return id;
  }

  State decode(std::size_t id) const {
    State s;
    s.dist.assign(n_, 0);
    for (std::size_t j = n_ - 1; j >= 1; --j) {
      s.dist[j] = static_cast<std::int64_t>(id % static_cast<std::size_t>(cap_ + 1));
      id /= static_cast<std::size_t>(cap_ + 1);
    }
    s.count = id + 1;
    for (std::size_t j = s.count; j < n_; ++j)
      s.dist[j] = 0;
    return s;
  }

  bool has_viable_step(const State& s) const {
    for (std::int64_t d = 0; d <= cap_; ++d) {
      bool ok = true;
      for (std::size_t i = 1; i <= s.count && ok; ++i) {
        const std::int64_t w = std::min(cap_, d + s.dist[i - 1]);
        const Bound lo = c_.lo(i);
        const Bound up = c_.up(i);
        ok = lo.is_finite() && w >= lo.value() && (up.is_infinite() || w <= up.value());
      }
      if (!ok)
        continue;
      State nx;
      nx.count = std::min(s.count + 1, n_);
      nx.dist.assign(n_, 0);
      for (std::size_t j = 1; j < nx.count; ++j)
        nx.dist[j] = std::min(cap_, d + s.dist[j - 1]);
      if (viable_[encode(nx)])
        return true;
    }
    return false;
  }

  Curve c_;
  std::size_t n_;
  std::int64_t cap_ = 1;
  std::vector<char> viable_;
};

/// The component and its environment as seen by the simulator.
struct Model {
  Mta mta;
  Curve arrival;
  std::vector<std::string> free_channels;                 // sync events at any instant
  std::vector<std::pair<std::string, Curve>> curve_channels; // sync events bounded by a curve
  std::int64_t capacity = 32;
};

enum class ActionKind { Req, Serv, Sync, Leave, Timeout, Tick };

struct Action {
  ActionKind kind;
  std::string channel; // Sync only
};

struct Snapshot {
  std::int64_t time = 0;
  std::size_t mode = 0;
  bool settled = false; // past the dwell minimum (S_i1)
  std::int64_t x = 0;
  std::int64_t q = 0;
};

namespace detail {

// Ages of the last events of one curve-bounded stream, most recent first.
struct Ages {
  std::vector<std::int64_t> a{0};

  static std::int64_t cap_of(const Curve& c) {
    std::int64_t m = 0;
    for (std::size_t k = 1; k <= c.size(); ++k) {
      if (c.lo(k).is_finite())
        m = std::max(m, c.lo(k).value());
      if (c.up(k).is_finite())
        m = std::max(m, c.up(k).value());
    }
    return m + 1;
  }

  bool can_emit(const Curve& c) const {
    for (std::size_t i = 1; i <= a.size() && i <= c.size(); ++i) {
      const Bound lo = c.lo(i);
      if (lo.is_infinite() || a[i - 1] < lo.value())
        return false;
    }
    return true;
  }

  void emit(const Curve& c) {
    a.insert(a.begin(), 0);
    if (a.size() > c.size())
      a.resize(c.size());
  }

  bool can_tick(const Curve& c, std::int64_t cap) const {
    for (std::size_t i = 1; i <= a.size() && i <= c.size(); ++i) {
      const Bound up = c.up(i);
      if (up.is_finite() && std::min(cap, a[i - 1] + 1) > up.value())
        return false;
    }
    return true;
  }

  void tick(std::int64_t cap) {
    for (auto& v : a)
      v = std::min(cap, v + 1);
  }
};

} // namespace detail

/// Operational semantics of the MTA in its environment. Mode switches are
/// atomic: the service history restarts with a virtual event at the switch.
class Simulator {
public:
  explicit Simulator(const Model& m) : m_(m) {
    if (auto err = validate_mta(m.mta))
      throw OracleError("invalid MTA: " + *err);
    in_cap_ = detail::Ages::cap_of(m.arrival);
    for (const auto& md : m.mta.modes)
      srv_cap_.push_back(detail::Ages::cap_of(md.service));
    for (const auto& [ch, c] : m.curve_channels) {
      env_cap_.push_back(detail::Ages::cap_of(c));
      env_.emplace_back();
    }
    std::int64_t xc = 0;
    for (const auto& md : m.mta.modes) {
      xc = std::max(xc, md.dwell_min);
      if (md.dwell_max)
        xc = std::max(xc, *md.dwell_max);
    }
    x_cap_ = xc + 1;
    snap_.mode = m.mta.initial_index();
    snap_.q = m.mta.initial_backlog;
    if (snap_.q > m.capacity)
      throw OracleError("initial_backlog exceeds capacity");
  }

  const Snapshot& snapshot() const { return snap_; }
  const std::vector<std::int64_t>& outputs() const { return out_; }

  /// Actions enabled now, in a fixed order.
  std::vector<Action> enabled() const {
    std::vector<Action> acts;
    const Mode& md = mode();
    if (in_.can_emit(m_.arrival) && snap_.q < m_.capacity)
      acts.push_back({ActionKind::Req, ""});
    if (srv_.can_emit(md.service))
      acts.push_back({ActionKind::Serv, ""});
    const Transition* sync = md.find(TransitionKind::Sync);
    for (const auto& ch : m_.free_channels)
      if (sync && sync->channel == ch)
        acts.push_back({ActionKind::Sync, ch});
    for (std::size_t e = 0; e < env_.size(); ++e)
      if (env_[e].can_emit(m_.curve_channels[e].second))
        acts.push_back({ActionKind::Sync, m_.curve_channels[e].first});
    if (!snap_.settled && snap_.x == md.dwell_min && leave_target())
      acts.push_back({ActionKind::Leave, ""});
    if (snap_.settled && md.find(TransitionKind::Timeout) && snap_.x == *md.dwell_max)
      acts.push_back({ActionKind::Timeout, ""});
    if (can_tick())
      acts.push_back({ActionKind::Tick, ""});
    return acts;
  }

  /// Applies an action; throws if it is not enabled.
  void apply(const Action& a) {
    const auto en = enabled();
    const bool ok = std::any_of(en.begin(), en.end(), [&](const Action& b) {
      return b.kind == a.kind && (a.kind != ActionKind::Sync || b.channel == a.channel);
    });
    if (!ok)
      throw OracleError("action not enabled at time " + std::to_string(snap_.time));
    const Mode& md = mode();
    switch (a.kind) {
    case ActionKind::Req: {
      in_.emit(m_.arrival);
      ++snap_.q;
      const Transition* t = md.find(TransitionKind::BufferAbove);
      if (snap_.settled && t && snap_.q > *md.buf_high)
        switch_to(m_.mta.target_index(*t));
      break;
    }
    case ActionKind::Serv: {
      srv_.emit(md.service);
      if (snap_.q == 0)
        break;
      --snap_.q;
      out_.push_back(snap_.time);
      const Transition* t = md.find(TransitionKind::BufferBelow);
      if (snap_.settled && t && snap_.q < *md.buf_low)
        switch_to(m_.mta.target_index(*t));
      break;
    }
    case ActionKind::Sync: {
      for (std::size_t e = 0; e < env_.size(); ++e)
        if (m_.curve_channels[e].first == a.channel)
          env_[e].emit(m_.curve_channels[e].second);
      const Transition* t = md.find(TransitionKind::Sync);
      if (t && t->channel == a.channel)
        switch_to(m_.mta.target_index(*t));
      break;
    }
    case ActionKind::Leave: {
      const auto target = *leave_target();
      if (target == kSettle)
        snap_.settled = true;
      else
        switch_to(target);
      break;
    }
    case ActionKind::Timeout: switch_to(m_.mta.target_index(*md.find(TransitionKind::Timeout))); break;
    case ActionKind::Tick:
      in_.tick(in_cap_);
      srv_.tick(srv_cap_[snap_.mode]);
      for (std::size_t e = 0; e < env_.size(); ++e)
        env_[e].tick(env_cap_[e]);
      snap_.x = std::min(x_cap_, snap_.x + 1);
      ++snap_.time;
      break;
    }
  }

  /// Compact encoding of everything that decides future behavior.
  std::string key() const {
    std::string k;
    auto put = [&](std::int64_t v) {
      k.append(reinterpret_cast<const char*>(&v), sizeof v);
    };
    put(static_cast<std::int64_t>(snap_.mode));
    put(snap_.settled);
    put(snap_.x);
    put(snap_.q);
    auto ages = [&](const detail::Ages& a) {
      put(static_cast<std::int64_t>(a.a.size()));
      for (auto v : a.a)
        put(v);
    };
    ages(in_);
    ages(srv_);
    for (const auto& e : env_)
      ages(e);
    return k;
  }

private:
  static constexpr std::size_t kSettle = static_cast<std::size_t>(-1);

  const Mode& mode() const { return m_.mta.modes[snap_.mode]; }

  std::optional<std::size_t> leave_target() const {
    const Mode& md = mode();
    if (md.buf_high && snap_.q > *md.buf_high) {
      if (const auto* t = md.find(TransitionKind::BufferAbove))
        return m_.mta.target_index(*t);
      return std::nullopt;
    }
    if (md.buf_low && snap_.q < *md.buf_low) {
      if (const auto* t = md.find(TransitionKind::BufferBelow))
        return m_.mta.target_index(*t);
      return std::nullopt;
    }
    return kSettle;
  }

  bool can_tick() const {
    const Mode& md = mode();
    if (!in_.can_tick(m_.arrival, in_cap_) || !srv_.can_tick(md.service, srv_cap_[snap_.mode]))
      return false;
    for (std::size_t e = 0; e < env_.size(); ++e)
      if (!env_[e].can_tick(m_.curve_channels[e].second, env_cap_[e]))
        return false;
    if (!snap_.settled)
      return snap_.x + 1 <= md.dwell_min;
    if (md.find(TransitionKind::Timeout) && snap_.x + 1 > *md.dwell_max)
      return false;
    return true;
  }

  void switch_to(std::size_t target) {
    snap_.mode = target;
    snap_.settled = false;
    snap_.x = 0;
    srv_ = detail::Ages{};
  }

  const Model& m_;
  Snapshot snap_;
  detail::Ages in_, srv_;
  std::vector<detail::Ages> env_;
  std::int64_t in_cap_ = 1;
  std::vector<std::int64_t> srv_cap_;
  std::vector<std::int64_t> env_cap_;
  std::int64_t x_cap_ = 1;
  std::vector<std::int64_t> out_{0};
};

struct Run {
  EventStream output;
  std::vector<std::pair<std::int64_t, std::string>> modes; // (time, mode) at every mode change
};

/// Replays an explicit action sequence.
inline Run replay(const Model& m, const std::vector<Action>& actions) {
  Simulator sim(m);
  Run r;
  r.modes.emplace_back(0, m.mta.modes[sim.snapshot().mode].name);
  for (const auto& a : actions) {
    const auto before = sim.snapshot().mode;
    const bool was_settled = sim.snapshot().settled;
    sim.apply(a);
    const auto& s = sim.snapshot();
    if (s.mode != before || (a.kind != ActionKind::Tick && was_settled && !s.settled))
      r.modes.emplace_back(s.time, m.mta.modes[s.mode].name);
  }
  r.output = EventStream(sim.outputs());
  return r;
}

enum class ServicePolicy { Earliest, Latest };

/// Single run driven by a fixed input stream and sync schedule. Within an
/// instant: sync events, then arrivals, then services, then a pending dwell
/// exit or timeout. Services follow the policy. Stops at `horizon`.
inline Run run_mta(const Model& m, const EventStream& input, std::int64_t horizon,
                   ServicePolicy policy = ServicePolicy::Earliest,
                   const std::vector<std::pair<std::int64_t, std::string>>& syncs = {}) {
  Simulator sim(m);
  std::vector<Action> acts;
  std::size_t next_in = 1;
  auto has = [&](ActionKind k, const std::string& ch = "") {
    for (const auto& a : sim.enabled())
      if (a.kind == k && (k != ActionKind::Sync || a.channel == ch))
        return true;
    return false;
  };
  auto take = [&](Action a) {
    sim.apply(a);
    acts.push_back(std::move(a));
  };
  for (std::int64_t t = 0; t <= horizon; ++t) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (const auto& [when, ch] : syncs)
        if (when == t && has(ActionKind::Sync, ch)) {
          // each scheduled sync fires once
          bool fired = false;
          for (const auto& a : acts)
            fired = fired || (a.kind == ActionKind::Sync && a.channel == ch);
          if (!fired) {
            take({ActionKind::Sync, ch});
            progress = true;
          }
        }
      while (next_in < input.times.size() && input.times[next_in] == t) {
        if (!has(ActionKind::Req))
          throw OracleError("input event at " + std::to_string(t) + " not accepted");
        take({ActionKind::Req, ""});
        ++next_in;
        progress = true;
      }
      if (has(ActionKind::Serv) && (policy == ServicePolicy::Earliest || !has(ActionKind::Tick))) {
        take({ActionKind::Serv, ""});
        progress = true;
        if (policy == ServicePolicy::Earliest)
          continue;
      }
      if (!has(ActionKind::Tick)) {
        if (has(ActionKind::Leave)) {
          take({ActionKind::Leave, ""});
          progress = true;
        } else if (has(ActionKind::Timeout)) {
          take({ActionKind::Timeout, ""});
          progress = true;
        }
      }
    }
    if (t == horizon)
      break;
    if (next_in < input.times.size() && input.times[next_in] <= t)
      throw OracleError("input stream not realizable");
    if (!has(ActionKind::Tick))
      throw OracleError("run blocks at time " + std::to_string(t));
    take({ActionKind::Tick, ""});
  }
  return replay(m, acts);
}

struct ExactResult {
  Curve curve;
  std::size_t states = 0;
};

/// Exact min/max of t_{i+k} - t_i (origin included) over every behavior and
/// every window starting at or before horizon - settle. Windows starting in
/// that range must all close by the horizon on every live run, else the
/// horizon is reported as too small.
inline ExactResult exact_output_curve(const Model& m, std::size_t n, std::int64_t horizon, std::int64_t settle) {
  if (n == 0 || n > kMaxCurvePoints)
    throw BoundsError("n = " + std::to_string(n) + " outside the oracle bound 1.." + std::to_string(kMaxCurvePoints));
  if (horizon > kMaxHorizon)
    throw BoundsError("horizon = " + std::to_string(horizon) + " exceeds the oracle bound " +
                      std::to_string(kMaxHorizon));
  if (settle < 0 || settle >= horizon)
    throw OracleError("settle must lie in [0, horizon)");
  const std::int64_t cutoff = horizon - settle;
  std::vector<Bound> lo(n, kUnbounded);
  std::vector<std::int64_t> hi(n, -1);
  bool pending = false;
  std::size_t pending_k = 0;

  struct Frame {
    Simulator sim;
    std::vector<std::int64_t> tail; // last n+1 outputs
  };
  std::unordered_set<std::string> seen;
  std::vector<Frame> stack;
  auto key = [&](const Frame& f) {
    std::string k = f.sim.key();
    const std::int64_t t = f.sim.snapshot().time;
    k.append(reinterpret_cast<const char*>(&t), sizeof t);
    for (auto v : f.tail) {
      const std::int64_t rel = v <= cutoff ? t - v : -1 - (t - v);
      k.append(reinterpret_cast<const char*>(&rel), sizeof rel);
    }
    return k;
  };
  auto push = [&](Frame f) {
    if (seen.insert(key(f)).second)
      stack.push_back(std::move(f));
  };
  push({Simulator(m), {0}});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const auto t = f.sim.snapshot().time;
    for (const auto& a : f.sim.enabled()) {
      if (a.kind == ActionKind::Tick && t == horizon) {
        for (std::size_t j = 0; j < f.tail.size(); ++j) {
          const std::size_t after = f.tail.size() - 1 - j;
          if (f.tail[j] <= cutoff && after < n) {
            pending = true;
            pending_k = after + 1;
          }
        }
        continue;
      }
      Frame g = f;
      const auto before = g.sim.outputs().size();
      g.sim.apply(a);
      if (g.sim.outputs().size() != before) {
        const auto now = g.sim.snapshot().time;
        for (std::size_t k = 1; k <= n && k <= g.tail.size(); ++k) {
          const auto start = g.tail[g.tail.size() - k];
          if (start > cutoff)
            continue;
          const std::int64_t w = now - start;
          lo[k - 1] = std::min(lo[k - 1], Bound(w));
          hi[k - 1] = std::max(hi[k - 1], w);
        }
        g.tail.push_back(now);
        if (g.tail.size() > n)
          g.tail.erase(g.tail.begin());
      }
      push(std::move(g));
    }
  }
  if (pending)
    throw OracleError("horizon too small: a window of " + std::to_string(pending_k) +
                      " events starting by the cutoff is still open");
  ExactResult r;
  r.states = seen.size();
  for (std::size_t k = 0; k < n; ++k) {
    r.curve.lower.push_back(lo[k]);
    r.curve.upper.push_back(hi[k] < 0 ? kUnbounded : Bound(hi[k]));
  }
  return r;
}

/// Output streams (origin included) of every run that is still live at the
/// horizon. Sorted.
inline std::set<std::vector<std::int64_t>> output_traces(const Model& m, std::int64_t horizon,
                                                         std::size_t state_cap = 5'000'000) {
  if (horizon > kMaxHorizon)
    throw BoundsError("horizon exceeds the oracle bound");
  std::set<std::vector<std::int64_t>> out;
  std::unordered_set<std::string> seen;
  std::vector<Simulator> stack;
  auto key = [](const Simulator& s) {
    std::string k = s.key();
    const std::int64_t t = s.snapshot().time;
    k.append(reinterpret_cast<const char*>(&t), sizeof t);
    for (auto v : s.outputs())
      k.append(reinterpret_cast<const char*>(&v), sizeof v);
    return k;
  };
  auto push = [&](Simulator s) {
    if (seen.size() > state_cap)
      throw OracleError("trace enumeration exceeded its state cap");
    if (seen.insert(key(s)).second)
      stack.push_back(std::move(s));
  };
  push(Simulator(m));
  while (!stack.empty()) {
    Simulator s = std::move(stack.back());
    stack.pop_back();
    for (const auto& a : s.enabled()) {
      if (a.kind == ActionKind::Tick && s.snapshot().time == horizon) {
        out.insert(s.outputs());
        continue;
      }
      Simulator nx = s;
      nx.apply(a);
      push(std::move(nx));
    }
  }
  return out;
}

} // namespace gran::oracle
