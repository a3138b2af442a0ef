#pragma once

// Timed automata with integer (digital-clock) semantics: unit time steps,
// scalar clocks and circular clock arrays, bounded integer counters, binary
// rendezvous with atomic relays, cost rates and committed/urgent locations.
//
// States of a Network are flat int16 vectors laid out as
//   [location per automaton][clock slots][counters]
// Clocks saturate at a per-clock cap one above the largest constant they are
// compared with, which keeps the state space finite.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gran/bound.hpp"

namespace gran::ta {

class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Cmp : std::uint8_t { Lt, Le, Eq, Ge, Gt };

inline bool compare(std::int64_t lhs, Cmp op, std::int64_t rhs) {
  switch (op) {
  case Cmp::Lt: return lhs < rhs;
  case Cmp::Le: return lhs <= rhs;
  case Cmp::Eq: return lhs == rhs;
  case Cmp::Ge: return lhs >= rhs;
  case Cmp::Gt: return lhs > rhs;
  }
  return false;
}

struct ClockDecl {
  std::string name;
  std::size_t size = 1; // > 1: circular array
};

struct CounterDecl {
  std::string name;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t init = 0;
};

/// A scalar clock, or the array slot (counter + offset) mod size.
struct ClockRef {
  std::size_t clock = 0;
  std::optional<std::size_t> index_counter;
  std::int64_t offset = 0;
};

struct ClockAtom {
  ClockRef clock;
  Cmp cmp = Cmp::Le;
  std::int64_t value = 0;
};

struct CounterAtom {
  std::size_t counter = 0;
  Cmp cmp = Cmp::Le;
  std::int64_t value = 0;
};

/// for i in [1, fill]: array[(head - i) mod N] cmp bounds[i-1]. An unbounded
/// entry always satisfies Lt/Le and never satisfies the other comparisons.
struct WindowAtom {
  std::size_t array = 0;
  std::size_t head = 0;
  std::size_t fill = 0;
  Cmp cmp = Cmp::Le;
  std::vector<Bound> bounds;
};

struct Constraint {
  std::vector<ClockAtom> clocks;
  std::vector<CounterAtom> counters;
  std::vector<WindowAtom> windows;
};

enum class CounterOp : std::uint8_t {
  Set,    // c := value
  Add,    // c := c + value
  IncMod, // c := (c + 1) % value
  IncSat  // c := min(c + 1, value)
};

struct CounterUpdate {
  std::size_t counter = 0;
  CounterOp op = CounterOp::Set;
  std::int64_t value = 0;
};

enum class SyncKind : std::uint8_t { Internal, Emit, Receive };

struct Edge {
  std::size_t source = 0;
  std::size_t target = 0;
  Constraint guard;
  SyncKind sync = SyncKind::Internal;
  std::string channel;
  std::vector<std::string> relays; // emitted in the same atomic step
  std::vector<ClockRef> resets;    // evaluated before counter updates
  std::vector<std::size_t> array_resets;
  std::vector<CounterUpdate> updates;
  std::int64_t cost = 0;
  std::string label;
};

struct Location {
  std::string name;
  Constraint invariant;
  std::int64_t cost_rate = 0;
  bool urgent = false;
  bool committed = false;
};

/// Declares that every reference to `array` is relative to `head`, with
/// `fill` counting the live slots. Lets the network store the array rotated
/// to head = 0 and zero the dead slots.
struct WindowArrayDecl {
  std::size_t array = 0;
  std::size_t head = 0;
  std::size_t fill = 0;
};

struct Automaton {
  std::string name;
  std::vector<ClockDecl> clocks;
  std::vector<CounterDecl> counters;
  std::vector<Location> locations;
  std::vector<Edge> edges;
  std::size_t initial = 0;
  std::vector<WindowArrayDecl> window_arrays;

  std::size_t add_clock(std::string n, std::size_t size = 1) {
    clocks.push_back({std::move(n), size});
    return clocks.size() - 1;
  }
  std::size_t add_counter(std::string n, std::int64_t lo, std::int64_t hi, std::int64_t init) {
    counters.push_back({std::move(n), lo, hi, init});
    return counters.size() - 1;
  }
  std::size_t add_location(Location l) {
    locations.push_back(std::move(l));
    return locations.size() - 1;
  }
  Edge& add_edge(Edge e) {
    edges.push_back(std::move(e));
    return edges.back();
  }
  std::optional<std::size_t> location_index(const std::string& n) const {
    for (std::size_t i = 0; i < locations.size(); ++i)
      if (locations[i].name == n)
        return i;
    return std::nullopt;
  }
};

using Slot = std::int16_t;

/// Plain-data view of a network state.
struct NetworkState {
  std::vector<std::int64_t> locations;
  std::vector<std::int64_t> clocks;
  std::vector<std::int64_t> counters;
  std::int64_t cost = 0;
  bool operator==(const NetworkState&) const = default;
};

class Network {
public:
  explicit Network(std::vector<Automaton> automata, bool reduce_windows = true)
      : automata_(std::move(automata)), reduce_(reduce_windows) {
    compile();
  }

  const std::vector<Automaton>& automata() const { return automata_; }
  std::size_t width() const { return width_; }
  std::size_t num_clock_slots() const { return clock_slots_; }
  std::size_t num_counters() const { return counter_slots_; }

  std::optional<std::size_t> automaton_index(const std::string& n) const {
    for (std::size_t i = 0; i < automata_.size(); ++i)
      if (automata_[i].name == n)
        return i;
    return std::nullopt;
  }

  /// Cap applied to the clock slots of automaton a, clock c.
  Slot cap(std::size_t a, std::size_t c) const { return caps_[clock_base_[a] + clock_offset_[a][c]]; }

  void initial(std::vector<Slot>& s) const {
    s.assign(width_, 0);
    for (std::size_t a = 0; a < automata_.size(); ++a) {
      s[a] = static_cast<Slot>(automata_[a].initial);
      for (std::size_t c = 0; c < automata_[a].counters.size(); ++c)
        s[counter_index(a, c)] = static_cast<Slot>(automata_[a].counters[c].init);
    }
    canonicalize(s.data());
    for (std::size_t a = 0; a < automata_.size(); ++a)
      if (!holds(s.data(), a, automata_[a].locations[automata_[a].initial].invariant))
        throw ModelError("initial state of '" + automata_[a].name + "' violates its invariant");
  }

  std::vector<Slot> initial() const {
    std::vector<Slot> s;
    initial(s);
    return s;
  }

  std::size_t location(const Slot* s, std::size_t a) const { return static_cast<std::size_t>(s[a]); }
  std::int64_t counter(const Slot* s, std::size_t a, std::size_t c) const { return s[counter_index(a, c)]; }
  std::int64_t clock(const Slot* s, std::size_t a, std::size_t c, std::size_t slot = 0) const {
    return s[clocks_begin() + clock_base_[a] + clock_offset_[a][c] + slot];
  }

  /// Calls f(successor, cost_delta) for every successor of s: first the unit
  /// time step (if allowed), then every discrete step.
  template <class F>
  void for_each_successor(const Slot* s, F&& f) const {
    std::vector<Slot> buf(width_);
    std::int64_t rate = 0;
    if (delay_successor(s, buf.data(), rate))
      f(static_cast<const Slot*>(buf.data()), rate);
    discrete_steps(s, f);
  }

  /// Unit time step into `out` (width() slots); false when time cannot pass.
  bool delay_successor(const Slot* s, Slot* out, std::int64_t& cost) const {
    if (!time_step(s, out))
      return false;
    cost = 0;
    for (std::size_t a = 0; a < automata_.size(); ++a)
      cost += automata_[a].locations[location(s, a)].cost_rate;
    return true;
  }

  template <class F>
  void for_each_discrete(const Slot* s, F&& f) const {
    discrete_steps(s, f);
  }

  /// Materialized successor list (time step first). Empty means deadlock.
  std::vector<std::pair<NetworkState, std::int64_t>> successors(const NetworkState& st) const {
    auto raw = from_state(st);
    std::vector<std::pair<NetworkState, std::int64_t>> out;
    for_each_successor(raw.data(), [&](const Slot* succ, std::int64_t d) {
      auto ns = to_state(succ);
      ns.cost = st.cost + d;
      out.emplace_back(std::move(ns), d);
    });
    return out;
  }

  NetworkState to_state(const Slot* s) const {
    NetworkState st;
    for (std::size_t i = 0; i < automata_.size(); ++i)
      st.locations.push_back(s[i]);
    for (std::size_t i = 0; i < clock_slots_; ++i)
      st.clocks.push_back(s[clocks_begin() + i]);
    for (std::size_t i = 0; i < counter_slots_; ++i)
      st.counters.push_back(s[counters_begin() + i]);
    return st;
  }

  std::vector<Slot> from_state(const NetworkState& st) const {
    if (st.locations.size() != automata_.size() || st.clocks.size() != clock_slots_ ||
        st.counters.size() != counter_slots_)
      throw ModelError("state shape does not match network");
    std::vector<Slot> s(width_);
    for (std::size_t i = 0; i < automata_.size(); ++i)
      s[i] = static_cast<Slot>(st.locations[i]);
    for (std::size_t i = 0; i < clock_slots_; ++i)
      s[clocks_begin() + i] = static_cast<Slot>(st.clocks[i]);
    for (std::size_t i = 0; i < counter_slots_; ++i)
      s[counters_begin() + i] = static_cast<Slot>(st.counters[i]);
    return s;
  }

  NetworkState initial_state() const { return to_state(initial().data()); }

  /// `locvec|clocks|counters|cost`, locations by name.
  std::string dump(const NetworkState& st) const {
    std::string out;
    for (std::size_t a = 0; a < automata_.size(); ++a) {
      if (a)
        out += ',';
      out += automata_[a].locations.at(static_cast<std::size_t>(st.locations[a])).name;
    }
    auto join = [](const std::vector<std::int64_t>& v) {
      std::string r;
      for (std::size_t i = 0; i < v.size(); ++i)
        r += (i ? "," : "") + std::to_string(v[i]);
      return r;
    };
    return out + "|" + join(st.clocks) + "|" + join(st.counters) + "|" + std::to_string(st.cost);
  }

  /// Every constant compared against a clock lies strictly below the clock's
  /// cap, so capping never changes the truth of a guard or invariant.
  bool caps_sound() const {
    for (std::size_t a = 0; a < automata_.size(); ++a) {
      bool ok = true;
      auto check = [&](const Constraint& c) {
        for (const auto& at : c.clocks)
          ok = ok && at.value < cap(a, at.clock.clock);
        for (const auto& w : c.windows)
          for (auto b : w.bounds)
            ok = ok && (!b.is_finite() || b.value() < cap(a, w.array));
      };
      for (const auto& l : automata_[a].locations)
        check(l.invariant);
      for (const auto& e : automata_[a].edges)
        check(e.guard);
      if (!ok)
        return false;
    }
    return true;
  }

  /// Raw array slot index used by a window atom for window i (1-based),
  /// before any canonical rotation: (head - i + N) mod N.
  static std::size_t window_slot(std::int64_t head, std::size_t i, std::size_t n) {
    return static_cast<std::size_t>(((head - static_cast<std::int64_t>(i)) % static_cast<std::int64_t>(n) +
                                     static_cast<std::int64_t>(n)) %
                                    static_cast<std::int64_t>(n));
  }

private:
  struct Participant {
    std::size_t automaton;
    std::size_t edge;
  };

  std::size_t clocks_begin() const { return automata_.size(); }
  std::size_t counters_begin() const { return automata_.size() + clock_slots_; }
  std::size_t counter_index(std::size_t a, std::size_t c) const { return counters_begin() + counter_base_[a] + c; }

  std::size_t slot_of(const Slot* s, std::size_t a, const ClockRef& r) const {
    const auto& decl = automata_[a].clocks[r.clock];
    std::size_t base = clocks_begin() + clock_base_[a] + clock_offset_[a][r.clock];
    if (decl.size == 1)
      return base;
    const std::int64_t idx = r.index_counter ? s[counter_index(a, *r.index_counter)] : 0;
    const auto n = static_cast<std::int64_t>(decl.size);
    return base + static_cast<std::size_t>((((idx + r.offset) % n) + n) % n);
  }

  bool holds(const Slot* s, std::size_t a, const Constraint& c) const {
    for (const auto& at : c.counters)
      if (!compare(s[counter_index(a, at.counter)], at.cmp, at.value))
        return false;
    for (const auto& at : c.clocks)
      if (!compare(s[slot_of(s, a, at.clock)], at.cmp, at.value))
        return false;
    for (const auto& w : c.windows) {
      const std::size_t n = automata_[a].clocks[w.array].size;
      const std::size_t base = clocks_begin() + clock_base_[a] + clock_offset_[a][w.array];
      const std::int64_t head = s[counter_index(a, w.head)];
      const auto fill = static_cast<std::size_t>(s[counter_index(a, w.fill)]);
      for (std::size_t i = 1; i <= fill && i <= w.bounds.size(); ++i) {
        const Bound b = w.bounds[i - 1];
        if (!b.is_finite()) {
          if (w.cmp == Cmp::Lt || w.cmp == Cmp::Le)
            continue;
          return false;
        }
        if (!compare(s[base + window_slot(head, i, n)], w.cmp, b.value()))
          return false;
      }
    }
    return true;
  }

  bool time_step(const Slot* s, Slot* out) const {
    for (std::size_t a = 0; a < automata_.size(); ++a) {
      const auto& loc = automata_[a].locations[location(s, a)];
      if (loc.urgent || loc.committed)
        return false;
    }
    std::copy(s, s + width_, out);
    for (std::size_t i = 0; i < clock_slots_; ++i) {
      Slot& v = out[clocks_begin() + i];
      if (v < caps_[i])
        ++v;
    }
    for (std::size_t a = 0; a < automata_.size(); ++a)
      if (!holds(out, a, automata_[a].locations[location(out, a)].invariant))
        return false;
    canonicalize(out);
    return true;
  }

  template <class F>
  void discrete_steps(const Slot* s, F& f) const {
    bool committed = false;
    for (std::size_t a = 0; a < automata_.size(); ++a)
      committed = committed || automata_[a].locations[location(s, a)].committed;

    std::vector<Participant> parts;
    std::vector<char> involved(automata_.size(), 0);
    std::vector<Slot> buf(width_);

    auto emit_set = [&](auto&& self, std::vector<std::size_t>& pending) -> void {
      if (pending.empty()) {
        fire(s, parts, committed, buf, f);
        return;
      }
      const std::size_t ch = pending.back();
      pending.pop_back();
      for (std::size_t b = 0; b < automata_.size(); ++b) {
        if (involved[b])
          continue;
        for (std::size_t e : receivers_[b][location(s, b)][ch]) {
          if (!holds(s, b, automata_[b].edges[e].guard))
            continue;
          involved[b] = 1;
          parts.push_back({b, e});
          const auto before = pending.size();
          for (std::size_t r : relay_ids_[b][e])
            pending.push_back(r);
          self(self, pending);
          pending.resize(before);
          parts.pop_back();
          involved[b] = 0;
        }
      }
      pending.push_back(ch);
    };

    for (std::size_t a = 0; a < automata_.size(); ++a) {
      for (std::size_t e : outgoing_[a][location(s, a)]) {
        const Edge& edge = automata_[a].edges[e];
        if (edge.sync == SyncKind::Receive)
          continue;
        if (!holds(s, a, edge.guard))
          continue;
        involved[a] = 1;
        parts.push_back({a, e});
        std::vector<std::size_t> pending = relay_ids_[a][e];
        if (edge.sync == SyncKind::Emit)
          pending.push_back(channel_id_[a][e]);
        emit_set(emit_set, pending);
        parts.pop_back();
        involved[a] = 0;
      }
    }
  }

  template <class F>
  void fire(const Slot* s, const std::vector<Participant>& parts, bool committed, std::vector<Slot>& buf,
            F& f) const {
    if (committed) {
      bool any = false;
      for (const auto& p : parts)
        any = any || automata_[p.automaton].locations[location(s, p.automaton)].committed;
      if (!any)
        return;
    }
    Slot* out = buf.data();
    std::copy(s, s + width_, out);
    std::int64_t cost = 0;
    for (const auto& p : parts) {
      const Automaton& aut = automata_[p.automaton];
      const Edge& e = aut.edges[p.edge];
      for (const auto& r : e.resets)
        out[slot_of(out, p.automaton, r)] = 0;
      for (std::size_t arr : e.array_resets) {
        const std::size_t base = clocks_begin() + clock_base_[p.automaton] + clock_offset_[p.automaton][arr];
        std::fill(out + base, out + base + aut.clocks[arr].size, Slot{0});
      }
      for (const auto& u : e.updates) {
        Slot& c = out[counter_index(p.automaton, u.counter)];
        std::int64_t v = c;
        switch (u.op) {
        case CounterOp::Set: v = u.value; break;
        case CounterOp::Add: v += u.value; break;
        case CounterOp::IncMod: v = (v + 1) % u.value; break;
        case CounterOp::IncSat: v = std::min<std::int64_t>(v + 1, u.value); break;
        }
        const auto& decl = aut.counters[u.counter];
        if (v < decl.lo || v > decl.hi)
          return;
        c = static_cast<Slot>(v);
      }
      out[p.automaton] = static_cast<Slot>(e.target);
      cost += e.cost;
    }
    for (const auto& p : parts)
      if (!holds(out, p.automaton, automata_[p.automaton].locations[location(out, p.automaton)].invariant))
        return;
    canonicalize(out);
    f(static_cast<const Slot*>(out), cost);
  }

  void canonicalize(Slot* s) const {
    if (!reduce_)
      return;
    for (std::size_t a = 0; a < automata_.size(); ++a) {
      for (const auto& w : automata_[a].window_arrays) {
        const std::size_t n = automata_[a].clocks[w.array].size;
        const std::size_t base = clocks_begin() + clock_base_[a] + clock_offset_[a][w.array];
        Slot& head = s[counter_index(a, w.head)];
        const auto fill = static_cast<std::size_t>(s[counter_index(a, w.fill)]);
        Slot tmp[kMaxArray];
        for (std::size_t j = 0; j < n; ++j)
          tmp[j] = s[base + (j + static_cast<std::size_t>(head)) % n];
        // after rotation window i sits at index (n - i) mod n
        for (std::size_t i = fill + 1; i <= n; ++i)
          tmp[(n - i) % n] = 0;
        std::copy(tmp, tmp + n, s + base);
        head = 0;
      }
    }
  }

  void compile() {
    const std::size_t A = automata_.size();
    if (A > static_cast<std::size_t>(std::numeric_limits<Slot>::max()))
      throw ModelError("too many automata");
    std::map<std::string, std::size_t> channels;
    auto chan = [&](const std::string& c) {
      auto [it, _] = channels.emplace(c, channels.size());
      return it->second;
    };
    clock_base_.resize(A);
    clock_offset_.resize(A);
    counter_base_.resize(A);
    clock_slots_ = 0;
    counter_slots_ = 0;
    for (std::size_t a = 0; a < A; ++a) {
      const auto& aut = automata_[a];
      if (aut.initial >= aut.locations.size())
        throw ModelError("automaton '" + aut.name + "' has no initial location");
      clock_base_[a] = clock_slots_;
      std::size_t off = 0;
      for (const auto& c : aut.clocks) {
        if (c.size == 0 || c.size > kMaxArray)
          throw ModelError("clock '" + c.name + "' has unsupported size");
        clock_offset_[a].push_back(off);
        off += c.size;
      }
      clock_slots_ += off;
      counter_base_[a] = counter_slots_;
      counter_slots_ += aut.counters.size();
      for (const auto& c : aut.counters)
        if (c.init < c.lo || c.init > c.hi || c.lo < std::numeric_limits<Slot>::min() ||
            c.hi > std::numeric_limits<Slot>::max())
          throw ModelError("counter '" + c.name + "' has bad range");
    }
    width_ = A + clock_slots_ + counter_slots_;

    // caps
    caps_.assign(clock_slots_, 1);
    for (std::size_t a = 0; a < A; ++a) {
      const auto& aut = automata_[a];
      std::vector<std::int64_t> maxc(aut.clocks.size(), 0);
      auto scan = [&](const Constraint& c) {
        for (const auto& at : c.clocks) {
          if (at.clock.clock >= aut.clocks.size())
            throw ModelError("undeclared clock in '" + aut.name + "'");
          maxc[at.clock.clock] = std::max(maxc[at.clock.clock], at.value);
        }
        for (const auto& w : c.windows) {
          if (w.array >= aut.clocks.size() || w.head >= aut.counters.size() || w.fill >= aut.counters.size())
            throw ModelError("bad window atom in '" + aut.name + "'");
          for (auto b : w.bounds)
            if (b.is_finite())
              maxc[w.array] = std::max(maxc[w.array], b.value());
        }
        for (const auto& at : c.counters)
          if (at.counter >= aut.counters.size())
            throw ModelError("undeclared counter in '" + aut.name + "'");
      };
      for (const auto& l : aut.locations)
        scan(l.invariant);
      for (const auto& e : aut.edges)
        scan(e.guard);
      for (std::size_t c = 0; c < aut.clocks.size(); ++c) {
        if (maxc[c] + 1 > std::numeric_limits<Slot>::max())
          throw ModelError("clock constant too large");
        for (std::size_t j = 0; j < aut.clocks[c].size; ++j)
          caps_[clock_base_[a] + clock_offset_[a][c] + j] = static_cast<Slot>(maxc[c] + 1);
      }
    }

    // edge indexes
    for (std::size_t a = 0; a < A; ++a)
      for (const auto& e : automata_[a].edges) {
        if (!e.channel.empty())
          chan(e.channel);
        for (const auto& r : e.relays)
          chan(r);
      }
    const std::size_t C = channels.size();
    outgoing_.assign(A, {});
    receivers_.assign(A, {});
    relay_ids_.assign(A, {});
    channel_id_.assign(A, {});
    for (std::size_t a = 0; a < A; ++a) {
      const auto& aut = automata_[a];
      outgoing_[a].assign(aut.locations.size(), {});
      receivers_[a].assign(aut.locations.size(), std::vector<std::vector<std::size_t>>(C));
      for (std::size_t e = 0; e < aut.edges.size(); ++e) {
        const Edge& edge = aut.edges[e];
        if (edge.source >= aut.locations.size() || edge.target >= aut.locations.size())
          throw ModelError("edge '" + edge.label + "' of '" + aut.name + "' has a bad endpoint");
        if (edge.sync != SyncKind::Internal && edge.channel.empty())
          throw ModelError("synchronizing edge without channel in '" + aut.name + "'");
        for (const auto& u : edge.updates)
          if (u.counter >= aut.counters.size() || ((u.op == CounterOp::IncMod) && u.value <= 0))
            throw ModelError("bad counter update in '" + aut.name + "'");
        std::vector<std::size_t> relays;
        for (const auto& r : edge.relays)
          relays.push_back(channels.at(r));
        relay_ids_[a].push_back(std::move(relays));
        channel_id_[a].push_back(edge.channel.empty() ? 0 : channels.at(edge.channel));
        if (edge.sync == SyncKind::Receive)
          receivers_[a][edge.source][channels.at(edge.channel)].push_back(e);
        else
          outgoing_[a][edge.source].push_back(e);
      }
    }
  }

  static constexpr std::size_t kMaxArray = 256;

  std::vector<Automaton> automata_;
  bool reduce_ = true;
  std::size_t width_ = 0;
  std::size_t clock_slots_ = 0;
  std::size_t counter_slots_ = 0;
  std::vector<std::size_t> clock_base_;
  std::vector<std::vector<std::size_t>> clock_offset_;
  std::vector<std::size_t> counter_base_;
  std::vector<Slot> caps_;
  std::vector<std::vector<std::vector<std::size_t>>> outgoing_;
  std::vector<std::vector<std::vector<std::vector<std::size_t>>>> receivers_;
  std::vector<std::vector<std::vector<std::size_t>>> relay_ids_;
  std::vector<std::vector<std::size_t>> channel_id_;
};

} // namespace gran::ta
