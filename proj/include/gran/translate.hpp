#pragma once

// Builders for every automaton of the analysis network: curve generators,
// the two observers, a scripted emitter, a trace tap, and the fine and coarse
// processing-element / service-model pairs of an MTA.
//
// Channel names used across builders:
//   req      input generator -> PE
//   serv     service model   -> PE
//   produce  PE (relayed on a non-empty serv) -> observer
//   syn.I.J  PE -> service model on a switch from mode I to mode J
//   sync.A   environment -> PE for the user channel A

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gran/automata.hpp"
#include "gran/curves.hpp"
#include "gran/mta.hpp"

namespace gran {

inline const std::string kReq = "req";
inline const std::string kServ = "serv";
inline const std::string kProduce = "produce";

inline std::string syn_channel(std::size_t from, std::size_t to) {
  return "syn." + std::to_string(from) + "." + std::to_string(to);
}
inline std::string sync_channel(const std::string& user) { return "sync." + user; }

namespace detail {

inline ta::Constraint window(std::size_t arr, std::size_t head, std::size_t fill, ta::Cmp cmp,
                             std::vector<Bound> bounds) {
  ta::Constraint c;
  c.windows.push_back({arr, head, fill, cmp, std::move(bounds)});
  return c;
}

inline ta::CounterAtom ctr(std::size_t c, ta::Cmp cmp, std::int64_t v) { return {c, cmp, v}; }
inline ta::ClockAtom clk(std::size_t c, ta::Cmp cmp, std::int64_t v) { return {{c, std::nullopt, 0}, cmp, v}; }

// Generator state inside an automaton: clock array y, head lambda, fill theta.
struct GenVars {
  std::size_t y, lambda, theta, n;
};

inline GenVars add_gen_vars(ta::Automaton& a, std::size_t n, const std::string& prefix) {
  GenVars v{};
  v.n = n;
  v.y = a.add_clock(prefix + "y", n);
  // time 0 acts as an event: one live window, slot 0 aged 0, head past it
  v.lambda = a.add_counter(prefix + "lambda", 0, static_cast<std::int64_t>(n) - 1, static_cast<std::int64_t>(1 % n));
  v.theta = a.add_counter(prefix + "theta", 0, static_cast<std::int64_t>(n), 1);
  a.window_arrays.push_back({v.y, v.lambda, v.theta});
  return v;
}

// Emission edge: lower-bound check, reset y[lambda], advance lambda, grow theta.
inline void gen_emit(ta::Edge& e, const GenVars& v, const Curve& c) {
  auto g = window(v.y, v.lambda, v.theta, ta::Cmp::Ge, c.lower);
  e.guard.windows.insert(e.guard.windows.end(), g.windows.begin(), g.windows.end());
  e.resets.push_back({v.y, v.lambda, 0});
  e.updates.push_back({v.lambda, ta::CounterOp::IncMod, static_cast<std::int64_t>(v.n)});
  e.updates.push_back({v.theta, ta::CounterOp::IncSat, static_cast<std::int64_t>(v.n)});
}

// Restart with a virtual event at the current instant.
inline void gen_restart(ta::Edge& e, const GenVars& v) {
  e.array_resets.push_back(v.y);
  e.updates.push_back({v.theta, ta::CounterOp::Set, 1});
  e.updates.push_back({v.lambda, ta::CounterOp::Set, static_cast<std::int64_t>(1 % v.n)});
}

// Forget the history entirely (used while a generator is inactive).
inline void gen_clear(ta::Edge& e, const GenVars& v) {
  e.array_resets.push_back(v.y);
  e.updates.push_back({v.theta, ta::CounterOp::Set, 0});
  e.updates.push_back({v.lambda, ta::CounterOp::Set, 0});
}

inline ta::Constraint gen_invariant(const GenVars& v, const Curve& c) {
  return window(v.y, v.lambda, v.theta, ta::Cmp::Le, c.upper);
}

} // namespace detail

/// One-location automaton emitting exactly the streams that conform to `c`.
inline ta::Automaton build_generator(const Curve& c, const std::string& channel, const std::string& name = "gen") {
  if (c.empty())
    throw CurveError("generator needs a non-empty curve");
  if (auto v = validate(c))
    throw CurveError("generator curve invalid: " + describe(*v));
  ta::Automaton a;
  a.name = name;
  auto v = detail::add_gen_vars(a, c.size(), "");
  a.add_location({"G", detail::gen_invariant(v, c), 0, false, false});
  ta::Edge e;
  e.source = e.target = 0;
  e.sync = ta::SyncKind::Emit;
  e.channel = channel;
  e.label = "emit";
  detail::gen_emit(e, v, c);
  a.add_edge(std::move(e));
  return a;
}

enum class ObserverVariant { WindowMin, CountMin };

struct ObserverSpec {
  ObserverVariant variant = ObserverVariant::WindowMin;
  std::int64_t param = 1; // K for WindowMin, window length W for CountMin
  std::string channel = kProduce;
};

/// WindowMin: cost is the time between an observed event (or the origin) and
/// the K-th event after it. CountMin: cost is the number of events seen in a
/// window of length W opened right after an event (or at the origin); events
/// at the closing instant may be left out.
/// Either way the target is location "Stop".
inline ta::Automaton build_observer(const ObserverSpec& spec) {
  using ta::Cmp;
  ta::Automaton a;
  a.name = "observer";
  auto recv = [&](std::size_t from, std::size_t to, std::string label) {
    ta::Edge e;
    e.source = from;
    e.target = to;
    e.sync = ta::SyncKind::Receive;
    e.channel = spec.channel;
    e.label = std::move(label);
    return e;
  };
  if (spec.variant == ObserverVariant::WindowMin) {
    if (spec.param < 0)
      throw ta::ModelError("observer K must be >= 0");
    const auto eta = a.add_counter("eta", 0, spec.param, 0);
    const auto start = a.add_location({"Start", {}, 0, false, true});
    const auto idle = a.add_location({"Idle", {}, 0, false, false});
    const auto counting = a.add_location({"Counting", {}, 1, false, false});
    const auto stop = a.add_location({"Stop", {}, 0, false, false});
    a.initial = start;
    a.add_edge({start, counting, {}, ta::SyncKind::Internal, "", {}, {}, {}, {}, 0, "origin"});
    a.add_edge({start, idle, {}, ta::SyncKind::Internal, "", {}, {}, {}, {}, 0, "wait"});
    a.add_edge(recv(idle, idle, "skip"));
    a.add_edge(recv(idle, counting, "begin"));
    auto count = recv(counting, counting, "count");
    count.updates.push_back({eta, ta::CounterOp::IncSat, spec.param});
    a.add_edge(std::move(count));
    ta::Edge done{counting, stop, {}, ta::SyncKind::Internal, "", {}, {}, {}, {}, 0, "done"};
    done.guard.counters.push_back(detail::ctr(eta, Cmp::Eq, spec.param));
    a.add_edge(std::move(done));
    a.add_edge(recv(stop, stop, "after"));
    return a;
  }
  if (spec.param < 1)
    throw ta::ModelError("observer window must be >= 1");
  // a least-count window can always be slid back until it opens on an event
  // (or the origin), so only those openings are tried
  const auto t = a.add_clock("t");
  const auto start = a.add_location({"Start", {}, 0, false, true});
  const auto idle = a.add_location({"Idle", {}, 0, false, false});
  ta::Constraint inv;
  inv.clocks.push_back(detail::clk(t, Cmp::Le, spec.param));
  const auto counting = a.add_location({"Counting", inv, 0, false, false});
  const auto stop = a.add_location({"Stop", {}, 0, false, false});
  a.initial = start;
  a.add_edge({start, counting, {}, ta::SyncKind::Internal, "", {}, {}, {}, {}, 0, "origin"});
  a.add_edge({start, idle, {}, ta::SyncKind::Internal, "", {}, {}, {}, {}, 0, "wait"});
  a.add_edge(recv(idle, idle, "skip"));
  auto begin = recv(idle, counting, "begin");
  begin.resets.push_back({t, std::nullopt, 0});
  a.add_edge(std::move(begin));
  auto count = recv(counting, counting, "count");
  count.cost = 1;
  a.add_edge(std::move(count));
  ta::Edge done{counting, stop, {}, ta::SyncKind::Internal, "", {}, {}, {}, {}, 0, "done"};
  done.guard.clocks.push_back(detail::clk(t, Cmp::Eq, spec.param));
  a.add_edge(std::move(done));
  a.add_edge(recv(stop, stop, "after"));
  return a;
}

/// Emits on `channel` at exactly the given instants (times[0] is the origin
/// and is not emitted), then stays silent.
inline ta::Automaton build_script(const std::vector<std::int64_t>& times, const std::string& channel,
                                  const std::string& name = "script") {
  using ta::Cmp;
  ta::Automaton a;
  a.name = name;
  const auto c = a.add_clock("c");
  for (std::size_t j = 0; j < times.size(); ++j) {
    ta::Constraint inv;
    if (j + 1 < times.size())
      inv.clocks.push_back(detail::clk(c, Cmp::Le, times[j + 1]));
    a.add_location({"E" + std::to_string(j), inv, 0, false, false});
  }
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    ta::Edge e{j, j + 1, {}, ta::SyncKind::Emit, channel, {}, {}, {}, {}, 0, "emit"};
    e.guard.clocks.push_back(detail::clk(c, Cmp::Eq, times[j + 1]));
    a.add_edge(std::move(e));
  }
  return a;
}

/// Receives `channel` at any time and flips a one-bit counter, so a caller
/// exploring the network can see when the channel fired.
inline ta::Automaton build_tap(const std::string& channel, const std::string& name = "tap") {
  ta::Automaton a;
  a.name = name;
  const auto bit = a.add_counter("bit", 0, 1, 0);
  a.add_location({"T", {}, 0, false, false});
  ta::Edge e{0, 0, {}, ta::SyncKind::Receive, channel, {}, {}, {}, {}, 0, "seen"};
  e.updates.push_back({bit, ta::CounterOp::IncMod, 2});
  a.add_edge(std::move(e));
  return a;
}

/// Emits `channel` at any instant.
inline ta::Automaton build_free_source(const std::string& channel, const std::string& name) {
  ta::Automaton a;
  a.name = name;
  a.add_location({"F", {}, 0, false, false});
  a.add_edge({0, 0, {}, ta::SyncKind::Emit, channel, {}, {}, {}, {}, 0, "emit"});
  return a;
}

struct ComponentModel {
  ta::Automaton pe;
  ta::Automaton sm;
};

namespace detail {

struct PeBuilder {
  const Mta& m;
  ta::Automaton pe;
  std::size_t q = 0;
  std::size_t x = 0;
  // committed switch location per (from, to)
  std::vector<std::vector<std::optional<std::size_t>>> hub;

  PeBuilder(const Mta& mta, std::int64_t capacity, std::int64_t q_init) : m(mta) {
    pe.name = "pe";
    q = pe.add_counter("q", 0, capacity, q_init);
    x = pe.add_clock("x");
    hub.assign(m.modes.size(), std::vector<std::optional<std::size_t>>(m.modes.size()));
  }

  ta::Edge edge(std::size_t from, std::size_t to, std::string label) const {
    ta::Edge e;
    e.source = from;
    e.target = to;
    e.label = std::move(label);
    return e;
  }

  ta::Edge req(std::size_t from, std::size_t to) const {
    auto e = edge(from, to, "req");
    e.sync = ta::SyncKind::Receive;
    e.channel = kReq;
    e.updates.push_back({q, ta::CounterOp::Add, 1});
    return e;
  }

  ta::Edge serv_full(std::size_t from, std::size_t to) const {
    auto e = edge(from, to, "serv");
    e.sync = ta::SyncKind::Receive;
    e.channel = kServ;
    e.guard.counters.push_back(ctr(q, ta::Cmp::Ge, 1));
    e.updates.push_back({q, ta::CounterOp::Add, -1});
    e.relays.push_back(kProduce);
    return e;
  }

  ta::Edge serv_empty(std::size_t from) const {
    auto e = edge(from, from, "serv_empty");
    e.sync = ta::SyncKind::Receive;
    e.channel = kServ;
    e.guard.counters.push_back(ctr(q, ta::Cmp::Eq, 0));
    return e;
  }

  // Location with the REQ/SERV loops and sinks for unused user channels.
  std::size_t add_state(std::size_t mode, std::string name, ta::Constraint inv) {
    const auto id = pe.add_location({std::move(name), std::move(inv), 0, false, false});
    pe.add_edge(req(id, id));
    pe.add_edge(serv_full(id, id));
    pe.add_edge(serv_empty(id));
    const auto* s = m.modes[mode].find(TransitionKind::Sync);
    for (const auto& ch : m.channels) {
      if (s && s->channel == ch)
        continue;
      auto e = edge(id, id, "ignore");
      e.sync = ta::SyncKind::Receive;
      e.channel = sync_channel(ch);
      pe.add_edge(std::move(e));
    }
    return id;
  }

  std::size_t switch_to(std::size_t from, std::size_t to) {
    if (!hub[from][to])
      hub[from][to] = pe.add_location({"C" + std::to_string(from) + "_" + std::to_string(to), {}, 0, false, true});
    return *hub[from][to];
  }

  void close_hubs(const std::vector<std::size_t>& entry) {
    for (std::size_t i = 0; i < hub.size(); ++i)
      for (std::size_t j = 0; j < hub.size(); ++j)
        if (hub[i][j]) {
          auto e = edge(*hub[i][j], entry[j], "switch");
          e.sync = ta::SyncKind::Emit;
          e.channel = syn_channel(i, j);
          e.resets.push_back({x, std::nullopt, 0});
          pe.add_edge(std::move(e));
        }
  }

  ta::Constraint dwell(std::size_t mode) const {
    ta::Constraint c;
    const auto& md = m.modes[mode];
    if (md.find(TransitionKind::Timeout))
      c.clocks.push_back(clk(x, ta::Cmp::Le, *md.dwell_max));
    return c;
  }

  void add_sync_and_timeout(std::size_t mode, std::size_t loc, bool timeout) {
    const auto& md = m.modes[mode];
    if (const auto* s = md.find(TransitionKind::Sync)) {
      auto e = edge(loc, switch_to(mode, m.target_index(*s)), "sync");
      e.sync = ta::SyncKind::Receive;
      e.channel = sync_channel(s->channel);
      pe.add_edge(std::move(e));
    }
    if (const auto* t = md.find(TransitionKind::Timeout); t && timeout) {
      auto e = edge(loc, switch_to(mode, m.target_index(*t)), "timeout");
      e.guard.clocks.push_back(clk(x, ta::Cmp::Eq, *md.dwell_max));
      pe.add_edge(std::move(e));
    }
  }

  ta::Constraint entry_invariant(std::size_t mode) const {
    ta::Constraint c;
    c.clocks.push_back(clk(x, ta::Cmp::Le, m.modes[mode].dwell_min));
    return c;
  }

  ta::Edge at_dwell_min(std::size_t mode, std::size_t from, std::size_t to, std::string label) const {
    auto e = edge(from, to, std::move(label));
    e.guard.clocks.push_back(clk(x, ta::Cmp::Eq, m.modes[mode].dwell_min));
    return e;
  }
};

inline ta::Constraint q_range(std::size_t q, std::optional<std::int64_t> lo, std::optional<std::int64_t> hi) {
  ta::Constraint c;
  if (lo)
    c.counters.push_back(ctr(q, ta::Cmp::Ge, *lo));
  if (hi)
    c.counters.push_back(ctr(q, ta::Cmp::Le, *hi));
  return c;
}

inline ta::Constraint merge(ta::Constraint a, const ta::Constraint& b) {
  a.clocks.insert(a.clocks.end(), b.clocks.begin(), b.clocks.end());
  a.counters.insert(a.counters.end(), b.counters.begin(), b.counters.end());
  a.windows.insert(a.windows.end(), b.windows.begin(), b.windows.end());
  return a;
}

inline void require_valid(const Mta& m) {
  if (auto err = validate_mta(m))
    throw ta::ModelError("invalid MTA: " + *err);
}

inline std::size_t max_service_length(const Mta& m, std::size_t g) {
  std::size_t n = 1;
  for (const auto& md : m.modes)
    n = std::max(n, md.service.size() / g);
  return n;
}

} // namespace detail

/// Fine PE and service model. Each mode M_i becomes S_i (dwell) and S_i1
/// (buffer band); switches pass through a committed hub that emits syn.i.j.
inline ComponentModel build_fine(const Mta& m, std::int64_t capacity) {
  using ta::Cmp;
  detail::require_valid(m);
  if (m.initial_backlog > capacity)
    throw ta::ModelError("initial_backlog exceeds buffer capacity");
  detail::PeBuilder b(m, capacity, m.initial_backlog);
  const std::size_t M = m.modes.size();
  std::vector<std::size_t> entry(M), band(M);
  for (std::size_t i = 0; i < M; ++i) {
    const auto& md = m.modes[i];
    entry[i] = b.add_state(i, "S" + std::to_string(i), b.entry_invariant(i));
    band[i] = b.add_state(i, "S" + std::to_string(i) + "1",
                          detail::merge(detail::q_range(b.q, md.buf_low, md.buf_high), b.dwell(i)));
  }
  for (std::size_t i = 0; i < M; ++i) {
    const auto& md = m.modes[i];
    b.pe.add_edge(b.at_dwell_min(i, entry[i], band[i], "settle"));
    if (const auto* t = md.find(TransitionKind::BufferAbove)) {
      const auto hub = b.switch_to(i, m.target_index(*t));
      auto e = b.at_dwell_min(i, entry[i], hub, "above");
      e.guard.counters.push_back(detail::ctr(b.q, Cmp::Gt, *md.buf_high));
      b.pe.add_edge(std::move(e));
      auto r = b.req(band[i], hub);
      r.label = "req_above";
      r.guard.counters.push_back(detail::ctr(b.q, Cmp::Ge, *md.buf_high));
      b.pe.add_edge(std::move(r));
    }
    if (const auto* t = md.find(TransitionKind::BufferBelow)) {
      const auto hub = b.switch_to(i, m.target_index(*t));
      auto e = b.at_dwell_min(i, entry[i], hub, "below");
      e.guard.counters.push_back(detail::ctr(b.q, Cmp::Lt, *md.buf_low));
      b.pe.add_edge(std::move(e));
      auto s = b.serv_full(band[i], hub);
      s.label = "serv_below";
      s.guard.counters.push_back(detail::ctr(b.q, Cmp::Le, *md.buf_low));
      b.pe.add_edge(std::move(s));
    }
    b.add_sync_and_timeout(i, entry[i], false);
    b.add_sync_and_timeout(i, band[i], true);
  }
  b.close_hubs(entry);
  b.pe.initial = entry[m.initial_index()];

  ta::Automaton sm;
  sm.name = "sm";
  const std::size_t N = detail::max_service_length(m, 1);
  auto gv = detail::add_gen_vars(sm, N, "");
  for (std::size_t i = 0; i < M; ++i)
    sm.add_location({"G" + std::to_string(i), detail::gen_invariant(gv, m.modes[i].service), 0, false, false});
  for (std::size_t i = 0; i < M; ++i) {
    ta::Edge e{i, i, {}, ta::SyncKind::Emit, kServ, {}, {}, {}, {}, 0, "serv"};
    detail::gen_emit(e, gv, m.modes[i].service);
    sm.add_edge(std::move(e));
    for (std::size_t j = 0; j < M; ++j) {
      ta::Edge s{i, j, {}, ta::SyncKind::Receive, syn_channel(i, j), {}, {}, {}, {}, 0, "restart"};
      detail::gen_restart(s, gv);
      sm.add_edge(std::move(s));
    }
  }
  sm.initial = m.initial_index();
  return {std::move(b.pe), std::move(sm)};
}

/// Coarse PE and service model at granularity g. Q counts coarse events; the
/// band of S_i1 is split into S_i1, S_inc and S_dec using the coarse
/// thresholds. The service model waits in T_i after every mode entry before
/// the first coarse serv, then runs the sampled service generator.
inline ComponentModel build_coarse(const Mta& m, std::size_t g, std::int64_t capacity) {
  using ta::Cmp;
  detail::require_valid(m);
  if (g == 0)
    throw ta::ModelError("granularity must be >= 1");
  for (const auto& md : m.modes)
    if (md.service.size() < g)
      throw ta::ModelError("granularity " + std::to_string(g) + " exceeds service curve length of mode '" +
                           md.name + "'");
  const auto G = static_cast<std::int64_t>(g);
  const std::int64_t cap_c = ceil_div(capacity, G) + 1;
  const std::int64_t q0 = floor_div(m.initial_backlog, G);
  detail::PeBuilder b(m, cap_c, q0);
  const std::size_t M = m.modes.size();
  std::vector<std::size_t> entry(M);
  struct Band {
    std::optional<std::size_t> mid, inc, dec;
  };
  std::vector<Band> bands(M);
  std::vector<CoarseThresholds> th(M);
  for (std::size_t i = 0; i < M; ++i) {
    const auto& md = m.modes[i];
    const auto n = std::to_string(i);
    th[i] = coarse_thresholds(md.buf_low, md.buf_high, G);
    entry[i] = b.add_state(i, "S" + n, b.entry_invariant(i));
    std::optional<std::int64_t> mid_lo, mid_hi;
    if (th[i].h_high)
      mid_lo = *th[i].h_high + 1;
    if (th[i].y_low)
      mid_hi = *th[i].y_low - 1;
    if (!mid_lo || !mid_hi || *mid_lo <= *mid_hi)
      bands[i].mid = b.add_state(i, "S" + n + "1", detail::merge(detail::q_range(b.q, mid_lo, mid_hi), b.dwell(i)));
    if (md.find(TransitionKind::BufferAbove))
      bands[i].inc = b.add_state(i, "S" + n + "inc",
                                 detail::merge(detail::q_range(b.q, th[i].y_low, th[i].y_high), b.dwell(i)));
    if (md.find(TransitionKind::BufferBelow))
      bands[i].dec = b.add_state(i, "S" + n + "dec",
                                 detail::merge(detail::q_range(b.q, th[i].h_low, th[i].h_high), b.dwell(i)));
  }
  for (std::size_t i = 0; i < M; ++i) {
    const auto& md = m.modes[i];
    std::vector<std::size_t> locs;
    for (auto l : {bands[i].mid, bands[i].inc, bands[i].dec})
      if (l)
        locs.push_back(*l);
    for (auto to : locs)
      b.pe.add_edge(b.at_dwell_min(i, entry[i], to, "settle"));
    // moves inside the band follow Q; the target invariant picks the state
    for (auto from : locs)
      for (auto to : locs)
        if (from != to) {
          b.pe.add_edge(b.req(from, to));
          b.pe.add_edge(b.serv_full(from, to));
        }
    if (const auto* t = md.find(TransitionKind::BufferAbove)) {
      const auto hub = b.switch_to(i, m.target_index(*t));
      auto e = b.at_dwell_min(i, entry[i], hub, "above");
      e.guard.counters.push_back(detail::ctr(b.q, Cmp::Gt, *th[i].y_high));
      b.pe.add_edge(std::move(e));
      b.pe.add_edge(b.edge(*bands[i].inc, hub, "leave_inc"));
      auto r = b.req(*bands[i].inc, hub);
      r.label = "req_above";
      b.pe.add_edge(std::move(r));
    }
    if (const auto* t = md.find(TransitionKind::BufferBelow)) {
      const auto hub = b.switch_to(i, m.target_index(*t));
      auto e = b.at_dwell_min(i, entry[i], hub, "below");
      e.guard.counters.push_back(detail::ctr(b.q, Cmp::Lt, *th[i].h_low));
      b.pe.add_edge(std::move(e));
      b.pe.add_edge(b.edge(*bands[i].dec, hub, "leave_dec"));
      auto s = b.serv_full(*bands[i].dec, hub);
      s.label = "serv_below";
      b.pe.add_edge(std::move(s));
    }
    b.add_sync_and_timeout(i, entry[i], false);
    for (auto l : locs)
      b.add_sync_and_timeout(i, l, true);
  }
  b.close_hubs(entry);
  b.pe.initial = entry[m.initial_index()];

  ta::Automaton sm;
  sm.name = "sm";
  const std::size_t N = detail::max_service_length(m, g);
  auto gv = detail::add_gen_vars(sm, N, "");
  const auto x = sm.add_clock("x");
  std::vector<Curve> sampled;
  for (const auto& md : m.modes)
    sampled.push_back(sample(md.service, g));
  for (std::size_t i = 0; i < M; ++i)
    sm.add_location({"G" + std::to_string(i), detail::gen_invariant(gv, sampled[i]), 0, false, false});
  for (std::size_t i = 0; i < M; ++i) {
    ta::Constraint inv;
    const Bound hi = m.modes[i].service.up(g);
    if (hi.is_finite())
      inv.clocks.push_back(detail::clk(x, Cmp::Le, hi.value()));
    sm.add_location({"T" + std::to_string(i), inv, 0, false, false});
  }
  for (std::size_t i = 0; i < M; ++i) {
    const std::size_t gen = i;
    const std::size_t trans = M + i;
    ta::Edge e{gen, gen, {}, ta::SyncKind::Emit, kServ, {}, {}, {}, {}, 0, "serv"};
    detail::gen_emit(e, gv, sampled[i]);
    sm.add_edge(std::move(e));
    ta::Edge first{trans, gen, {}, ta::SyncKind::Emit, kServ, {}, {}, {}, {}, 0, "first_serv"};
    const Bound lo = m.modes[i].service.lo(1);
    if (lo.is_finite())
      first.guard.clocks.push_back(detail::clk(x, Cmp::Ge, lo.value()));
    else
      first.guard.counters.push_back(detail::ctr(gv.theta, Cmp::Lt, 0)); // never
    detail::gen_restart(first, gv);
    sm.add_edge(std::move(first));
    for (std::size_t j = 0; j < M; ++j)
      for (std::size_t from : {gen, trans}) {
        ta::Edge s{from, M + j, {}, ta::SyncKind::Receive, syn_channel(i, j), {}, {}, {}, {}, 0, "enter"};
        s.resets.push_back({x, std::nullopt, 0});
        detail::gen_clear(s, gv);
        sm.add_edge(std::move(s));
      }
  }
  sm.initial = m.initial_index();
  return {std::move(b.pe), std::move(sm)};
}

struct SyncSource {
  std::string channel;
  std::optional<Curve> curve; // nullopt: any instant
};

/// Full network minus the observer: input generator, PE, service model and
/// one source per user channel. g = 1 uses the fine model.
inline std::vector<ta::Automaton> build_system(const Mta& m, const Curve& arrival,
                                               const std::vector<SyncSource>& sources, std::size_t g,
                                               std::int64_t capacity) {
  std::vector<ta::Automaton> net;
  net.push_back(build_generator(g == 1 ? arrival : sample(arrival, g), kReq, "input"));
  auto comp = g == 1 ? build_fine(m, capacity) : build_coarse(m, g, capacity);
  net.push_back(std::move(comp.pe));
  net.push_back(std::move(comp.sm));
  for (const auto& s : sources) {
    if (s.curve)
      net.push_back(build_generator(*s.curve, sync_channel(s.channel), "env." + s.channel));
    else
      net.push_back(build_free_source(sync_channel(s.channel), "env." + s.channel));
  }
  return net;
}

} // namespace gran
