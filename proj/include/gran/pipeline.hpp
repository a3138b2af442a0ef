#pragma once

// System description parsing and the end-to-end analysis: fine and coarse
// runs, combination, refinement, distances and the sampling-bound self-check.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gran/curves.hpp"
#include "gran/engine.hpp"
#include "gran/mta.hpp"
#include "gran/oracle.hpp"
#include "gran/translate.hpp"

namespace gran {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct EngineSettings {
  std::uint64_t state_budget = 10'000'000;
  std::size_t horizon = 256;
  std::int64_t buffer_capacity = 32;
  std::size_t jobs = 1;
};

struct OracleSettings {
  std::int64_t horizon = 30;
  std::int64_t settle = 15;
};

struct SystemDescription {
  std::size_t n = 0;
  Curve arrival;
  Mta mta;
  std::vector<SyncSource> sources;
  std::vector<std::size_t> granularities;
  EngineSettings engine;
  OracleSettings oracle;
};

namespace detail {

using nlohmann::json;

inline const json* field(const json& j, const char* name) {
  auto it = j.find(name);
  return it == j.end() ? nullptr : &*it;
}

inline std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer())
    throw ConfigError(path + ": expected an integer");
  return j.get<std::int64_t>();
}

inline std::optional<std::int64_t> as_opt_int(const json* j, const std::string& path) {
  if (!j || j->is_null() || (j->is_string() && j->get<std::string>() == "inf"))
    return std::nullopt;
  return as_int(*j, path);
}

inline Bound as_bound(const json& j, const std::string& path) {
  if (j.is_null() || (j.is_string() && j.get<std::string>() == "inf"))
    return kUnbounded;
  const auto v = as_int(j, path);
  if (v < 0)
    throw ConfigError(path + ": negative duration");
  return Bound(v);
}

inline Curve as_curve(const json& j, const std::string& path) {
  if (!j.is_object())
    throw ConfigError(path + ": expected an object with lower and upper");
  const json* lo = field(j, "lower");
  const json* up = field(j, "upper");
  if (!lo || !lo->is_array())
    throw ConfigError(path + ".lower: expected an array");
  if (!up || !up->is_array())
    throw ConfigError(path + ".upper: expected an array");
  if (lo->size() != up->size())
    throw ConfigError(path + ": lower and upper have different lengths");
  if (lo->empty())
    throw ConfigError(path + ": empty curve");
  Curve c;
  for (std::size_t i = 0; i < lo->size(); ++i) {
    c.lower.push_back(as_bound((*lo)[i], path + ".lower[" + std::to_string(i) + "]"));
    c.upper.push_back(as_bound((*up)[i], path + ".upper[" + std::to_string(i) + "]"));
  }
  if (auto v = validate(c))
    throw ConfigError(path + ": " + describe(*v));
  return c;
}

inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
      throw ConfigError(path + (path.empty() ? "" : ".") + it.key() + ": unknown field");
  }
}

} // namespace detail

inline SystemDescription parse_config(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object())
    throw ConfigError("config: expected an object");
  check_keys(j, "", {"n", "arrival", "modes", "initial", "initial_backlog", "channels", "granularities", "engine",
                     "oracle", "description"});
  SystemDescription d;
  const json* n = field(j, "n");
  if (!n)
    throw ConfigError("n: missing");
  const auto nv = as_int(*n, "n");
  if (nv < 1)
    throw ConfigError("n: must be >= 1");
  d.n = static_cast<std::size_t>(nv);

  const json* arr = field(j, "arrival");
  if (!arr)
    throw ConfigError("arrival: missing");
  d.arrival = as_curve(*arr, "arrival");
  if (d.arrival.size() < d.n)
    throw ConfigError("arrival: needs at least n = " + std::to_string(d.n) + " points");

  if (const json* ch = field(j, "channels")) {
    if (!ch->is_array())
      throw ConfigError("channels: expected an array");
    for (std::size_t i = 0; i < ch->size(); ++i) {
      const auto& c = (*ch)[i];
      const std::string path = "channels[" + std::to_string(i) + "]";
      SyncSource s;
      if (c.is_string()) {
        s.channel = c.get<std::string>();
      } else if (c.is_object()) {
        check_keys(c, path, {"name", "lower", "upper"});
        const json* nm = field(c, "name");
        if (!nm || !nm->is_string())
          throw ConfigError(path + ".name: expected a string");
        s.channel = nm->get<std::string>();
        if (field(c, "lower") || field(c, "upper"))
          s.curve = as_curve(c, path);
      } else {
        throw ConfigError(path + ": expected a name or an object");
      }
      if (s.channel.empty())
        throw ConfigError(path + ": empty channel name");
      for (const auto& o : d.sources)
        if (o.channel == s.channel)
          throw ConfigError(path + ": duplicate channel '" + s.channel + "'");
      d.mta.channels.push_back(s.channel);
      d.sources.push_back(std::move(s));
    }
  }

  const json* modes = field(j, "modes");
  if (!modes || !modes->is_array() || modes->empty())
    throw ConfigError("modes: expected a non-empty array");
  for (std::size_t i = 0; i < modes->size(); ++i) {
    const auto& mj = (*modes)[i];
    const std::string path = "modes[" + std::to_string(i) + "]";
    if (!mj.is_object())
      throw ConfigError(path + ": expected an object");
    check_keys(mj, path, {"name", "service", "buf_low", "buf_high", "dwell_min", "dwell_max", "transitions"});
    Mode m;
    const json* nm = field(mj, "name");
    if (!nm || !nm->is_string())
      throw ConfigError(path + ".name: expected a string");
    m.name = nm->get<std::string>();
    const json* sv = field(mj, "service");
    if (!sv)
      throw ConfigError(path + ".service: missing");
    m.service = as_curve(*sv, path + ".service");
    m.buf_low = as_opt_int(field(mj, "buf_low"), path + ".buf_low");
    m.buf_high = as_opt_int(field(mj, "buf_high"), path + ".buf_high");
    if (const json* dm = field(mj, "dwell_min"))
      m.dwell_min = as_int(*dm, path + ".dwell_min");
    m.dwell_max = as_opt_int(field(mj, "dwell_max"), path + ".dwell_max");
    if (const json* ts = field(mj, "transitions")) {
      if (!ts->is_array())
        throw ConfigError(path + ".transitions: expected an array");
      for (std::size_t t = 0; t < ts->size(); ++t) {
        const auto& tj = (*ts)[t];
        const std::string tp = path + ".transitions[" + std::to_string(t) + "]";
        if (!tj.is_object())
          throw ConfigError(tp + ": expected an object");
        check_keys(tj, tp, {"kind", "target", "channel"});
        const json* kind = field(tj, "kind");
        const json* target = field(tj, "target");
        if (!kind || !kind->is_string())
          throw ConfigError(tp + ".kind: expected a string");
        auto k = parse_transition_kind(kind->get<std::string>());
        if (!k)
          throw ConfigError(tp + ".kind: unknown kind '" + kind->get<std::string>() + "'");
        if (!target || !target->is_string())
          throw ConfigError(tp + ".target: expected a string");
        Transition tr{*k, target->get<std::string>(), ""};
        if (*k == TransitionKind::Sync) {
          const json* c = field(tj, "channel");
          if (!c || !c->is_string())
            throw ConfigError(tp + ".channel: sync transitions need a channel name");
          tr.channel = c->get<std::string>();
        }
        m.transitions.push_back(std::move(tr));
      }
    }
    d.mta.modes.push_back(std::move(m));
  }
  const json* init = field(j, "initial");
  if (!init || !init->is_string())
    throw ConfigError("initial: expected a mode name");
  d.mta.initial = init->get<std::string>();
  if (const json* b = field(j, "initial_backlog"))
    d.mta.initial_backlog = as_int(*b, "initial_backlog");
  if (auto err = validate_mta(d.mta))
    throw ConfigError("modes: " + *err);

  if (const json* gs = field(j, "granularities")) {
    if (!gs->is_array())
      throw ConfigError("granularities: expected an array");
    for (std::size_t i = 0; i < gs->size(); ++i) {
      const auto g = as_int((*gs)[i], "granularities[" + std::to_string(i) + "]");
      if (g < 1 || static_cast<std::size_t>(g) > d.n)
        throw ConfigError("granularities[" + std::to_string(i) + "]: must lie in [1, n]");
      if (std::find(d.granularities.begin(), d.granularities.end(), g) != d.granularities.end())
        throw ConfigError("granularities[" + std::to_string(i) + "]: duplicate");
      d.granularities.push_back(static_cast<std::size_t>(g));
    }
  }

  if (const json* e = field(j, "engine")) {
    if (!e->is_object())
      throw ConfigError("engine: expected an object");
    check_keys(*e, "engine", {"state_budget", "horizon", "buffer_capacity", "jobs"});
    if (const json* v = field(*e, "state_budget")) {
      const auto b = as_int(*v, "engine.state_budget");
      if (b < 1)
        throw ConfigError("engine.state_budget: must be >= 1");
      d.engine.state_budget = static_cast<std::uint64_t>(b);
    }
    if (const json* v = field(*e, "horizon")) {
      const auto h = as_int(*v, "engine.horizon");
      if (h < 1)
        throw ConfigError("engine.horizon: must be >= 1");
      d.engine.horizon = static_cast<std::size_t>(h);
    }
    if (const json* v = field(*e, "buffer_capacity")) {
      d.engine.buffer_capacity = as_int(*v, "engine.buffer_capacity");
      if (d.engine.buffer_capacity < 1 || d.engine.buffer_capacity > 10000)
        throw ConfigError("engine.buffer_capacity: must lie in [1, 10000]");
    }
    if (const json* v = field(*e, "jobs")) {
      const auto jb = as_int(*v, "engine.jobs");
      if (jb < 1)
        throw ConfigError("engine.jobs: must be >= 1");
      d.engine.jobs = static_cast<std::size_t>(jb);
    }
  }
  if (d.mta.initial_backlog > d.engine.buffer_capacity)
    throw ConfigError("initial_backlog: exceeds engine.buffer_capacity");
  if (const json* o = field(j, "oracle")) {
    if (!o->is_object())
      throw ConfigError("oracle: expected an object");
    check_keys(*o, "oracle", {"horizon", "settle"});
    if (const json* v = field(*o, "horizon"))
      d.oracle.horizon = as_int(*v, "oracle.horizon");
    if (const json* v = field(*o, "settle"))
      d.oracle.settle = as_int(*v, "oracle.settle");
    if (d.oracle.horizon < 1)
      throw ConfigError("oracle.horizon: must be >= 1");
    if (d.oracle.settle < 0 || d.oracle.settle >= d.oracle.horizon)
      throw ConfigError("oracle.settle: must lie in [0, oracle.horizon)");
  }
  return d;
}

inline SystemDescription load_config(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in)
    throw ConfigError("cannot read " + p.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
  return parse_config(j);
}

inline std::vector<ta::Automaton> system_for(const SystemDescription& d, std::size_t g) {
  return build_system(d.mta, d.arrival, d.sources, g, d.engine.buffer_capacity);
}

inline oracle::Model oracle_model(const SystemDescription& d) {
  oracle::Model m;
  m.mta = d.mta;
  m.arrival = d.arrival;
  m.capacity = d.engine.buffer_capacity;
  for (const auto& s : d.sources) {
    if (s.curve)
      m.curve_channels.emplace_back(s.channel, *s.curve);
    else
      m.free_channels.push_back(s.channel);
  }
  return m;
}

struct GranularityResult {
  std::size_t g = 1;
  Curve curve;
  LowerAnalysis lower;
  UpperAnalysis upper;
  bool partial() const { return lower.partial || upper.partial; }
  std::uint64_t explored() const {
    std::uint64_t e = 0;
    for (const auto& p : lower.points)
      e += p.result.stats.explored;
    for (const auto& p : upper.points)
      e += p.result.stats.explored;
    return e;
  }
};

struct AnalysisReport {
  std::vector<GranularityResult> results; // ascending g
  std::optional<Curve> naive;
  std::optional<Curve> refined;
  std::optional<std::string> refine_error;
  std::vector<std::pair<std::size_t, double>> distances;
  std::vector<std::string> sampling_violations;
  bool sampling_checked = false;

  bool partial() const {
    return std::any_of(results.begin(), results.end(), [](const auto& r) { return r.partial(); });
  }
  const GranularityResult* at(std::size_t g) const {
    for (const auto& r : results)
      if (r.g == g)
        return &r;
    return nullptr;
  }
};

inline GranularityResult analyze_granularity(const SystemDescription& d, std::size_t g) {
  GranularityResult r;
  r.g = g;
  const std::size_t points = d.n / g;
  const auto sys = system_for(d, g);
  EngineOptions eo{d.engine.state_budget, d.engine.jobs};
  r.lower = analyze_lower(sys, points, eo);
  r.upper = analyze_upper(sys, d.engine.horizon, points, eo);
  r.curve = Curve(r.lower.lower, r.upper.upper);
  return r;
}

/// Sampling bound: coarse.lo(k) <= fine.lo(gk) and coarse.up(k) >= fine.up(gk).
inline std::vector<std::string> sampling_bound_check(const Curve& fine, const Curve& coarse, std::size_t g) {
  std::vector<std::string> out;
  for (std::size_t k = 1; k <= coarse.size() && g * k <= fine.size(); ++k) {
    if (coarse.lo(k) > fine.lo(g * k))
      out.push_back("g=" + std::to_string(g) + " k=" + std::to_string(k) + ": lower " + coarse.lo(k).str() + " > " +
                    fine.lo(g * k).str());
    if (coarse.up(k) < fine.up(g * k))
      out.push_back("g=" + std::to_string(g) + " k=" + std::to_string(k) + ": upper " + coarse.up(k).str() + " < " +
                    fine.up(g * k).str());
  }
  return out;
}

inline AnalysisReport run_analysis(const SystemDescription& d, std::vector<std::size_t> gs) {
  std::sort(gs.begin(), gs.end());
  gs.erase(std::unique(gs.begin(), gs.end()), gs.end());
  for (auto g : gs) {
    if (g < 1 || g > d.n)
      throw ConfigError("granularity " + std::to_string(g) + " outside [1, n]");
    for (const auto& m : d.mta.modes)
      if (m.service.size() < g)
        throw ConfigError("granularity " + std::to_string(g) + ": service curve of mode '" + m.name + "' is shorter");
  }
  AnalysisReport rep;
  for (auto g : gs)
    rep.results.push_back(analyze_granularity(d, g));
  std::vector<GranularCurve> inputs;
  for (const auto& r : rep.results)
    inputs.push_back({r.g, r.curve});
  if (!inputs.empty()) {
    rep.naive = combine_naive(inputs);
    try {
      rep.refined = closure(*rep.naive);
    } catch (const EmptyCurveError& e) {
      rep.refine_error = e.what();
    }
  }
  if (const auto* fine = rep.at(1)) {
    rep.sampling_checked = !rep.partial();
    for (const auto& r : rep.results) {
      if (r.g == 1)
        continue;
      try {
        rep.distances.emplace_back(r.g, distance(fine->curve, r.curve, r.g));
      } catch (const CurveError&) {
        // unbounded entries: no distance
      }
      if (rep.sampling_checked)
        for (auto& v : sampling_bound_check(fine->curve, r.curve, r.g))
          rep.sampling_violations.push_back(std::move(v));
    }
  }
  return rep;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + p.string());
  out << content;
}

inline std::string format_distance(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

/// Curves, stats and a summary; everything except the millis columns is
/// deterministic.
inline void write_report(const AnalysisReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json summary;
  summary["granularities"] = nlohmann::ordered_json::array();
  for (const auto& r : rep.results) {
    const auto g = std::to_string(r.g);
    write_file(dir / ("curve_g" + g + ".csv"), to_csv(r.curve));
    write_file(dir / ("stats_lower_g" + g + ".csv"), stats_csv(r.lower.points));
    write_file(dir / ("stats_upper_g" + g + ".csv"), stats_csv(r.upper.points));
    nlohmann::ordered_json e;
    e["g"] = r.g;
    e["points"] = r.curve.size();
    e["states_explored"] = r.explored();
    e["partial"] = r.partial();
    e["horizon_truncated"] = r.upper.truncated;
    summary["granularities"].push_back(e);
  }
  if (rep.naive)
    write_file(dir / "combined_naive.csv", to_csv(*rep.naive));
  if (rep.refined)
    write_file(dir / "refined.csv", to_csv(*rep.refined));
  if (rep.refine_error)
    summary["refine_error"] = *rep.refine_error;
  if (!rep.distances.empty()) {
    std::string s = "g,distance\n";
    for (const auto& [g, v] : rep.distances)
      s += std::to_string(g) + "," + format_distance(v) + "\n";
    write_file(dir / "distance.csv", s);
  }
  summary["partial"] = rep.partial();
  summary["sampling_checked"] = rep.sampling_checked;
  summary["sampling_violations"] = rep.sampling_violations;
  write_file(dir / "report.json", summary.dump(2) + "\n");
}

} // namespace gran
