// gran: analyze, combine, oracle, plot and sample curves from the command line.
//
// Exit codes: 0 ok, 2 bad input, 3 state budget exhausted (partial results
// written), 4 contradictory curves, 5 oracle bounds exceeded, 6 sampling-bound
// self-check failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gran/curves.hpp"
#include "gran/oracle.hpp"
#include "gran/pipeline.hpp"
#include "gran/plot.hpp"

namespace fs = std::filesystem;
using namespace gran;

namespace {

constexpr int kBadInput = 2;
constexpr int kBudget = 3;
constexpr int kEmpty = 4;
constexpr int kOracleBounds = 5;
constexpr int kSampling = 6;

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Curve read_curve(const fs::path& p) {
  try {
    Curve c = from_csv(read_text(p));
    if (c.empty())
      throw CurveError("no rows");
    if (auto v = validate(c))
      throw CurveError(describe(*v));
    return c;
  } catch (const CurveError& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

struct AnalyzeArgs {
  std::string config, out = "out", model = "simple";
  std::vector<std::size_t> granularities;
  bool fine = false;
  std::uint64_t budget = 0;
  std::size_t jobs = 0;
};

int cmd_analyze(const AnalyzeArgs& a) {
  SystemDescription d = load_config(a.config);
  if (a.budget)
    d.engine.state_budget = a.budget;
  if (a.jobs)
    d.engine.jobs = a.jobs;
  std::vector<std::size_t> gs = a.granularities.empty() ? d.granularities : a.granularities;
  if (a.fine)
    gs.push_back(1);
  if (gs.empty())
    throw ConfigError("granularities: nothing to analyze (use --granularity or --fine)");
  const auto rep = run_analysis(d, gs);
  write_report(rep, a.out);
  for (const auto& r : rep.results) {
    std::printf("g=%zu points=%zu explored=%llu%s%s\n", r.g, r.curve.size(),
                static_cast<unsigned long long>(r.explored()), r.partial() ? " partial" : "",
                r.upper.truncated ? " (upper truncated by horizon)" : "");
  }
  for (const auto& [g, v] : rep.distances)
    std::printf("distance g=%zu %s\n", g, format_distance(v).c_str());
  if (rep.refine_error) {
    std::fprintf(stderr, "refinement failed: %s\n", rep.refine_error->c_str());
    return kEmpty;
  }
  if (rep.partial()) {
    std::fprintf(stderr, "state budget exhausted: partial results written to %s\n", a.out.c_str());
    return kBudget;
  }
  if (!rep.sampling_violations.empty()) {
    for (const auto& v : rep.sampling_violations)
      std::fprintf(stderr, "sampling bound violated: %s\n", v.c_str());
    return kSampling;
  }
  return 0;
}

int cmd_combine(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<GranularCurve> curves;
  for (const auto& in : inputs) {
    const auto colon = in.find(':');
    if (colon == std::string::npos)
      throw ConfigError("--input " + in + ": expected G:PATH");
    std::size_t g = 0;
    try {
      std::size_t used = 0;
      g = std::stoul(in.substr(0, colon), &used);
      if (used != colon || g == 0)
        throw std::invalid_argument("g");
    } catch (const std::exception&) {
      throw ConfigError("--input " + in + ": bad granularity");
    }
    curves.push_back({g, read_curve(in.substr(colon + 1))});
  }
  const Curve naive = combine_naive(curves);
  fs::create_directories(out);
  write_file(fs::path(out) / "combined_naive.csv", to_csv(naive));
  Curve refined;
  try {
    refined = closure(naive);
  } catch (const EmptyCurveError& e) {
    std::fprintf(stderr, "empty: %s\n", e.what());
    return kEmpty;
  }
  write_file(fs::path(out) / "refined.csv", to_csv(refined));
  std::printf("k,naive_lower,refined_lower,naive_upper,refined_upper,improved\n");
  for (std::size_t k = 1; k <= naive.size(); ++k) {
    const bool better = refined.lo(k) > naive.lo(k) || refined.up(k) < naive.up(k);
    std::printf("%zu,%s,%s,%s,%s,%s\n", k, naive.lo(k).str().c_str(), refined.lo(k).str().c_str(),
                naive.up(k).str().c_str(), refined.up(k).str().c_str(), better ? "yes" : "no");
  }
  return 0;
}

int cmd_oracle(const std::string& config, const std::string& out) {
  const SystemDescription d = load_config(config);
  const auto model = oracle_model(d);
  const auto r = oracle::exact_output_curve(model, d.n, d.oracle.horizon, d.oracle.settle);
  fs::create_directories(out);
  write_file(fs::path(out) / "oracle_curve.csv", to_csv(r.curve));
  std::printf("oracle: %zu states\n", r.states);
  return 0;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out) {
  if (inputs.empty())
    throw ConfigError("plot: no curve files");
  std::vector<PlotSeries> series;
  for (const auto& in : inputs)
    series.push_back({fs::path(in).filename().string(), read_curve(in)});
  write_file(out, plot_svg(series));
  return 0;
}

int cmd_sample(const std::string& input, std::size_t g, const std::string& out) {
  Curve c;
  try {
    c = sample(read_curve(input), g);
  } catch (const CurveError& e) {
    throw ConfigError(std::string("sample: ") + e.what());
  }
  if (out.empty())
    std::cout << to_csv(c);
  else
    write_file(out, to_csv(c));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-granularity output-curve analysis of mode-switching components"};
  app.require_subcommand(1);

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "fine and coarse analyses of a system description");
  analyze->add_option("--config", aa.config, "system description (JSON)")->required();
  analyze->add_option("--out", aa.out, "output directory");
  analyze->add_option("--granularity", aa.granularities, "granularity to analyze (repeatable)");
  analyze->add_flag("--fine", aa.fine, "also run the fine (g=1) analysis");
  analyze->add_option("--state-budget", aa.budget, "stored-state limit per search");
  analyze->add_option("--jobs", aa.jobs, "concurrent searches");
  analyze->add_option("--model", aa.model, "coarse model")->check(CLI::IsMember({"simple"}));

  std::vector<std::string> comb_in;
  std::string comb_out = "out";
  auto* combine = app.add_subcommand("combine", "combine coarse curves and refine by closure");
  combine->add_option("--input", comb_in, "G:PATH curve file (repeatable)")->required();
  combine->add_option("--out", comb_out, "output directory");

  std::string or_config, or_out = "out";
  auto* orc = app.add_subcommand("oracle", "exact output curve by exhaustive simulation");
  orc->add_option("--config", or_config, "system description (JSON)")->required();
  orc->add_option("--out", or_out, "output directory");

  std::vector<std::string> plot_in;
  std::string plot_out = "curves.svg";
  auto* plot = app.add_subcommand("plot", "staircase SVG of curve files");
  plot->add_option("--input", plot_in, "curve CSV (repeatable)");
  plot->add_option("--out", plot_out, "SVG file");

  std::string smp_in, smp_out;
  std::size_t smp_g = 1;
  auto* smp = app.add_subcommand("sample", "sample a curve at granularity g");
  smp->add_option("--input", smp_in, "curve CSV")->required();
  smp->add_option("--granularity", smp_g, "granularity")->required();
  smp->add_option("--out", smp_out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*analyze)
      return cmd_analyze(aa);
    if (*combine)
      return cmd_combine(comb_in, comb_out);
    if (*orc)
      return cmd_oracle(or_config, or_out);
    if (*plot)
      return cmd_plot(plot_in, plot_out);
    if (*smp)
      return cmd_sample(smp_in, smp_g, smp_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const oracle::OracleError& e) {
    std::fprintf(stderr, "oracle: %s\n", e.what());
    return kOracleBounds;
  } catch (const EmptyCurveError& e) {
    std::fprintf(stderr, "empty: %s\n", e.what());
    return kEmpty;
  } catch (const CurveError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
