#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gran/pipeline.hpp"
#include "gran/plot.hpp"
#include "support.hpp"

using namespace gran;
using gran::test::bounds;
namespace fs = std::filesystem;

namespace {

const std::string kSrc = GRAN_SOURCE_DIR;

nlohmann::json tiny_json() {
  std::ifstream in(kSrc + "/configs/tiny/sleep_run.json");
  return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("gran_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(GRAN_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST(Config, ShippedConfigsLoad) {
  for (const auto& e : fs::recursive_directory_iterator(kSrc + "/configs")) {
    if (e.path().extension() != ".json" || e.path().filename() == "schema.json")
      continue;
    EXPECT_NO_THROW(load_config(e.path())) << e.path();
  }
}

TEST(Config, ParsesTinySleepRun) {
  const auto d = parse_config(tiny_json());
  EXPECT_EQ(d.n, 3u);
  EXPECT_EQ(d.mta.modes.size(), 2u);
  EXPECT_TRUE(d.mta.modes[0].service.up(1).is_infinite());
  EXPECT_EQ(d.mta.modes[0].buf_high, 1);
  EXPECT_EQ(d.granularities, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(d.engine.buffer_capacity, 32);
}

TEST(Config, RejectsBadInput) {
  auto with = [](auto edit) {
    auto j = tiny_json();
    edit(j);
    return j;
  };
  using J = nlohmann::json;
  EXPECT_THROW(parse_config(with([](J& j) { j["colour"] = 1; })), ConfigError);
  EXPECT_THROW(parse_config(with([](J& j) { j.erase("n"); })), ConfigError);
  EXPECT_THROW(parse_config(with([](J& j) { j["n"] = 5; })), ConfigError);
  EXPECT_THROW(parse_config(with([](J& j) { j["modes"][0]["transitions"][0]["kind"] = "jump"; })), ConfigError);
  EXPECT_THROW(parse_config(with([](J& j) { j["granularities"] = {2, 2}; })), ConfigError);
  EXPECT_THROW(parse_config(with([](J& j) { j["granularities"] = {4}; })), ConfigError);
  EXPECT_THROW(parse_config(with([](J& j) { j["engine"] = {{"state_budget", 0}}; })), ConfigError);
  EXPECT_THROW(parse_config(with([](J& j) { j["arrival"]["lower"][0] = 9; })), ConfigError);
  EXPECT_THROW(parse_config(with([](J& j) { j["initial"] = "off"; })), ConfigError);
  EXPECT_THROW(parse_config(with([](J& j) { j["oracle"] = {{"horizon", 10}, {"settle", 10}}; })), ConfigError);
  EXPECT_THROW(parse_config(J::array()), ConfigError);
  EXPECT_THROW(load_config(kSrc + "/configs/none.json"), ConfigError);
}

TEST(SamplingBound, ReportsBothSides) {
  Curve fine(bounds({1, 2, 3, 4}), bounds({3, 5, 7, 9}));
  EXPECT_TRUE(sampling_bound_check(fine, Curve(bounds({2, 4}), bounds({5, 9})), 2).empty());
  EXPECT_TRUE(sampling_bound_check(fine, Curve(bounds({1, 3}), bounds({6, 9})), 2).empty());
  EXPECT_EQ(sampling_bound_check(fine, Curve(bounds({3, 4}), bounds({4, 9})), 2).size(), 2u);
}

TEST(Analysis, TinyEndToEnd) {
  const auto d = load_config(kSrc + "/configs/tiny/timeout.json");
  const auto rep = run_analysis(d, {3, 1, 2});
  ASSERT_EQ(rep.results.size(), 3u);
  EXPECT_EQ(rep.results[0].g, 1u);
  EXPECT_EQ(rep.results[0].curve, Curve(bounds({1, 2, 3, 4}), bounds({6, 8, 9, 11})));
  EXPECT_TRUE(rep.sampling_checked);
  EXPECT_TRUE(rep.sampling_violations.empty());
  ASSERT_TRUE(rep.naive && rep.refined);
  EXPECT_EQ(rep.distances.size(), 2u);
  EXPECT_THROW(run_analysis(d, {5}), ConfigError);
}

TEST(Analysis, RefinementTightensUpperBound) {
  const auto d = load_config(kSrc + "/configs/sleep_run_refine.json");
  const auto rep = run_analysis(d, d.granularities);
  ASSERT_TRUE(rep.naive && rep.refined);
  EXPECT_EQ(rep.naive->upper, bounds({21, 21, 21, 21, 29, 29, 30, 30}));
  EXPECT_EQ(rep.refined->upper, bounds({20, 21, 21, 21, 29, 29, 30, 30}));
  EXPECT_EQ(rep.refined->lower, rep.naive->lower);
}

TEST(Report, DeterministicFiles) {
  const auto d = load_config(kSrc + "/configs/tiny/sync.json");
  const auto a = scratch("rep_a"), b = scratch("rep_b");
  write_report(run_analysis(d, {2, 3}), a);
  write_report(run_analysis(d, {2, 3}), b);
  for (const char* f : {"curve_g2.csv", "curve_g3.csv", "combined_naive.csv", "refined.csv", "report.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_FALSE(fs::exists(a / "distance.csv"));
}

TEST(Plot, StaircaseSvg) {
  const auto svg = plot_svg({{"a<b", Curve(bounds({1, 2}), {Bound(3), kUnbounded})}});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const auto out = scratch("cli");
  const std::string tiny = kSrc + "/configs/tiny/sleep_run.json";
  EXPECT_EQ(cli(""), 2);
  EXPECT_EQ(cli("analyze"), 2);
  EXPECT_EQ(cli("analyze --config " + kSrc + "/configs/none.json"), 2);
  EXPECT_EQ(cli("analyze --config " + tiny + " --fine --out " + (out / "a").string()), 0);
  EXPECT_TRUE(fs::exists(out / "a" / "curve_g1.csv"));
  EXPECT_TRUE(fs::exists(out / "a" / "distance.csv"));
  EXPECT_EQ(cli("analyze --config " + tiny + " --fine --state-budget 5 --out " + (out / "b").string()), 3);
  EXPECT_TRUE(fs::exists(out / "b" / "report.json"));
  EXPECT_EQ(cli("oracle --config " + tiny + " --out " + (out / "o").string()), 0);
  EXPECT_EQ(slurp(out / "o" / "oracle_curve.csv"), "k,xi_lower,xi_upper\n1,1,6\n2,2,7\n3,3,9\n");
  EXPECT_EQ(cli("oracle --config " + kSrc + "/configs/sleep_run_q5.json --out " + (out / "o2").string()), 5);

  write_file(out / "c1.csv", "k,xi_lower,xi_upper\n1,5,5\n2,5,6\n");
  write_file(out / "c2.csv", "k,xi_lower,xi_upper\n1,0,4\n");
  write_file(out / "bad.csv", "k,lo\n");
  EXPECT_EQ(cli("combine --input 1:" + (out / "c1.csv").string() + " --input 2:" + (out / "c2.csv").string() +
                " --out " + (out / "c").string()),
            4);
  EXPECT_EQ(cli("combine --input x:" + (out / "c2.csv").string()), 2);
  EXPECT_EQ(cli("combine --input 1:" + (out / "bad.csv").string()), 2);
  EXPECT_EQ(cli("sample --input " + (out / "a" / "curve_g1.csv").string() + " --granularity 4"), 2);
  EXPECT_EQ(cli("sample --input " + (out / "a" / "curve_g1.csv").string() + " --granularity 3 --out " +
                (out / "s.csv").string()),
            0);
  EXPECT_EQ(slurp(out / "s.csv"), "k,xi_lower,xi_upper\n1,3,9\n");
  EXPECT_EQ(cli("plot --input " + (out / "a" / "curve_g1.csv").string() + " --out " + (out / "p.svg").string()), 0);
  EXPECT_TRUE(fs::exists(out / "p.svg"));
}
