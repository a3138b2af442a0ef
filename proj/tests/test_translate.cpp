#include <gtest/gtest.h>

#include <random>

#include "gran/engine.hpp"
#include "gran/oracle.hpp"
#include "gran/pipeline.hpp"
#include "support.hpp"

using namespace gran;
using gran::test::bounds;

namespace {

std::set<std::vector<std::int64_t>> generator_traces(const Curve& c, std::int64_t horizon, std::size_t events) {
  ta::Network net({build_generator(c, "e"), build_tap("e")});
  return explore_traces(net, "tap", horizon, events, TraceCollect::OnEvent);
}

std::set<std::vector<std::int64_t>> enumerated(const Curve& c, std::int64_t horizon, std::size_t events) {
  std::set<std::vector<std::int64_t>> out;
  for (std::size_t m = 1; m <= events + 1; ++m)
    for (const auto& s : oracle::enumerate_conforming(c, m, horizon))
      out.insert(s.times);
  return out;
}

std::int64_t observed(std::vector<ta::Automaton> sys, ObserverSpec spec) {
  const auto r = detail::observe(sys, spec, EngineOptions{});
  EXPECT_EQ(r.status, SearchStatus::Reached);
  return r.cost;
}

} // namespace

TEST(Generator, EmitsExactlyTheConformingStreams) {
  Curve c(bounds({1, 3, 5}), bounds({2, 4, 6}));
  const auto got = generator_traces(c, 8, 4);
  EXPECT_EQ(got, enumerated(c, 8, 4));
  EXPECT_TRUE(got.count({0, 1, 3, 5}));
  EXPECT_TRUE(got.count({0, 2, 4, 6, 8}));
  EXPECT_FALSE(got.count({0, 1, 2}));
}

TEST(Generator, ExactOnRandomSmallCurves) {
  std::mt19937 rng(21);
  for (int rep = 0; rep < 25; ++rep) {
    const auto n = 1 + rng() % 3;
    const auto c = test::random_curve(rng, n, 4, 0.2);
    EXPECT_EQ(generator_traces(c, 7, 4), enumerated(c, 7, 4)) << to_csv(c);
  }
}

TEST(Generator, RejectsInvalidCurves) {
  EXPECT_THROW(build_generator(Curve(), "e"), CurveError);
  EXPECT_THROW(build_generator(Curve(bounds({3}), bounds({2})), "e"), CurveError);
}

TEST(Script, EmitsAtTheGivenInstants) {
  ta::Network net({build_script({0, 2, 3, 7}, "e"), build_tap("e")});
  const auto got = explore_traces(net, "tap", 10, 5, TraceCollect::AtHorizon);
  EXPECT_EQ(got, (std::set<std::vector<std::int64_t>>{{0, 2, 3, 7}}));
}

TEST(Observer, WindowMinOnScript) {
  const std::vector<std::int64_t> t{0, 2, 3, 7, 8};
  EXPECT_EQ(observed({build_script(t, kProduce)}, {ObserverVariant::WindowMin, 1}), 1);
  EXPECT_EQ(observed({build_script(t, kProduce)}, {ObserverVariant::WindowMin, 2}), 3);
  EXPECT_EQ(observed({build_script(t, kProduce)}, {ObserverVariant::WindowMin, 4}), 8);
  EXPECT_EQ(observed({build_script(t, kProduce)}, {ObserverVariant::WindowMin, 0}), 0);
}

TEST(Observer, CountMinOnPeriodicStream) {
  const Curve period2(bounds({2, 4, 6}), bounds({2, 4, 6}));
  auto sys = [&] { return std::vector<ta::Automaton>{build_generator(period2, kProduce)}; };
  // windows opened right after an event; an event on the closing edge may be dropped
  EXPECT_EQ(observed(sys(), {ObserverVariant::CountMin, 5}), 2);
  EXPECT_EQ(observed(sys(), {ObserverVariant::CountMin, 4}), 1);
  EXPECT_EQ(observed(sys(), {ObserverVariant::CountMin, 2}), 0);
  EXPECT_EQ(observed(sys(), {ObserverVariant::CountMin, 3}), 1);
}

TEST(Observer, CountMinSeesSparseGaps) {
  // the gap 3..7 holds no event strictly inside a window of length 4
  EXPECT_EQ(observed({build_script({0, 2, 3, 7, 8, 9, 10}, kProduce)}, {ObserverVariant::CountMin, 4}), 0);
  const Curve period1(bounds({1, 2, 3}), bounds({1, 2, 3}));
  EXPECT_EQ(observed({build_generator(period1, kProduce)}, {ObserverVariant::CountMin, 3}), 2);
}

TEST(Observer, RejectsBadParameters) {
  EXPECT_THROW(build_observer({ObserverVariant::WindowMin, -1}), ta::ModelError);
  EXPECT_THROW(build_observer({ObserverVariant::CountMin, 0}), ta::ModelError);
}

class TinySystems : public ::testing::TestWithParam<const char*> {
protected:
  SystemDescription load() const { return load_config(std::string(GRAN_SOURCE_DIR "/configs/tiny/") + GetParam()); }
};

TEST_P(TinySystems, FineModelMatchesSimulatorTraces) {
  const auto d = load();
  auto sys = system_for(d, 1);
  sys.push_back(build_tap(kProduce));
  const ta::Network net(std::move(sys));
  const std::int64_t H = 10;
  EXPECT_EQ(explore_traces(net, "tap", H, 64, TraceCollect::AtHorizon), oracle::output_traces(oracle_model(d), H));
}

TEST_P(TinySystems, CoarseModelsBuild) {
  const auto d = load();
  for (std::size_t g : {2, 3}) {
    const auto comp = build_coarse(d.mta, g, 32);
    EXPECT_TRUE(comp.pe.location_index("S0"));
    EXPECT_TRUE(comp.sm.location_index("T0"));
    const ta::Network net(system_for(d, g));
    EXPECT_TRUE(net.caps_sound());
    EXPECT_NO_THROW(net.initial());
  }
}

INSTANTIATE_TEST_SUITE_P(Configs, TinySystems, ::testing::Values("sleep_run.json", "timeout.json", "sync.json"),
                         [](const auto& info) {
                           std::string s = info.param;
                           return s.substr(0, s.find('.'));
                         });

TEST(BuildModels, FineHasHubsAndBands) {
  const auto d = load_config(GRAN_SOURCE_DIR "/configs/tiny/sleep_run.json");
  const auto fine = build_fine(d.mta, 32);
  EXPECT_TRUE(fine.pe.location_index("S0"));
  EXPECT_TRUE(fine.pe.location_index("S01"));
  EXPECT_TRUE(fine.pe.location_index("C0_1"));
  EXPECT_TRUE(fine.pe.location_index("C1_0"));
  EXPECT_FALSE(fine.pe.location_index("C0_0"));
  EXPECT_TRUE(fine.sm.location_index("G0"));
  const auto coarse = build_coarse(d.mta, 2, 32);
  EXPECT_TRUE(coarse.pe.location_index("S0inc") || coarse.pe.location_index("S1inc"));
}

TEST(BuildModels, RejectsInvalidInput) {
  auto d = load_config(GRAN_SOURCE_DIR "/configs/tiny/sleep_run.json");
  EXPECT_THROW(build_coarse(d.mta, 4, 32), ta::ModelError);
  EXPECT_THROW(build_coarse(d.mta, 0, 32), ta::ModelError);
  d.mta.initial = "nowhere";
  EXPECT_THROW(build_fine(d.mta, 32), ta::ModelError);
}

TEST(BuildModels, SystemLayout) {
  const auto d = load_config(GRAN_SOURCE_DIR "/configs/tiny/sync.json");
  const auto sys = system_for(d, 2);
  ASSERT_EQ(sys.size(), 4u);
  EXPECT_EQ(sys[0].name, "input");
  EXPECT_EQ(sys[1].name, "pe");
  EXPECT_EQ(sys[3].name, "env.wake");
}
