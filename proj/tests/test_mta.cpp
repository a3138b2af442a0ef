#include <gtest/gtest.h>

#include "gran/mta.hpp"
#include "support.hpp"

using namespace gran;
using gran::test::bounds;

namespace {

Mta sleep_run() {
  Mta m;
  Mode sleep{"sleep", Curve({kUnbounded}, {kUnbounded}), std::nullopt, 3, 0, std::nullopt,
             {{TransitionKind::BufferAbove, "run", ""}}};
  Mode run{"run", Curve(bounds({1}), bounds({2})), 1, std::nullopt, 0, std::nullopt,
           {{TransitionKind::BufferBelow, "sleep", ""}}};
  m.modes = {sleep, run};
  m.initial = "sleep";
  return m;
}

} // namespace

TEST(TransitionKind, RoundTripsNames) {
  for (auto k : {TransitionKind::Sync, TransitionKind::Timeout, TransitionKind::BufferAbove,
                 TransitionKind::BufferBelow})
    EXPECT_EQ(parse_transition_kind(to_string(k)), k);
  EXPECT_FALSE(parse_transition_kind("buffer"));
}

TEST(ValidateMta, AcceptsSleepRun) {
  const auto m = sleep_run();
  EXPECT_FALSE(validate_mta(m));
  EXPECT_EQ(m.initial_index(), 0u);
  EXPECT_EQ(m.target_index(m.modes[0].transitions[0]), 1u);
  EXPECT_NE(m.modes[1].find(TransitionKind::BufferBelow), nullptr);
  EXPECT_EQ(m.modes[1].find(TransitionKind::Timeout), nullptr);
}

TEST(ValidateMta, RejectsStructuralErrors) {
  auto m = sleep_run();
  m.initial = "off";
  EXPECT_TRUE(validate_mta(m));

  m = sleep_run();
  m.modes.push_back(m.modes[1]);
  EXPECT_NE(validate_mta(m)->find("duplicate"), std::string::npos);

  m = sleep_run();
  m.modes[0].transitions[0].target = "nowhere";
  EXPECT_TRUE(validate_mta(m));

  m = sleep_run();
  m.initial_backlog = -1;
  EXPECT_TRUE(validate_mta(m));

  EXPECT_TRUE(validate_mta(Mta{}));
}

TEST(ValidateMta, RejectsBadServiceAndBounds) {
  auto m = sleep_run();
  m.modes[1].service = Curve(bounds({3}), bounds({2}));
  EXPECT_TRUE(validate_mta(m));

  m = sleep_run();
  m.modes[1].buf_high = 0;
  EXPECT_TRUE(validate_mta(m));  // buf_low > buf_high

  m = sleep_run();
  m.modes[1].dwell_min = -1;
  EXPECT_TRUE(validate_mta(m));
}

TEST(ValidateMta, ThresholdsNeedMatchingTransitions) {
  auto m = sleep_run();
  m.modes[0].transitions.clear();
  EXPECT_NE(validate_mta(m)->find("buf_high"), std::string::npos);

  m = sleep_run();
  m.modes[1].dwell_max = 4;
  EXPECT_NE(validate_mta(m)->find("dwell_max"), std::string::npos);

  m = sleep_run();
  m.modes[1].transitions.push_back({TransitionKind::Timeout, "sleep", ""});
  EXPECT_NE(validate_mta(m)->find("timeout"), std::string::npos);

  m = sleep_run();
  m.modes[1].transitions.push_back({TransitionKind::BufferBelow, "run", ""});
  EXPECT_NE(validate_mta(m)->find("more than one"), std::string::npos);
}

TEST(ValidateMta, SyncChannelMustBeDeclared) {
  auto m = sleep_run();
  m.modes[0].transitions.push_back({TransitionKind::Sync, "run", "wake"});
  EXPECT_NE(validate_mta(m)->find("wake"), std::string::npos);
  m.channels = {"wake"};
  EXPECT_FALSE(validate_mta(m));
}

TEST(IntegerDivision, RoundsTowardInfinities) {
  EXPECT_EQ(floor_div(7, 2), 3);
  EXPECT_EQ(floor_div(-1, 3), -1);
  EXPECT_EQ(floor_div(-6, 3), -2);
  EXPECT_EQ(ceil_div(7, 2), 4);
  EXPECT_EQ(ceil_div(-1, 3), 0);
  EXPECT_EQ(ceil_div(6, 3), 2);
}

TEST(CoarseThresholds, BracketTheFineThreshold) {
  const auto t = coarse_thresholds(1, 4, 3);
  EXPECT_EQ(t.y_low, 1);
  EXPECT_EQ(t.y_high, 2);
  EXPECT_EQ(t.h_low, 0);
  EXPECT_EQ(t.h_high, 0);

  const auto u = coarse_thresholds(std::nullopt, 5, 2);
  EXPECT_EQ(u.y_low, 3);
  EXPECT_EQ(u.y_high, 3);
  EXPECT_FALSE(u.h_low);
  EXPECT_FALSE(u.h_high);

  const auto v = coarse_thresholds(0, std::nullopt, 3);
  EXPECT_EQ(v.h_low, -1);
  EXPECT_EQ(v.h_high, 0);
  EXPECT_FALSE(v.y_low);
}

TEST(CoarseThresholds, GranularityOneIsExact) {
  for (std::int64_t b = 0; b < 8; ++b) {
    const auto t = coarse_thresholds(b, b, 1);
    EXPECT_EQ(t.y_low, b + 1);
    EXPECT_EQ(t.y_high, b + 1);
    EXPECT_EQ(t.h_low, b - 1);
    EXPECT_EQ(t.h_high, b - 1);
  }
}
