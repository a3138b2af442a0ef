#include <gtest/gtest.h>

#include <random>

#include "gran/curves.hpp"
#include "gran/oracle.hpp"
#include "support.hpp"

using namespace gran;
using gran::test::bounds;

TEST(Bound, SaturatingArithmeticAndOrder) {
  EXPECT_EQ(Bound(3) + Bound(4), Bound(7));
  EXPECT_TRUE((Bound(3) + kUnbounded).is_infinite());
  EXPECT_LT(Bound(1'000'000'000), kUnbounded);
  EXPECT_EQ(kUnbounded.str(), "inf");
  EXPECT_THROW((void)kUnbounded.value(), std::logic_error);
}

TEST(Validate, AcceptsMonotoneOrderedCurve) {
  EXPECT_FALSE(validate(Curve(bounds({1, 2}), bounds({3, 5}))));
}

TEST(Validate, RejectsDecreasingLower) {
  auto v = validate(Curve(bounds({2, 1}), bounds({3, 5})));
  ASSERT_TRUE(v);
  EXPECT_EQ(v->index, 2u);
}

TEST(Validate, RejectsLowerAboveUpper) {
  auto v = validate(Curve(bounds({4}), bounds({3})));
  ASSERT_TRUE(v);
  EXPECT_EQ(v->index, 1u);
}

TEST(Validate, RejectsNegativeAndDecreasingUpper) {
  EXPECT_TRUE(validate(Curve(bounds({-1}), bounds({3}))));
  EXPECT_EQ(validate(Curve(bounds({0, 0}), {kUnbounded, Bound(4)}))->index, 2u);
}

TEST(Validate, UnboundedUpperIsFine) {
  EXPECT_FALSE(validate(Curve(bounds({1, 2}), {Bound(3), kUnbounded})));
}

TEST(PseudoInverse, UpperFromCountCurve) {
  EXPECT_EQ(pseudo_invert_upper({{0, 0, 1, 2, 3}}, 2), bounds({2, 3}));
  EXPECT_EQ(pseudo_invert_upper({{0, 1, 2, 3}}, 3), bounds({1, 2, 3}));
  EXPECT_EQ(pseudo_invert_upper({{0, 0, 0}}, 1), std::vector<Bound>{kUnbounded});
}

TEST(PseudoInverse, UpperIsNonDecreasing) {
  std::mt19937 rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<std::int64_t> v(12);
    for (auto& x : v)
      x = rng() % 6;
    std::sort(v.begin(), v.end());
    auto u = pseudo_invert_upper({v}, 6);
    EXPECT_TRUE(std::is_sorted(u.begin(), u.end()));
  }
}

TEST(PseudoInverse, LowerFromCountCurve) {
  // at most 1 event in windows up to length 2, 2 up to 4, then 3
  EXPECT_EQ(pseudo_invert_lower({{1, 1, 1, 2, 2, 3, 3}}, 2), bounds({2, 4}));
  EXPECT_EQ(pseudo_invert_lower({{1, 1}}, 1), std::vector<Bound>{kUnbounded});
}

TEST(Sample, PicksMultiplesOfG) {
  Curve c(bounds({1, 2, 3, 4, 5, 6}), bounds({10, 20, 30, 40, 50, 60}));
  EXPECT_EQ(sample(c, 3), Curve(bounds({3, 6}), bounds({30, 60})));
  EXPECT_EQ(sample(c, 1), c);
  EXPECT_EQ(sample(sample(c, 2), 3), sample(c, 6));
  EXPECT_EQ(sample(c, 4).size(), 1u);
}

TEST(Sample, RejectsBadGranularity) {
  Curve c(bounds({1, 2}), bounds({3, 4}));
  EXPECT_THROW(sample(c, 3), CurveError);
  EXPECT_THROW(sample(c, 0), CurveError);
}

TEST(Sample, PreservesValidity) {
  std::mt19937 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    auto c = test::random_curve(rng, 8, 20, 0.1);
    ASSERT_FALSE(validate(c));
    for (std::size_t g = 1; g <= 8; ++g)
      EXPECT_FALSE(validate(sample(c, g)));
  }
}

TEST(Closure, DeconvolutionExample) {
  const auto r = closure(Curve(bounds({0, 4, 9}), bounds({10, 10, 12})));
  EXPECT_EQ(r.up(1), Bound(8));
  EXPECT_EQ(r.lo(1), Bound(0));
}

TEST(Closure, ClosedCurveUnchanged) {
  Curve c(bounds({2, 4, 6}), bounds({3, 6, 9}));
  EXPECT_EQ(closure(c), c);
}

TEST(Closure, ContradictionIsEmpty) {
  EXPECT_THROW(closure(Curve(bounds({5, 5}), bounds({3, 10}))), EmptyCurveError);
  try {
    closure(Curve(bounds({2, 7}), bounds({3, 6})));
    FAIL();
  } catch (const EmptyCurveError& e) {
    EXPECT_GE(e.index, 1u);
  }
}

TEST(Closure, UnboundedUpperStaysSound) {
  const auto r = closure(Curve(bounds({1, 2, 3}), {Bound(2), kUnbounded, kUnbounded}));
  EXPECT_EQ(r.up(2), Bound(4));
  EXPECT_EQ(r.up(3), Bound(6));
}

TEST(Closure, TightensNeverLoosensAndIsIdempotent) {
  std::mt19937 rng(3);
  int checked = 0;
  for (int rep = 0; rep < 500; ++rep) {
    auto c = test::random_curve(rng, 6, 15, 0.2);
    Curve r;
    try {
      r = closure(c);
    } catch (const EmptyCurveError&) {
      continue;
    }
    ++checked;
    for (std::size_t k = 1; k <= c.size(); ++k) {
      EXPECT_GE(r.lo(k), c.lo(k));
      EXPECT_LE(r.up(k), c.up(k));
    }
    EXPECT_FALSE(validate(r));
    EXPECT_EQ(closure(r), r);
  }
  EXPECT_GT(checked, 100);
}

// Finite prefixes of a non-closed curve may be cut off by closure; the sets
// agree on prefixes that extend to infinite conforming streams.
TEST(Closure, PreservesExtendableStreams) {
  std::mt19937 rng(5);
  for (int rep = 0; rep < 40; ++rep) {
    auto c = test::random_curve(rng, 4, 6);
    Curve r;
    try {
      r = closure(c);
    } catch (const EmptyCurveError&) {
      continue;
    }
    const oracle::Viability vc(c), vr(r);
    for (std::size_t m = 1; m <= 6; ++m) {
      for (const auto& s : oracle::enumerate_conforming(c, m, 14))
        EXPECT_EQ(vc.extendable(s), conforms(s, r) && vr.extendable(s));
      for (const auto& s : oracle::enumerate_conforming(r, m, 14))
        EXPECT_TRUE(conforms(s, c));
    }
  }
}

TEST(Closure, FinitePrefixCanBeCutOff) {
  Curve c(bounds({0, 4, 9}), bounds({10, 10, 12}));
  EventStream s({0, 9});
  EXPECT_TRUE(conforms(s, c));
  EXPECT_FALSE(conforms(s, closure(c)));
  EXPECT_FALSE(oracle::Viability(c).extendable(s));
}

TEST(Combine, PaperStyleMonotoneBound) {
  // g=9 reaches 18 events within 108, g=10 reaches 20 within 111
  Curve c9(bounds({0, 0}), bounds({60, 108}));
  Curve c10(bounds({0, 0}), bounds({70, 111}));
  const auto naive = combine_naive({{9, c9}, {10, c10}});
  ASSERT_EQ(naive.size(), 20u);
  EXPECT_LE(naive.up(10), Bound(108));
  EXPECT_EQ(naive.up(18), Bound(108));
  EXPECT_EQ(naive.up(19), Bound(111));
  EXPECT_EQ(naive.up(9), Bound(60));
  EXPECT_EQ(naive.lo(8), Bound(0));
}

TEST(Combine, RescalesAndTakesBestPerIndex) {
  Curve a(bounds({2, 5, 9}), bounds({6, 11, 17}));  // g=2
  Curve b(bounds({4, 10}), bounds({8, 15}));        // g=3
  const auto naive = combine_naive({{2, a}, {3, b}});
  ASSERT_EQ(naive.size(), 6u);
  EXPECT_EQ(naive.lower, bounds({0, 2, 4, 5, 5, 10}));
  EXPECT_EQ(naive.upper, bounds({6, 6, 8, 11, 15, 15}));
  EXPECT_EQ(combine({{2, a}, {3, b}}), closure(naive));
}

TEST(Combine, SingleClosedEntryIsIdentity) {
  Curve c(bounds({2, 4, 6}), bounds({3, 6, 9}));
  EXPECT_EQ(combine({{1, c}}), c);
}

TEST(Combine, RejectsInvalidInput) {
  EXPECT_THROW(combine_naive({}), CurveError);
  EXPECT_THROW(combine_naive({{2, Curve(bounds({3}), bounds({2}))}}), CurveError);
  EXPECT_THROW(combine({{1, Curve(bounds({5, 5}), bounds({5, 6}))}, {2, Curve(bounds({0}), bounds({4}))}}),
               EmptyCurveError);
}

TEST(Distance, ZeroForSampledCurve) {
  Curve f(bounds({1, 2, 4, 5, 7, 8}), bounds({3, 5, 6, 9, 10, 12}));
  EXPECT_DOUBLE_EQ(distance(f, sample(f, 2), 2), 0.0);
  EXPECT_DOUBLE_EQ(distance(f, sample(f, 3), 3), 0.0);
}

TEST(Distance, MeanOfSideMeans) {
  Curve f(bounds({1, 2, 4, 5}), bounds({3, 5, 6, 9}));
  Curve c(bounds({0, 3}), bounds({9, 13}));  // lower gaps 2,2; upper gaps 4,4
  EXPECT_DOUBLE_EQ(distance(f, c, 2), 3.0);
  Curve d(bounds({2, 5}), bounds({5, 9}));
  EXPECT_DOUBLE_EQ(distance(f, d, 2), 0.0);
}

TEST(Distance, RejectsIncompatibleLengths) {
  Curve f(bounds({1, 2}), bounds({3, 5}));
  EXPECT_THROW(distance(f, f, 2), CurveError);
  EXPECT_THROW(distance(f, Curve(bounds({0}), {kUnbounded}), 2), CurveError);
}

TEST(Csv, RoundTrip) {
  Curve c(bounds({0, 3, 7}), {Bound(4), Bound(9), kUnbounded});
  const auto text = to_csv(c);
  EXPECT_EQ(text, "k,xi_lower,xi_upper\n1,0,4\n2,3,9\n3,7,inf\n");
  EXPECT_EQ(from_csv(text), c);
}

TEST(Csv, RejectsMalformed) {
  EXPECT_THROW(from_csv("k,lo,up\n1,0,1\n"), CurveError);
  EXPECT_THROW(from_csv("k,xi_lower,xi_upper\n2,0,1\n"), CurveError);
  EXPECT_THROW(from_csv("k,xi_lower,xi_upper\n1,x,1\n"), CurveError);
  EXPECT_THROW(from_csv("k,xi_lower,xi_upper\n1,0\n"), CurveError);
}
