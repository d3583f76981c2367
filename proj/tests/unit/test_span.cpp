#include <gtest/gtest.h>

#include <random>

#include "mobkit/error.hpp"
#include "mobkit/span.hpp"

using namespace mobkit;

TEST(Span, DiscreteBasesCanonicalize) {
  Span<std::int32_t> closed(1, 3, true, true);
  Span<std::int32_t> half(1, 4, true, false);
  Span<std::int32_t> open(0, 4, false, false);
  EXPECT_EQ(closed, half);
  EXPECT_EQ(closed, open);
  EXPECT_EQ(closed.upper(), 4);
  EXPECT_EQ(closed.last(), 3);
  EXPECT_FALSE(closed.upper_inc());
}

TEST(Span, RejectsInvertedAndEmpty) {
  EXPECT_THROW(Span<double>(2.0, 1.0), InvalidValue);
  EXPECT_THROW(Span<double>(1.0, 1.0, true, false), InvalidValue);
  EXPECT_THROW(Span<std::int32_t>(1, 1, false, true), InvalidValue);
  EXPECT_NO_THROW(Span<double>::singleton(1.0));
}

TEST(Span, OverlapRespectsInclusivity) {
  Span<double> a(0, 1, true, false);
  Span<double> b(1, 2, true, true);
  EXPECT_FALSE(a.overlaps(b));
  EXPECT_TRUE(a.adjacent_before(b));
  EXPECT_TRUE(Span<double>(0, 1).overlaps(b));
}

TEST(SpanSet, MergesOverlappingAndAdjacent) {
  SpanSet<double> ss({Span<double>(3, 4), Span<double>(0, 1, true, false), Span<double>(1, 2),
                      Span<double>(1.5, 2.5, false, true)});
  ASSERT_EQ(ss.size(), 2u);
  EXPECT_EQ(ss.spans()[0], Span<double>(0, 2.5));
  EXPECT_EQ(ss.spans()[1], Span<double>(3, 4));
}

TEST(SpanSet, DiscreteAdjacencyMerges) {
  SpanSet<std::int32_t> ss({Span<std::int32_t>(1, 2), Span<std::int32_t>(3, 5)});
  ASSERT_EQ(ss.size(), 1u);
  EXPECT_EQ(ss.spans()[0], Span<std::int32_t>(1, 5));
}

TEST(SpanSet, NormalizationMatchesMembershipOracle) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coord(0, 60);
  std::bernoulli_distribution coin(0.5);
  for (int round = 0; round < 300; ++round) {
    std::vector<Span<double>> spans;
    int n = 1 + round % 6;
    for (int i = 0; i < n; ++i) {
      double lo = coord(rng) / 2.0;
      double hi = lo + coord(rng) / 4.0;
      bool li = coin(rng), ui = coin(rng);
      if (lo == hi) li = ui = true;
      spans.emplace_back(lo, hi, li, ui);
    }
    SpanSet<double> ss(spans);
    for (std::size_t i = 1; i < ss.size(); ++i) {
      EXPECT_FALSE(ss.spans()[i - 1].overlaps(ss.spans()[i]));
      EXPECT_FALSE(ss.spans()[i - 1].adjacent_before(ss.spans()[i]));
      EXPECT_LT(ss.spans()[i - 1].lower(), ss.spans()[i].lower());
    }
    // Quarter-step probes hit every bound and every gap midpoint.
    for (int k = -4; k <= 200; ++k) {
      double v = k / 8.0;
      bool expected = false;
      for (const auto& s : spans) expected = expected || s.contains(v);
      EXPECT_EQ(ss.contains(v), expected) << "probe " << v;
    }
  }
}

TEST(Set, SortsDeduplicatesAndRejectsEmpty) {
  Set<std::int32_t> s({3, 1, 3, 2});
  EXPECT_EQ(s.elements(), (std::vector<std::int32_t>{1, 2, 3}));
  EXPECT_THROW(Set<std::int32_t>({}), InvalidValue);
}

TEST(ShiftScale, TimestampSetLandsOnShiftedSpan) {
  Set<Timestamp> s({make_timestamp(2025, 1, 1), make_timestamp(2025, 1, 2), make_timestamp(2025, 1, 3)});
  auto out = shift_scale(s, Interval::days(1), Interval::hours(1));
  EXPECT_EQ(out.elements(), (std::vector<Timestamp>{make_timestamp(2025, 1, 2), make_timestamp(2025, 1, 2, 0, 30),
                                                    make_timestamp(2025, 1, 2, 1)}));
}

TEST(ShiftScale, ShiftOnlyAndScaleOnly) {
  Set<std::int32_t> s({1, 2, 4});
  EXPECT_EQ(shift_scale(s, 10, std::nullopt).elements(), (std::vector<std::int32_t>{11, 12, 14}));
  EXPECT_EQ(shift_scale(s, std::nullopt, 6).elements(), (std::vector<std::int32_t>{1, 3, 7}));
  EXPECT_THROW(shift_scale(s, std::nullopt, std::nullopt), InvalidValue);
  EXPECT_THROW(shift_scale(s, std::nullopt, 0), InvalidValue);
}

TEST(ShiftScale, PreservesRelativePositions) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int round = 0; round < 100; ++round) {
    std::vector<double> v(5);
    for (double& x : v) x = u(rng);
    Set<double> s(v);
    double shift = u(rng);
    double width = 1 + std::abs(u(rng));
    auto out = shift_scale(s, shift, width);
    ASSERT_EQ(out.size(), s.size());
    double span = s.back() - s.front();
    EXPECT_DOUBLE_EQ(out.front(), s.front() + shift);
    EXPECT_DOUBLE_EQ(out.back(), s.front() + shift + width);
    for (std::size_t i = 0; i < s.size(); ++i) {
      double rel_in = (s.elements()[i] - s.front()) / span;
      double rel_out = (out.elements()[i] - out.front()) / width;
      EXPECT_NEAR(rel_in, rel_out, 1e-9);
    }
  }
}

TEST(Casts, IntFloatRoundTrip) {
  Set<std::int32_t> ints({-3, 0, 7});
  EXPECT_EQ(floatset_to_intset(intset_to_floatset(ints)), ints);
  EXPECT_EQ(floatset_to_intset(Set<double>({1.5, 2.4})).elements(), (std::vector<std::int32_t>{2}));
  EXPECT_THROW(floatset_to_intset(Set<double>({1e12})), InvalidValue);
}

TEST(Casts, DateTimestamp) {
  Set<Date> d({make_date(2025, 1, 1), make_date(2025, 1, 3)});
  auto ts = dateset_to_tstzset(d);
  EXPECT_EQ(ts.front(), make_timestamp(2025, 1, 1));
  EXPECT_EQ(tstzset_to_dateset(ts), d);
}

TEST(SetEncoding, SizeMatchesLayout) {
  Set<std::int32_t> ints({1, 2, 3});
  EXPECT_EQ(set_mem_size(ints), 1u + 4u + 3u * 4u);
  EXPECT_EQ(encode_set(ints).size(), set_mem_size(ints));
  Set<std::string> text({"a", "bcd"});
  EXPECT_EQ(set_mem_size(text), 1u + 4u + (4u + 1u) + (4u + 3u));
  Set<Point> pts({Point{1, 1}, Point{2, 2}}, 4326);
  EXPECT_EQ(set_mem_size(pts), 1u + 4u + 4u + 2u * 16u);
  auto bytes = encode_set(pts);
  EXPECT_EQ(bytes.size(), set_mem_size(pts));
  EXPECT_EQ(bytes[0], 7);
}
