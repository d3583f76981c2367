#include <gtest/gtest.h>

#include "generators.hpp"
#include "mobkit/error.hpp"
#include "mobkit/tgeo.hpp"
#include "mobkit/text_io.hpp"
#include "oracles.hpp"

using namespace mobkit;

namespace {

Timestamp sec(double s) { return make_timestamp(2025, 1, 1) + Interval{static_cast<std::int64_t>(s * 1e6)}; }

TGeomPoint path(std::vector<std::tuple<double, double, double>> pts, Interp interp = Interp::linear) {
  std::vector<TInstant<Point>> in;
  for (auto [x, y, s] : pts) in.push_back({Point{x, y}, sec(s)});
  return TGeomPoint(TSequence<Point>(in, interp));
}

std::string wkt(const Geometry& g) { return geometry_to_wkt(g); }

}  // namespace

TEST(TGeo, ConstantStepGeometry) {
  auto tp = tgeometry_from(parse_geometry("Point(1 1)"),
                           parse("[2025-01-01, 2025-01-02]", TypeTag::tstzspan).as<Span<Timestamp>>(), Interp::step);
  EXPECT_EQ(serialize_ewkt(Literal{TypeTag::tgeometry, tp}),
            "[POINT(1 1)@2025-01-01 00:00:00+00, POINT(1 1)@2025-01-02 00:00:00+00]");
  auto single = tgeometry_from(parse_geometry("SRID=4326;Point(1 1)"),
                               Span<Timestamp>::singleton(sec(0)), Interp::linear);
  EXPECT_EQ(serialize_ewkt(Literal{TypeTag::tgeompoint, single}), "SRID=4326;POINT(1 1)@2025-01-01 00:00:00+00");
  EXPECT_THROW(tgeometry_from(parse_geometry("LINESTRING(0 0,1 1)"), Span<Timestamp>::singleton(sec(0)), Interp::step),
               InvalidValue);
}

TEST(TGeo, OverlapsFarBoxIsFalse) {
  auto tp = parse(
                "{[Point(1 1)@2025-01-01, Point(2 2)@2025-01-02, Point(1 1)@2025-01-03],"
                "[Point(3 3)@2025-01-04, Point(3 3)@2025-01-05]}",
                TypeTag::tgeompoint)
                .as<TGeomPoint>();
  EXPECT_FALSE(overlaps(tp, parse("STBOX X((10.0,20.0),(10.0,20.0))", TypeTag::stbox).as<STBox>()));
  EXPECT_TRUE(overlaps(tp, parse("STBOX X((2.5,2.5),(3,3))", TypeTag::stbox).as<STBox>()));
}

TEST(TGeo, Trajectory) {
  EXPECT_EQ(wkt(trajectory(path({{0, 0, 0}, {1, 0, 1}, {1, 0, 2}, {1, 1, 3}}))), "LINESTRING(0 0,1 0,1 1)");
  EXPECT_EQ(wkt(trajectory(path({{2, 2, 0}, {2, 2, 1}}))), "POINT(2 2)");
  EXPECT_EQ(wkt(trajectory(path({{0, 0, 0}, {1, 1, 1}, {0, 0, 2}}, Interp::step))), "MULTIPOINT(0 0,1 1)");
  auto multi = parse("{[Point(0 0)@2025-01-01, Point(1 1)@2025-01-02], [Point(5 5)@2025-01-03, Point(6 5)@2025-01-04]}",
                     TypeTag::tgeompoint)
                   .as<TGeomPoint>();
  EXPECT_EQ(wkt(trajectory(multi)), "MULTILINESTRING((0 0,1 1),(5 5,6 5))");
}

TEST(TGeo, Length) {
  EXPECT_DOUBLE_EQ(length(path({{0, 0, 0}, {3, 4, 1}, {3, 0, 2}})), 9);
  EXPECT_DOUBLE_EQ(length(path({{0, 0, 0}, {3, 4, 1}}, Interp::step)), 0);
}

TEST(TGeo, AtGeometryClipsCrossingSegment) {
  Geometry square(testkit::Gen::square({0.5, 0.5}, 0.5));
  auto tp = path({{-1, 0.5, 0}, {2, 0.5, 3}});
  auto r = at_geometry(tp, square);
  ASSERT_TRUE(r);
  EXPECT_EQ(start_timestamp(*r), sec(1));
  EXPECT_EQ(end_timestamp(*r), sec(2));
  EXPECT_NEAR(length(*r), 1, 1e-9);
  EXPECT_FALSE(at_geometry(path({{5, 5, 0}, {6, 6, 1}}), square));
  EXPECT_THROW(at_geometry(tp, Geometry(Point{0, 0})), InvalidValue);
}

TEST(TGeo, AtGeometryTouchingCornerIsInstant) {
  Geometry square(testkit::Gen::square({0.5, 0.5}, 0.5));
  auto r = at_geometry(path({{-1, 1, 0}, {1, -1, 2}}), square);
  ASSERT_TRUE(r);
  EXPECT_EQ(start_timestamp(*r), sec(1));
  EXPECT_EQ(end_timestamp(*r), sec(1));
}

TEST(TGeo, AtGeometryAgreesWithSampling) {
  testkit::Gen gen(21);
  int checked = 0, disagree = 0;
  for (int round = 0; round < 100; ++round) {
    std::vector<std::tuple<double, double, double>> pts;
    int n = gen.integer(2, 8);
    for (int i = 0; i < n; ++i) pts.emplace_back(gen.real(-10, 10), gen.real(-10, 10), i * 10.0);
    auto tp = path(pts);
    Polygon poly = testkit::Gen::square({gen.real(-5, 5), gen.real(-5, 5)}, gen.real(1, 6));
    auto r = at_geometry(tp, Geometry(poly));
    if (r) {
      EXPECT_LE(length(*r), length(tp) + 1e-9);
    }
    for (int k = 0; k <= 1000; ++k) {
      Timestamp t = sec((n - 1) * 10.0 * k / 1000);
      Point p = *oracle::sample(tp, t);
      bool in = oracle::inside(p, poly);
      bool got = r && oracle::sample(*r, t).has_value();
      ++checked;
      if (in != got) ++disagree;
    }
  }
  EXPECT_LE(disagree, checked / 1000);
}

TEST(TGeo, TDwithinApproachAndLeave) {
  auto a = path({{0, 0, 0}, {10, 0, 10}});
  auto b = path({{5, 0, 0}, {5, 0, 10}});
  auto tb = t_dwithin(a, b, 1.0);
  ASSERT_TRUE(tb);
  auto w = when_true(*tb);
  ASSERT_TRUE(w);
  ASSERT_EQ(w->size(), 1u);
  EXPECT_EQ(w->spans()[0], Span<Timestamp>(sec(4), sec(6)));
  EXPECT_TRUE(e_dwithin(a, b, 1.0));
  EXPECT_FALSE(e_dwithin(a, path({{5, 3, 0}, {5, 3, 10}}), 1.0));
}

TEST(TGeo, TDwithinParallelAndIdentical) {
  auto a = path({{0, 0, 0}, {10, 0, 10}});
  auto far = path({{0, 6, 0}, {10, 6, 10}});
  auto tb = t_dwithin(a, far, 3.0);
  ASSERT_TRUE(tb);
  EXPECT_FALSE(when_true(*tb));
  EXPECT_EQ(to_tstzspan(*tb), Span<Timestamp>(sec(0), sec(10)));
  auto same = t_dwithin(a, a, 3.0);
  ASSERT_TRUE(same);
  EXPECT_EQ(*when_true(*same), SpanSet<Timestamp>({Span<Timestamp>(sec(0), sec(10))}));
  EXPECT_FALSE(t_dwithin(a, path({{0, 0, 20}, {1, 1, 30}}), 3.0));
  EXPECT_THROW(t_dwithin(a, a, -1), InvalidValue);
  EXPECT_THROW(t_dwithin(a, a.with_srid(4326), 1), SridMismatch);
}

TEST(TGeo, TDwithinStepAgainstLinear) {
  // The step point jumps away at t=5 while the linear point is still close.
  auto step = path({{0, 0, 0}, {100, 0, 5}, {100, 0, 10}}, Interp::step);
  auto lin = path({{-2, 0, 0}, {8, 0, 10}});
  auto w = when_true(*t_dwithin(step, lin, 3.0));
  ASSERT_TRUE(w);
  ASSERT_EQ(w->size(), 1u);
  EXPECT_EQ(w->spans()[0], Span<Timestamp>(sec(0), sec(5), true, false));
}

TEST(TGeo, TDwithinGrazingInstant) {
  auto a = path({{0, 0, 0}, {10, 0, 10}});
  auto b = path({{5, 2, 0}, {5, 2, 10}});
  auto tb = t_dwithin(a, b, 2.0);
  auto w = when_true(*tb);
  ASSERT_TRUE(w);
  EXPECT_EQ(*w, SpanSet<Timestamp>({Span<Timestamp>::singleton(sec(5))}));
}

TEST(TGeo, TDwithinMatchesDenseSampling) {
  testkit::Gen gen(33);
  for (int round = 0; round < 100; ++round) {
    auto mk = [&] {
      std::vector<std::tuple<double, double, double>> pts;
      int n = gen.integer(2, 6);
      double t = gen.real(0, 5);
      for (int i = 0; i < n; ++i) {
        pts.emplace_back(gen.real(-10, 10), gen.real(-10, 10), t);
        t += gen.real(1, 10);
      }
      return path(pts, gen.coin(0.8) ? Interp::linear : Interp::step);
    };
    auto a = mk();
    auto b = mk();
    double d = gen.real(0.5, 6);
    auto tb = t_dwithin(a, b, d);
    auto sync = synchronize(a, b);
    ASSERT_EQ(tb.has_value(), sync.has_value());
    if (!tb) continue;
    auto w = when_true(*tb);
    Span<Timestamp> dom = to_tstzspan(*tb);
    for (int k = 0; k <= 2000; ++k) {
      Timestamp t{dom.lower().micros + (dom.upper().micros - dom.lower().micros) * k / 2000};
      auto pa = oracle::sample(a, t);
      auto pb = oracle::sample(b, t);
      if (!pa || !pb) continue;
      double dist = std::hypot(pa->x - pb->x, pa->y - pb->y);
      bool truth = dist <= d;
      bool got = w && w->contains(t);
      if (truth != got) {
        // Only tolerated right at a crossing: within a microsecond either side the answer flips.
        bool near_root = false;
        for (std::int64_t dt : {-1, 1}) {
          Timestamp u{t.micros + dt};
          auto qa = oracle::sample(a, u), qb = oracle::sample(b, u);
          if (qa && qb && (std::hypot(qa->x - qb->x, qa->y - qb->y) <= d) != truth) near_root = true;
        }
        EXPECT_TRUE(near_root) << "round " << round << " t=" << format_timestamp(t) << " dist=" << dist;
      }
    }
  }
}
