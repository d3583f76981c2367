#include <gtest/gtest.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "generators.hpp"
#include "mobkit/text_io.hpp"
#include "mobkit/workbench/eval.hpp"
#include "mobkit/workbench/geojson.hpp"
#include "mobkit/workbench/queries.hpp"
#include "mobkit/workbench/tables.hpp"
#include "query_checks.hpp"

using namespace mobkit;
using namespace mobkit::workbench;

namespace {

Timestamp sec(double s) { return make_timestamp(2025, 1, 1) + Interval{static_cast<std::int64_t>(s * 1e6)}; }

TripRow trip_row(std::int64_t vehicle, std::int64_t trip, std::vector<std::tuple<double, double, double>> pts) {
  std::vector<TInstant<Point>> in;
  for (auto [x, y, s] : pts) in.push_back({Point{x, y}, sec(s)});
  TGeomPoint tp(TSequence<Point>(in, Interp::linear));
  return {vehicle, trip, tp, trajectory(tp)};
}

std::size_t instant_count(const std::vector<TripRow>& trips) {
  std::size_t n = 0;
  for (const auto& t : trips) n += std::get<TSequence<Point>>(t.trip.rep()).instants().size();
  return n;
}

Geometry square(double x0, double y0, double x1, double y1) {
  return Geometry(Polygon{{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}}});
}

}  // namespace

// ---------------------------------------------------------------- ingest

TEST(Ingest, TwoObservationsMakeOneTrip) {
  std::istringstream in(
      "vehicle_id,trip_id,x,y,t\n"
      "1,1,0,0,2025-01-01 00:00:00\n"
      "1,1,3,4,2025-01-01 00:00:10\n");
  auto rows = ingest_trips(in);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(serialize(Literal{TypeTag::tgeompoint, rows[0].trip}),
            "[POINT(0 0)@2025-01-01 00:00:00+00, POINT(3 4)@2025-01-01 00:00:10+00]");
  EXPECT_DOUBLE_EQ(length(rows[0].trip), 5.0);
}

TEST(Ingest, RowOrderDoesNotMatter) {
  std::string header = "vehicle_id,trip_id,x,y,t\n";
  std::istringstream sorted(header +
                            "1,1,0,0,2025-01-01 00:00:00\n1,1,1,0,2025-01-01 00:00:01\n"
                            "1,1,2,0,2025-01-01 00:00:02\n2,7,5,5,2025-01-01 00:00:00\n");
  std::istringstream shuffled(header +
                              "1,1,2,0,2025-01-01 00:00:02\n2,7,5,5,2025-01-01 00:00:00\n"
                              "1,1,0,0,2025-01-01 00:00:00\n1,1,1,0,2025-01-01 00:00:01\n");
  auto a = ingest_trips(sorted);
  auto b = ingest_trips(shuffled);
  ASSERT_EQ(a.size(), 2u);
  ASSERT_EQ(b.size(), 2u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].vehicle_id, b[i].vehicle_id);
    EXPECT_EQ(a[i].trip_id, b[i].trip_id);
    EXPECT_EQ(a[i].trip, b[i].trip);
  }
}

TEST(Ingest, DuplicateTimestampIsRejectedWithLine) {
  std::istringstream in(
      "vehicle_id,trip_id,x,y,t\n"
      "1,1,0,0,2025-01-01 00:00:00\n"
      "1,1,1,1,2025-01-01 00:00:05\n"
      "1,1,2,2,2025-01-01 00:00:00\n");
  try {
    ingest_trips(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(Ingest, MalformedRowsReportLine) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      ingest_trips(in);
    } catch (const DataError& e) {
      return e.line();
    }
    return 0;
  };
  std::string header = "vehicle_id,trip_id,x,y,t\n";
  EXPECT_EQ(line_of(header + "1,1,0,0,2025-01-01\n1,1,abc,0,2025-01-02\n"), 3u);
  EXPECT_EQ(line_of(header + "1,1,0,0\n"), 2u);
  EXPECT_EQ(line_of(header + "1,1,0,0,yesterday\n"), 2u);
  EXPECT_EQ(line_of("vehicle,trip,x,y,t\n"), 1u);
  std::istringstream empty("");
  EXPECT_THROW(ingest_trips(empty), DataError);
}

TEST(Ingest, GeneratedObservationsRoundTrip) {
  auto db = generate_trips({});
  ASSERT_EQ(db.trips.size(), 50u);
  std::stringstream buf;
  write_observations(buf, db.trips);
  auto back = ingest_trips(buf);
  ASSERT_EQ(back.size(), 50u);
  EXPECT_EQ(instant_count(back), instant_count(db.trips));
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i].trip, db.trips[i].trip);
}

TEST(Ingest, SamplesKeepTenLowestIds) {
  std::string text = "point_id,x,y\n";
  for (int i = 15; i >= 1; --i) text += std::to_string(i) + "," + std::to_string(i) + ",0\n";
  std::istringstream in(text);
  auto pts = ingest_points(in);
  ASSERT_EQ(pts.size(), 10u);
  EXPECT_EQ(pts.front().point_id, 1);
  EXPECT_EQ(pts.back().point_id, 10);
}

TEST(Synthetic, GeneratorIsDeterministic) {
  auto a = generate_trips({});
  auto b = generate_trips({});
  ASSERT_EQ(a.trips.size(), b.trips.size());
  for (std::size_t i = 0; i < a.trips.size(); ++i) EXPECT_EQ(a.trips[i].trip, b.trips[i].trip);
  EXPECT_EQ(a.vehicles.size(), 20u);
  EXPECT_EQ(a.licenses1.size(), 10u);
  EXPECT_EQ(a.licenses2.size(), 10u);
  EXPECT_EQ(a.instants1.size(), 10u);
  EXPECT_EQ(a.points1.size(), 10u);
  auto c = generate_trips({.seed = 2});
  EXPECT_NE(a.trips[0].trip, c.trips[0].trip);
}

TEST(Synthetic, BoxGenerator) {
  auto rows = generate_boxes(3);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(serialize(Literal{TypeTag::stbox, rows[0].box}), "STBOX X((1,1),(1.5,1.5))");
  EXPECT_EQ(format_timestamp(rows[0].times), "2025-08-11 12:01:00+00");
  EXPECT_EQ(format_timestamp(rows[2].times), "2025-08-11 12:03:00+00");
}

TEST(Workspace, SaveAndLoad) {
  auto db = generate_trips({.vehicles = 6, .trips = 12});
  db.boxes = generate_boxes(20);
  db.build_trip_index();
  auto dir = std::filesystem::temp_directory_path() / "mobkit_workspace_test";
  std::filesystem::remove_all(dir);
  save_database(db, dir);
  auto back = load_database(dir);
  std::filesystem::remove_all(dir);
  ASSERT_EQ(back.trips.size(), db.trips.size());
  for (std::size_t i = 0; i < db.trips.size(); ++i) EXPECT_EQ(back.trips[i].trip, db.trips[i].trip);
  EXPECT_EQ(back.vehicles.size(), db.vehicles.size());
  EXPECT_EQ(back.regions.size(), db.regions.size());
  EXPECT_EQ(back.boxes.size(), 20u);
  EXPECT_TRUE(back.trip_index.has_value());
  EXPECT_FALSE(back.box_index.has_value());
  EXPECT_THROW(load_database(dir / "missing"), DataError);
}

// ---------------------------------------------------------------- queries

TEST(Queries, IdenticalVehiclesMeetForWholeTrip) {
  Database db;
  db.trips.push_back(trip_row(1, 1, {{0, 0, 0}, {10, 0, 10}}));
  db.trips.push_back(trip_row(2, 1, {{0, 0, 0}, {10, 0, 10}}));
  db.vehicles = {{1, "A-1", "passenger"}, {2, "A-2", "passenger"}};
  db.licenses1 = {{1, "A-1", 1}};
  auto rs = run_query(QueryId::q10, db).result;
  ASSERT_EQ(rs.rows.size(), 1u);
  EXPECT_EQ(std::get<std::int64_t>(rs.rows[0][1]), 2);
  EXPECT_EQ(std::get<SpanSet<Timestamp>>(rs.rows[0][2]), SpanSet<Timestamp>({Span<Timestamp>(sec(0), sec(10))}));
}

TEST(Queries, InstantOutsideTripsGivesNoRow) {
  Database db;
  db.trips.push_back(trip_row(1, 1, {{0, 0, 0}, {10, 0, 10}}));
  db.licenses1 = {{1, "A-1", 1}};
  db.instants1 = {{1, sec(100)}, {2, sec(5)}};
  auto rs = run_query(QueryId::q3, db).result;
  ASSERT_EQ(rs.rows.size(), 1u);
  EXPECT_EQ(std::get<std::int64_t>(rs.rows[0][1]), 2);
  EXPECT_EQ(cell_text(rs.rows[0][3]), "POINT(5 0)");
}

TEST(Queries, MissingTablesAndIndex) {
  Database db;
  EXPECT_THROW(run_query(QueryId::q3, db), DataError);
  db.trips.push_back(trip_row(1, 1, {{0, 0, 0}, {10, 0, 10}}));
  EXPECT_THROW(run_query(QueryId::q3, db), DataError);
  db.licenses1 = {{1, "A-1", 1}};
  db.instants1 = {{1, sec(5)}};
  EXPECT_THROW(run_query(QueryId::q3, db, {.use_index = true}), DataError);
  EXPECT_NO_THROW(run_query(QueryId::q3, db));
}

TEST(Queries, ReportsVariantAndWorkers) {
  auto db = generate_trips({});
  db.build_trip_index();
  auto r = run_query(QueryId::q7, db, {.use_index = true, .workers = 3});
  EXPECT_EQ(r.report.query_id, "Q7");
  EXPECT_EQ(r.report.variant, "indexed");
  EXPECT_EQ(r.report.workers, 3u);
  EXPECT_EQ(r.report.rows, r.result.rows.size());
  EXPECT_EQ(run_query(QueryId::q5, db).report.variant, "naive");
  EXPECT_EQ(run_query(QueryId::q5opt, db).report.variant, "optimized");
  EXPECT_EQ(query_from_name("q5OPT"), QueryId::q5opt);
  EXPECT_FALSE(query_from_name("Q4"));
}

TEST(Queries, SeqIndexedAndWorkersAgree) {
  auto db = generate_trips({});
  db.build_trip_index(4);
  for (QueryId id : {QueryId::q3, QueryId::q7, QueryId::q10}) {
    auto seq = run_query(id, db).result;
    EXPECT_EQ(seq, run_query(id, db, {.use_index = true}).result) << query_name(id);
    EXPECT_EQ(seq, run_query(id, db, {.use_index = true, .workers = 4}).result) << query_name(id);
    EXPECT_EQ(seq, run_query(id, db, {.workers = 3}).result) << query_name(id);
    EXPECT_EQ(seq, run_query(id, db).result) << query_name(id);
  }
}

TEST(Queries, MatchBruteForce) {
  auto db = generate_trips({});
  EXPECT_EQ(oracle::check_q3(run_query(QueryId::q3, db).result, oracle::q3(db)), "");
  auto q5 = oracle::q5(db);
  EXPECT_EQ(oracle::check_q5(run_query(QueryId::q5, db).result, q5, 1e-9), "");
  EXPECT_EQ(oracle::check_q5(run_query(QueryId::q5opt, db).result, q5, 1e-9), "");
  EXPECT_EQ(oracle::check_q7(run_query(QueryId::q7, db).result, oracle::q7(db)), "");
  EXPECT_EQ(oracle::check_q10(run_query(QueryId::q10, db).result, oracle::q10(db)), "");
}

TEST(Queries, CsvQuotesSeparators) {
  ResultSet rs{{"a", "b"}, {{std::string("x,y"), std::int64_t{3}}, {std::string("q\"t"), std::monostate{}}}};
  std::ostringstream out;
  write_csv(out, rs);
  EXPECT_EQ(out.str(), "a,b\n\"x,y\",3\n\"q\"\"t\",NULL\n");
}

// ---------------------------------------------------------------- region report

TEST(RegionReport, TripInsideOneRegion) {
  Database db;
  db.trips.push_back(trip_row(1, 1, {{10, 10, 0}, {1510, 10, 100}}));
  db.regions = {{"inside", square(0, 0, 2000, 100)}, {"elsewhere", square(5000, 5000, 6000, 6000)}};
  auto rs = region_report(db);
  ASSERT_EQ(rs.rows.size(), 1u);
  EXPECT_EQ(std::get<std::string>(rs.rows[0][0]), "inside");
  EXPECT_DOUBLE_EQ(std::get<double>(rs.rows[0][1]), 1.5);
}

TEST(RegionReport, TripOutsideAllRegions) {
  Database db;
  db.trips.push_back(trip_row(1, 1, {{10, 10, 0}, {20, 10, 100}}));
  db.regions = {{"a", square(100, 100, 200, 200)}, {"b", square(-200, -200, -100, -100)}};
  EXPECT_TRUE(region_report(db).rows.empty());
}

TEST(RegionReport, MatchesSampledClippedLength) {
  testkit::Gen gen(5);
  Database db;
  for (int i = 0; i < 40; ++i) {
    std::vector<std::tuple<double, double, double>> pts;
    int n = gen.integer(2, 6);
    for (int k = 0; k < n; ++k) pts.emplace_back(gen.real(0, 3000), gen.real(0, 3000), k * 60.0);
    db.trips.push_back(trip_row(i + 1, 1, pts));
  }
  db.regions = {{"west", square(0, 0, 1500, 3000)},
                {"north-east", square(1500, 1500, 3000, 3000)},
                {"centre", square(1000, 1000, 2000, 2000)}};
  auto rs = region_report(db);
  ASSERT_EQ(rs.rows.size(), 3u);
  for (std::size_t r = 0; r < db.regions.size(); ++r) {
    const auto& poly = std::get<Polygon>(db.regions[r].polygon.shape());
    double want = 0;
    for (const auto& t : db.trips) want += oracle::sampled_inside_length(t.trip, poly);
    double got = std::get<double>(rs.rows[r][1]) * 1000;
    EXPECT_NEAR(got, want, want * 0.005) << db.regions[r].name;
  }
}

// ---------------------------------------------------------------- GeoJSON

TEST(GeoJson, OnePointRow) {
  ResultSet rs{{"id", "geom", "label"}, {{std::int64_t{7}, Geometry(Point{1.5, 2}), std::string("stop")}}};
  auto doc = nlohmann::json::parse(to_geojson(rs));
  EXPECT_EQ(doc["type"], "FeatureCollection");
  ASSERT_EQ(doc["features"].size(), 1u);
  const auto& f = doc["features"][0];
  EXPECT_EQ(f["type"], "Feature");
  EXPECT_EQ(f["geometry"]["type"], "Point");
  EXPECT_EQ(f["geometry"]["coordinates"], nlohmann::json::array({1.5, 2.0}));
  EXPECT_EQ(f["properties"]["id"], 7);
  EXPECT_EQ(f["properties"]["label"], "stop");
  EXPECT_FALSE(f["properties"].contains("geom"));
}

TEST(GeoJson, EmptyAndGeometrylessResults) {
  auto doc = nlohmann::json::parse(to_geojson(ResultSet{{"geom"}, {}}));
  EXPECT_TRUE(doc["features"].empty());
  EXPECT_THROW(to_geojson(ResultSet{{"n"}, {{std::int64_t{1}}}}), DataError);
}

TEST(GeoJson, MultiGeometries) {
  Collection c;
  c.kind = CollectionKind::multilinestring;
  c.items.emplace_back(LineString{{{0, 0}, {1, 1}}});
  c.items.emplace_back(LineString{{{2, 2}, {3, 3}}});
  ResultSet rs{{"g"}, {{Geometry(std::move(c))}}};
  auto doc = nlohmann::json::parse(to_geojson(rs));
  EXPECT_EQ(doc["features"][0]["geometry"]["type"], "MultiLineString");
  EXPECT_EQ(doc["features"][0]["geometry"]["coordinates"].size(), 2u);
}

// ---------------------------------------------------------------- eval

TEST(Eval, SimpleExpressions) {
  EXPECT_EQ(format_result(eval_expression("SELECT duration('{1@2025-01-01, 2@2025-01-02, 1@2025-01-03}'::TINT, true);")),
            "2 days");
  EXPECT_EQ(format_result(eval_expression("startTimestamp(tgeompoint '[Point(0 0)@2025-01-01, Point(1 1)@2025-01-02]')")),
            "2025-01-01 00:00:00+00");
  EXPECT_EQ(format_result(eval_expression("length(tgeompoint '[Point(0 0)@2025-01-01, Point(3 4)@2025-01-02]')")), "5");
  EXPECT_EQ(format_result(eval_expression("tstzspan '[2025-01-01, 2025-01-03]' @> tstzspan '[2025-01-02, 2025-01-02]'")),
            "true");
  EXPECT_EQ(format_result(eval_expression("valueAtTimestamp(tgeompoint '[Point(0 0)@2025-01-01, Point(2 2)@2025-01-03]',"
                                          " '2025-01-02')")),
            "POINT(1 1)");
}

TEST(Eval, NullPropagates) {
  EXPECT_EQ(format_result(eval_expression("valueAtTimestamp(tint '[1@2025-01-01, 2@2025-01-02]', '2026-01-01')")),
            "NULL");
  EXPECT_EQ(format_result(eval_expression("startTimestamp(null)")), "NULL");
}

TEST(Eval, Errors) {
  EXPECT_THROW(eval_expression("noSuchFunction(1)"), EvalError);
  EXPECT_THROW(eval_expression("duration()"), EvalError);
  EXPECT_THROW(eval_expression("length(tint '1@2025-01-01')"), EvalError);
  try {
    eval_expression("expandSpace(stbox 'STBOX X((1,2),(3))', 1)");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.offset(), 18u);
  }
  EXPECT_THROW(eval_expression("duration('{1@2025-01-01'::tint, true"), ParseError);
}
