// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "mobkit/rtree.hpp"
#include "mobkit/tgeo.hpp"
#include "mobkit/text_io.hpp"
#include "mobkit/workbench/eval.hpp"
#include "mobkit/workbench/queries.hpp"
#include "mobkit/workbench/tables.hpp"
#include "oracles.hpp"
#include "query_checks.hpp"

using namespace mobkit;
using namespace mobkit::workbench;
using Clock = std::chrono::steady_clock;

namespace {

// ---------------------------------------------------------------- pinned tolerances and budgets

constexpr double kGoldenBudgetSeconds = 1.0;
constexpr int kRoundTripsPerKind = 1000;
constexpr double kRoundTripBudgetSeconds = 10.0;
constexpr int kIndexQueries = 200;
constexpr double kIndexedGrowthMax = 5.0;
constexpr double kScanGrowthMin = 100.0;
constexpr double kScalingBudgetSeconds = 300.0;
constexpr int kTripPairs = 500;
constexpr int kDenseSamples = 10000;
constexpr double kRootToleranceSeconds = 1e-6;
constexpr double kQ5Tolerance = 1e-9;
constexpr int kTimingRepeats = 7;
constexpr int kRestrictionPairs = 500;
constexpr int kRestrictionSamples = 1000;
constexpr double kRestrictionDisagreementMax = 0.005;
constexpr double kLengthSlack = 1e-9;
constexpr int kAuditOps = 10000;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Timestamp sec(double s) { return make_timestamp(2025, 1, 1) + Interval{static_cast<std::int64_t>(std::llround(s * 1e6))}; }

TGeomPoint random_trip(testkit::Gen& gen, double extent, double t0) {
  std::vector<TInstant<Point>> in;
  int n = gen.integer(2, 10);
  double t = t0;
  for (int i = 0; i < n; ++i) {
    in.push_back({Point{gen.real(-extent, extent), gen.real(-extent, extent)}, sec(t)});
    t += gen.real(1, 20) + gen.big(1, 999999) * 1e-6;
  }
  return TGeomPoint(TSequence<Point>(std::move(in), Interp::linear));
}

// ---------------------------------------------------------------- 1

Outcome example_goldens() {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"SELECT duration('{1@2025-01-01, 2@2025-01-02, \n  1@2025-01-03}'::TINT, true);", "2 days"},
      {"SELECT shiftScale(tstzset '{2025-01-01, 2025-01-02, \n  2025-01-03}', '1 day', '1 hour');",
       R"({"2025-01-02 00:00:00+00", "2025-01-02 00:30:00+00", "2025-01-02 01:00:00+00"})"},
      {"SELECT expandSpace(stbox 'STBOX XT(((1.0,2.0),\n  (1.0,2.0)),[2025-01-01,2025-01-01])', 2.0);",
       "STBOX XT(((-1,0),(3,4)),[2025-01-01 00:00:00+00, 2025-01-01 00:00:00+00])"},
      {"SELECT expandTime(tbox 'TBOXFLOAT XT([1.0,2.0],\n  [2025-01-01,2025-01-02])', interval '1 day');",
       "TBOXFLOAT XT([1, 2],[2024-12-31 00:00:00+00, 2025-01-03 00:00:00+00])"},
      {"SELECT asEWKT(tgeometry('Point(1 1)',\n  tstzspan '[2025-01-01, 2025-01-02]', 'step'));",
       "[POINT(1 1)@2025-01-01 00:00:00+00, POINT(1 1)@2025-01-02 00:00:00+00]"},
      {"SELECT tgeompoint '{[Point(1 1)@2025-01-01,\n  Point(2 2)@2025-01-02, Point(1 1)@2025-01-03],\n"
       "  [Point(3 3)@2025-01-04, Point(3 3)@2025-01-05]}'\n  && stbox 'STBOX X((10.0,20.0),(10.0,20.0))';",
       "false"},
      {"SELECT asText(atTime(tgeompoint \n  '{[Point(1 1)@2025-01-01, Point(2 2)@2025-01-02, \n"
       "  Point(1 1)@2025-01-03],[Point(3 3)@2025-01-04, \n  Point(3 3)@2025-01-05]}', \n"
       "  tstzspan '[2025-01-01,2025-01-02]'));",
       "{[POINT(1 1)@2025-01-01 00:00:00+00, POINT(2 2)@2025-01-02 00:00:00+00]}"},
  };
  auto norm = [](const std::string& s) { return std::regex_replace(s, std::regex("\\s+"), " "); };
  auto start = Clock::now();
  int ok = 0;
  std::string first_bad;
  for (const auto& [expr, want] : cases) {
    std::string got;
    try {
      got = format_result(eval_expression(expr));
    } catch (const std::exception& e) {
      got = std::string("error: ") + e.what();
    }
    if (norm(got) == norm(want)) {
      ++ok;
    } else if (first_bad.empty()) {
      first_bad = "; got '" + got + "' want '" + want + "'";
    }
  }
  double elapsed = seconds_since(start);
  return {ok == static_cast<int>(cases.size()) && elapsed < kGoldenBudgetSeconds,
          std::to_string(ok) + "/" + std::to_string(cases.size()) + " match, " + fmt("%.3f s", elapsed) + first_bad};
}

// ---------------------------------------------------------------- 2

Outcome round_trip() {
  testkit::Gen gen(2024);
  auto start = Clock::now();
  std::size_t checked = 0;
  std::string first_bad;
  for (TypeTag tag : testkit::all_tags()) {
    for (int i = 0; i < kRoundTripsPerKind; ++i) {
      Literal v = gen.literal(tag);
      std::string text = serialize_ewkt(v);
      bool same = false;
      try {
        same = parse(text, tag) == v;
      } catch (const std::exception&) {
      }
      ++checked;
      if (!same && first_bad.empty()) first_bad = "; failed: " + std::string(tag_name(tag)) + " " + text;
    }
  }
  double elapsed = seconds_since(start);
  return {first_bad.empty() && elapsed < kRoundTripBudgetSeconds,
          std::to_string(checked) + " values over " + std::to_string(testkit::all_tags().size()) + " kinds, " +
              fmt("%.2f s", elapsed) + first_bad};
}

// ---------------------------------------------------------------- 3

std::vector<std::pair<STBox, RowId>> box_entries(std::size_t rows) {
  std::vector<std::pair<STBox, RowId>> out;
  auto boxes = generate_boxes(rows);
  for (std::size_t i = 0; i < boxes.size(); ++i) out.emplace_back(boxes[i].box, i + 1);
  return out;
}

STBox random_query(testkit::Gen& gen, double extent) {
  double w = gen.real(0, extent / 20), h = gen.real(0, extent / 20);
  double x = gen.real(-5, extent + 5), y = gen.coin(0.7) ? x + gen.real(-w, w) : gen.real(-5, extent + 5);
  XYRange xy{x, y, x + w, y + h};
  if (!gen.coin(0.25)) return STBox(xy, std::nullopt);
  Timestamp t = make_timestamp(2025, 8, 11, 12);
  return STBox(xy, Span<Timestamp>(t, t + Interval{kMicrosPerDay}));
}

Outcome index_oracle() {
  testkit::Gen gen(3);
  std::string detail;
  bool pass = true;
  for (std::size_t rows : {1000u, 10000u, 100000u}) {
    auto entries = box_entries(rows);
    RTree incremental;
    for (const auto& [b, r] : entries) incremental.insert(b, r);
    RTree bulk = bulk_build(entries, 4);
    bool same_tree = bulk.dump() == incremental.dump();
    int equal = 0;
    std::size_t hits = 0;
    for (int q = 0; q < kIndexQueries; ++q) {
      STBox query = random_query(gen, static_cast<double>(rows));
      auto want = oracle::scan_overlaps(entries, query);
      auto got = incremental.search(query);
      auto got_bulk = bulk.search(query);
      std::set<RowId> a(got.begin(), got.end()), b(got_bulk.begin(), got_bulk.end());
      if (a == want && b == want && a.size() == got.size()) ++equal;
      hits += want.size();
    }
    pass = pass && same_tree && equal == kIndexQueries;
    detail += std::to_string(rows) + ": " + std::to_string(equal) + "/" + std::to_string(kIndexQueries) + " equal (" +
              std::to_string(hits) + " hits), bulk " + (same_tree ? "==" : "!=") + " incremental; ";
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- 4

struct Latency {
  double indexed_us;
  double scan_us;
};

Latency lookup_latency(std::size_t rows, testkit::Gen& gen) {
  auto entries = box_entries(rows);
  RTree tree = bulk_build(entries, 4);
  std::vector<STBox> queries;
  for (int i = 0; i < 2000; ++i) {
    double c = gen.real(1, static_cast<double>(rows) - 10);
    queries.push_back(STBox::from_xy(c, c, c + 10, c + 10));
  }
  std::size_t sink = 0;
  auto start = Clock::now();
  for (const auto& q : queries) sink += tree.search(q).size();
  double indexed = seconds_since(start) * 1e6 / queries.size();

  std::size_t scans = rows >= 1000000 ? 20 : 2000;
  start = Clock::now();
  for (std::size_t i = 0; i < scans; ++i)
    for (const auto& [b, r] : entries) sink += overlaps(b, queries[i]) ? 1 : 0;
  double scan = seconds_since(start) * 1e6 / static_cast<double>(scans);
  if (sink == 0) std::puts("(no hits)");
  return {indexed, scan};
}

Outcome index_scaling() {
  testkit::Gen gen(4);
  auto start = Clock::now();
  Latency small = lookup_latency(1000, gen);
  Latency large = lookup_latency(1000000, gen);
  double elapsed = seconds_since(start);
  double idx_growth = large.indexed_us / small.indexed_us;
  double scan_growth = large.scan_us / small.scan_us;
  std::ostringstream os;
  os << "indexed " << fmt("%.2f", small.indexed_us) << " -> " << fmt("%.2f", large.indexed_us) << " us (x"
     << fmt("%.2f", idx_growth) << "), scan " << fmt("%.1f", small.scan_us) << " -> " << fmt("%.1f", large.scan_us)
     << " us (x" << fmt("%.0f", scan_growth) << "), " << fmt("%.1f s", elapsed);
  return {idx_growth <= kIndexedGrowthMax && scan_growth >= kScanGrowthMin && elapsed < kScalingBudgetSeconds, os.str()};
}

// ---------------------------------------------------------------- 5

Outcome temporal_predicates() {
  testkit::Gen gen(5);
  int pairs_ok = 0, with_periods = 0;
  std::size_t samples = 0, tolerated = 0;
  std::string first_bad;
  for (int p = 0; p < kTripPairs; ++p) {
    auto a = random_trip(gen, 20, gen.real(0, 10));
    auto b = random_trip(gen, 20, gen.real(0, 10));
    double d = gen.real(0.5, 15);
    auto want = oracle::dwithin_periods(a, b, d);
    auto tb = t_dwithin(a, b, d);
    bool ok = tb.has_value() == want.overlap && e_dwithin(a, b, d) == !want.spans.empty();
    if (ok && tb) {
      auto w = when_true(*tb);
      ok = want.spans.empty() ? !w : (w && oracle::periods_match(*w, want, kRootToleranceSeconds));
      if (!want.spans.empty()) ++with_periods;
      Span<Timestamp> dom = to_tstzspan(*tb);
      for (int k = 0; k < kDenseSamples && ok; ++k) {
        Timestamp t{dom.lower().micros + (dom.upper().micros - dom.lower().micros) * k / (kDenseSamples - 1)};
        auto pa = oracle::sample(a, t), pb = oracle::sample(b, t);
        auto got = value_at_timestamp(*tb, t);
        if (!pa || !pb || !got) {
          ok = false;
          break;
        }
        ++samples;
        bool truth = std::hypot(pa->x - pb->x, pa->y - pb->y) <= d;
        if (truth == *got) continue;
        double s = static_cast<double>(t.micros - want.base.micros) / 1e6;
        bool near_root = std::any_of(want.roots.begin(), want.roots.end(),
                                     [&](double r) { return std::abs(r - s) <= kRootToleranceSeconds; });
        if (near_root) {
          ++tolerated;
        } else {
          ok = false;
        }
      }
    }
    if (ok) {
      ++pairs_ok;
    } else if (first_bad.empty()) {
      first_bad = "; first failing pair " + std::to_string(p);
    }
  }
  return {pairs_ok == kTripPairs, std::to_string(pairs_ok) + "/" + std::to_string(kTripPairs) + " pairs (" +
                                      std::to_string(with_periods) + " with periods), " + std::to_string(samples) +
                                      " samples, " + std::to_string(tolerated) + " at roots" + first_bad};
}

// ---------------------------------------------------------------- 6

Outcome benchmark_queries() {
  Database db = generate_trips({.vehicles = 20, .trips = 50, .seed = 1});
  db.build_trip_index(4);
  std::vector<std::string> problems;
  auto note = [&](const std::string& what, const std::string& mismatch) {
    if (!mismatch.empty()) problems.push_back(what + ": " + mismatch);
  };
  std::size_t rows = 0;
  auto seq3 = run_query(QueryId::q3, db).result;
  auto seq5 = run_query(QueryId::q5, db).result;
  auto opt5 = run_query(QueryId::q5opt, db).result;
  auto seq7 = run_query(QueryId::q7, db).result;
  auto seq10 = run_query(QueryId::q10, db).result;
  note("Q3", oracle::check_q3(seq3, oracle::q3(db)));
  auto q5 = oracle::q5(db);
  note("Q5", oracle::check_q5(seq5, q5, kQ5Tolerance));
  note("Q5opt", oracle::check_q5(opt5, q5, kQ5Tolerance));
  note("Q7", oracle::check_q7(seq7, oracle::q7(db)));
  note("Q10", oracle::check_q10(seq10, oracle::q10(db)));
  for (const auto* rs : {&seq3, &seq5, &seq7, &seq10}) {
    rows += rs->rows.size();
    if (rs->rows.empty()) problems.push_back("a query returned no rows");
  }
  for (std::size_t i = 0; i < seq5.rows.size() && i < opt5.rows.size(); ++i)
    if (std::abs(std::get<double>(seq5.rows[i][2]) - std::get<double>(opt5.rows[i][2])) > kQ5Tolerance)
      problems.push_back("Q5 naive/optimized differ at row " + std::to_string(i));
  for (auto [id, seq] : {std::pair{QueryId::q3, &seq3}, {QueryId::q7, &seq7}, {QueryId::q10, &seq10}}) {
    if (run_query(id, db, {.use_index = true}).result != *seq) problems.push_back(query_name(id) + " indexed differs");
    if (run_query(id, db, {.use_index = true, .workers = 4}).result != *seq)
      problems.push_back(query_name(id) + " indexed x4 differs");
  }

  Database big = generate_trips({.vehicles = 20, .trips = 200, .seed = 1});
  auto best = [&](QueryId id) {
    std::int64_t ns = std::numeric_limits<std::int64_t>::max();
    for (int i = 0; i < kTimingRepeats; ++i) ns = std::min(ns, run_query(id, big).report.wall_ns);
    return ns;
  };
  run_query(QueryId::q5opt, big);
  std::int64_t naive = best(QueryId::q5), optimized = best(QueryId::q5opt);
  if (optimized >= naive) problems.push_back("Q5opt not faster on 200 trips");
  std::ostringstream os;
  os << rows << " rows vs oracles; 200 trips Q5 naive " << fmt("%.3f", naive / 1e6) << " ms, optimized "
     << fmt("%.3f", optimized / 1e6) << " ms (min of " << kTimingRepeats << ")";
  if (!problems.empty()) os << "; " << problems.front();
  return {problems.empty(), os.str()};
}

// ---------------------------------------------------------------- 7

Polygon random_star(testkit::Gen& gen) {
  Point c{gen.real(-5, 5), gen.real(-5, 5)};
  int k = gen.integer(3, 12);
  double r_max = gen.real(2, 10);
  std::vector<Point> ring;
  for (int i = 0; i < k; ++i) {
    double ang = 2 * std::numbers::pi * i / k;
    double r = r_max * gen.real(0.3, 1.0);
    ring.push_back({c.x + r * std::cos(ang), c.y + r * std::sin(ang)});
  }
  ring.push_back(ring.front());
  return Polygon{{ring}};
}

Outcome restriction_consistency() {
  testkit::Gen gen(7);
  std::size_t samples = 0, disagree = 0;
  int length_ok = 0;
  for (int p = 0; p < kRestrictionPairs; ++p) {
    auto trip = random_trip(gen, 12, 0);
    Polygon poly = random_star(gen);
    auto r = at_geometry(trip, Geometry(poly));
    if (!r || length(*r) <= length(trip) + kLengthSlack) ++length_ok;
    Span<Timestamp> dom = to_tstzspan(trip);
    for (int k = 0; k < kRestrictionSamples; ++k) {
      Timestamp t{dom.lower().micros + (dom.upper().micros - dom.lower().micros) * k / (kRestrictionSamples - 1)};
      bool in = oracle::inside(*oracle::sample(trip, t), poly);
      bool kept = r && oracle::sample(*r, t).has_value();
      ++samples;
      if (in != kept) ++disagree;
    }
  }
  double rate = static_cast<double>(disagree) / static_cast<double>(samples);
  return {length_ok == kRestrictionPairs && rate <= kRestrictionDisagreementMax,
          std::to_string(length_ok) + "/" + std::to_string(kRestrictionPairs) + " length bounds, " +
              std::to_string(disagree) + "/" + std::to_string(samples) + " samples disagree (" + fmt("%.4f%%", rate * 100) +
              ")"};
}

// ---------------------------------------------------------------- 8

Outcome structural_audit() {
  std::size_t audits = 0, failures = 0;
  std::size_t max_depth = 0;
  std::string first_bad;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    testkit::Gen gen(seed);
    RTreeConfig config;
    if (seed % 2 == 0) config.max_entries = 8;
    RTree tree(config);
    bool timed = seed % 3 == 0;
    for (int op = 1; op <= kAuditOps; ++op) {
      double x = gen.real(0, 1000), y = gen.real(0, 1000);
      double w = gen.real(0, 20), h = gen.real(0, 20);
      std::optional<Span<Timestamp>> t;
      if (timed) {
        Timestamp a = make_timestamp(2025, 1, 1) + Interval{gen.big(0, 100 * kMicrosPerDay)};
        t = Span<Timestamp>(a, a + Interval{gen.big(0, kMicrosPerDay)});
      }
      tree.insert(STBox(XYRange{x, y, x + w, y + h}, t), static_cast<RowId>(op));
      if (op % 1000 == 0) {
        auto report = tree.audit();
        ++audits;
        max_depth = std::max(max_depth, report.depth);
        if (!report.ok || report.entries != static_cast<std::size_t>(op)) {
          ++failures;
          if (first_bad.empty())
            first_bad = "; seed " + std::to_string(seed) + ": " +
                        (report.problems.empty() ? "entry count" : report.problems.front());
        }
      }
    }
  }
  return {failures == 0, std::to_string(audits) + " audits over 5 workloads of " + std::to_string(kAuditOps) +
                             " inserts, max depth " + std::to_string(max_depth) + first_bad};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 example expressions", example_goldens},
      {"2 literal round trip", round_trip},
      {"3 index vs scan oracle", index_oracle},
      {"4 index scaling", index_scaling},
      {"5 temporal predicates", temporal_predicates},
      {"6 benchmark queries", benchmark_queries},
      {"7 restriction consistency", restriction_consistency},
      {"8 R-tree structure", structural_audit},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
