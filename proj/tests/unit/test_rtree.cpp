#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "generators.hpp"
#include "mobkit/error.hpp"
#include "mobkit/rtree.hpp"
#include "oracles.hpp"

using namespace mobkit;

namespace {

using Rows = std::vector<std::pair<STBox, RowId>>;

std::set<RowId> as_set(const std::vector<RowId>& v) { return {v.begin(), v.end()}; }

STBox random_box(testkit::Gen& gen, bool with_time) {
  double x = gen.real(0, 1000), y = gen.real(0, 1000);
  double w = gen.real(0, 20), h = gen.real(0, 20);
  std::optional<Span<Timestamp>> t;
  if (with_time) {
    Timestamp a{make_timestamp(2025, 1, 1).micros + gen.big(0, 100 * kMicrosPerDay)};
    t = Span<Timestamp>(a, a + Interval{gen.big(0, 5 * kMicrosPerDay)});
  }
  return STBox(XYRange{x, y, x + w, y + h}, t);
}

// Boxes [i, i+0.5]^2 at minute-spaced timestamps.
Rows diagonal(std::size_t n) {
  Rows rows;
  Timestamp t0 = make_timestamp(2025, 8, 11, 12);
  for (std::size_t i = 1; i <= n; ++i) {
    double v = static_cast<double>(i);
    Timestamp t = t0 + Interval::minutes(static_cast<std::int64_t>(i));
    rows.emplace_back(STBox(XYRange{v, v, v + 0.5, v + 0.5}, Span<Timestamp>::singleton(t)), i);
  }
  return rows;
}

}  // namespace

TEST(RTree, InsertThenSearchSameBox) {
  RTree tree;
  STBox b = STBox::from_xy(1, 1, 2, 2);
  tree.insert(b, 42);
  EXPECT_EQ(tree.search(b), std::vector<RowId>{42});
  EXPECT_TRUE(tree.search(STBox::from_xy(5, 5, 6, 6)).empty());
}

TEST(RTree, ForcedSplitGivesDepthTwo) {
  RTree tree;
  for (RowId i = 0; i <= tree.max_entries(); ++i) tree.insert(STBox::from_xy(i, i, i + 1.0, i + 1.0), i);
  EXPECT_EQ(tree.depth(), 2u);
  auto rep = tree.audit();
  EXPECT_TRUE(rep.ok) << (rep.problems.empty() ? "" : rep.problems.front());
  EXPECT_EQ(tree.min_entries(), 26u);
}

TEST(RTree, RejectsMissingSpaceAndSridMismatch) {
  RTree tree;
  EXPECT_THROW(tree.insert(STBox(std::nullopt, Span<Timestamp>::singleton(Timestamp{0})), 1), InvalidValue);
  tree.insert(STBox::from_xy(0, 0, 1, 1, 4326), 1);
  EXPECT_THROW(tree.insert(STBox::from_xy(0, 0, 1, 1), 2), SridMismatch);
  EXPECT_THROW(tree.search(STBox::from_xy(0, 0, 1, 1, 3812)), SridMismatch);
  EXPECT_EQ(tree.search(STBox::from_xy(0, 0, 1, 1, 4326)).size(), 1u);
}

TEST(RTree, DiagonalGeneratorQueryMatchesScan) {
  STBox q = STBox::from_xy(1000, 1000, 1100, 1100);
  for (std::size_t n : {999u, 1000u, 1001u}) {
    Rows rows = diagonal(n);
    RTree tree;
    for (const auto& [b, id] : rows) tree.insert(b, id);
    EXPECT_EQ(as_set(tree.search(q)), oracle::scan_overlaps(rows, q)) << n;
  }
  // Closed bounds: row 1000 reaches the query corner exactly.
  EXPECT_TRUE(oracle::scan_overlaps(diagonal(999), q).empty());
  EXPECT_EQ(oracle::scan_overlaps(diagonal(1000), q), std::set<RowId>{1000});
}

TEST(RTree, MatchesSequentialScan) {
  testkit::Gen gen(77);
  for (bool with_time : {false, true}) {
    Rows rows;
    RTree tree;
    for (RowId i = 0; i < 10000; ++i) {
      rows.emplace_back(random_box(gen, with_time), i);
      tree.insert(rows.back().first, i);
    }
    ASSERT_TRUE(tree.audit().ok);
    for (int k = 0; k < 200; ++k) {
      STBox q = random_box(gen, with_time && gen.coin());
      auto got = tree.search(q);
      EXPECT_EQ(got.size(), as_set(got).size());
      EXPECT_EQ(as_set(got), oracle::scan_overlaps(rows, q));
    }
  }
}

TEST(RTree, AuditHoldsThroughRandomInserts) {
  testkit::Gen gen(8);
  RTree tree(RTreeConfig{8, 0});
  for (RowId i = 0; i < 3000; ++i) {
    tree.insert(random_box(gen, gen.coin(0.7)), i);
    if (i % 97 == 0) {
      auto rep = tree.audit();
      ASSERT_TRUE(rep.ok) << rep.problems.front();
    }
  }
  EXPECT_EQ(tree.audit().entries, 3000u);
}

TEST(RTree, BulkBuildEqualsIncremental) {
  testkit::Gen gen(19);
  Rows rows;
  for (RowId i = 0; i < 5000; ++i) rows.emplace_back(random_box(gen, true), i);
  RTree inc;
  for (const auto& [b, id] : rows) inc.insert(b, id);
  for (std::size_t workers : {1u, 4u, 7u}) {
    RTree bulk = bulk_build(rows, workers);
    EXPECT_EQ(bulk.size(), rows.size());
    EXPECT_EQ(bulk.dump(), inc.dump());
    for (int k = 0; k < 50; ++k) {
      STBox q = random_box(gen, gen.coin());
      EXPECT_EQ(as_set(bulk.search(q)), as_set(inc.search(q)));
    }
  }
  RTree empty = bulk_build({}, 4);
  EXPECT_TRUE(empty.empty());
  EXPECT_TRUE(empty.search(STBox::from_xy(0, 0, 1, 1)).empty());
}

TEST(RTree, BulkBuilderPhases) {
  BulkBuilder builder(2);
  builder.sink(0, STBox::from_xy(0, 0, 1, 1), 1);
  builder.sink(1, STBox::from_xy(2, 2, 3, 3), 2);
  EXPECT_EQ(builder.combined_size(), 0u);
  builder.combine(1);
  builder.combine(0);
  EXPECT_EQ(builder.combined_size(), 2u);
  RTree tree = builder.finalize();
  EXPECT_EQ(tree.size(), 2u);
  BulkBuilder mixed(2);
  mixed.sink(0, STBox::from_xy(0, 0, 1, 1, 4326), 1);
  mixed.sink(1, STBox::from_xy(0, 0, 1, 1), 2);
  mixed.combine(0);
  mixed.combine(1);
  EXPECT_THROW(mixed.finalize(), SridMismatch);
}

TEST(RTree, ScanPlanMatchesOnlyOverlapWithConstant) {
  auto col = ScanOperand::indexed_column("box");
  auto k = ScanOperand::constant(STBox::from_xy(0, 0, 1, 1));
  auto b = scan_plan("&&", col, k);
  ASSERT_TRUE(b);
  EXPECT_EQ(b->column, "box");
  EXPECT_TRUE(scan_plan("&&", k, col));
  EXPECT_FALSE(scan_plan("&&", k, k));
  EXPECT_FALSE(scan_plan("@>", col, k));
  EXPECT_FALSE(scan_plan("&&", ScanOperand::plain_column("box"), k));
  EXPECT_FALSE(scan_plan("&&", col, ScanOperand{}));
}
