#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mobkit/workbench/tables.hpp"

namespace mobkit::workbench {

/// A result value; monostate is SQL NULL.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string, Timestamp, Geometry, SpanSet<Timestamp>>;

/// Text form of a cell: EWKT for geometries, canonical literal text otherwise.
std::string cell_text(const Cell& c);

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  friend bool operator==(const ResultSet&, const ResultSet&) = default;
};

/// CSV with a header row; cells quoted when they contain separators.
void write_csv(std::ostream& out, const ResultSet& rs);

enum class QueryId { q3, q5, q5opt, q7, q10 };

std::string query_name(QueryId id);
/// Case-insensitive: Q3, Q5, Q5opt, Q7, Q10.
std::optional<QueryId> query_from_name(std::string_view name);

struct QueryOptions {
  /// Route `&&` pre-filters through the trip R-tree.
  bool use_index = false;
  /// Parallelism over independent outer rows.
  std::size_t workers = 1;
};

struct BenchReport {
  std::string query_id;
  /// seq, indexed, naive or optimized.
  std::string variant;
  std::string scale;
  std::int64_t wall_ns = 0;
  std::size_t rows = 0;
  std::size_t workers = 1;
};

struct QueryResult {
  ResultSet result;
  BenchReport report;
};

/// Benchmark query over `db`. Q5 rebuilds each trajectory through a WKT
/// round trip before collecting; Q5opt collects the trajectories directly.
/// Throws DataError on a missing table or a missing index with use_index.
QueryResult run_query(QueryId id, const Database& db, const QueryOptions& options = {});

/// Per region: sum of restricted trip lengths in thousands of units,
/// rounded to 3 decimals, over trips whose trajectory intersects the region.
/// Regions no trajectory intersects are left out. Rows follow region order.
ResultSet region_report(const Database& db);

/// region_report rows with each region's polygon appended as `geom`,
/// for map export.
ResultSet region_layer(const Database& db);

/// Boxes of the box table overlapping `query`, by sequential scan or the
/// box R-tree. Result rows are (row, times, box) ordered by row.
ResultSet box_scan(const Database& db, const STBox& query, bool use_index);

}  // namespace mobkit::workbench
