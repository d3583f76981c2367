#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mobkit/box.hpp"

namespace mobkit {

using RowId = std::uint64_t;

struct RTreeConfig {
  std::size_t max_entries = 64;
  /// 0 selects ceil(0.4 * max_entries).
  std::size_t min_entries = 0;
};

struct AuditReport {
  bool ok = true;
  std::vector<std::string> problems;
  std::size_t depth = 0;
  std::size_t nodes = 0;
  std::size_t entries = 0;
};

/// Append-only R-tree over STBox entries with Guttman quadratic split.
///
/// Entries must have a spatial dimension. The SRID of the first insert
/// becomes the index SRID. Internal covers keep a time extent only when
/// every child has one. One writer or many concurrent readers.
class RTree {
 public:
  explicit RTree(RTreeConfig config = {});
  ~RTree();
  RTree(RTree&&) noexcept;
  RTree& operator=(RTree&&) noexcept;

  void insert(const STBox& box, RowId row);

  /// Row ids whose boxes overlap `query`, in tree order.
  std::vector<RowId> search(const STBox& query) const;

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  /// Levels from root to leaf; 0 for an empty tree.
  std::size_t depth() const noexcept;
  const Srid& srid() const noexcept { return srid_; }
  std::size_t max_entries() const noexcept { return max_; }
  std::size_t min_entries() const noexcept { return min_; }

  /// Fill bounds, cover tightness, and leaf depth.
  AuditReport audit() const;

  /// Indented text, one line per node and leaf entry.
  std::string dump() const;

  struct Node;

 private:
  std::unique_ptr<Node> root_;
  std::size_t size_ = 0;
  std::size_t max_;
  std::size_t min_;
  Srid srid_;
  bool srid_fixed_ = false;
};

/// Three-phase construction: workers fill local buffers in parallel,
/// combine them into one list under a mutex, and the list is inserted
/// entry by entry.
class BulkBuilder {
 public:
  explicit BulkBuilder(std::size_t workers);

  std::size_t workers() const noexcept { return buffers_.size(); }

  /// Phase 1: append to worker `w`'s local buffer. Only worker `w` may call this.
  void sink(std::size_t w, const STBox& box, RowId row);

  /// Phase 2: move worker `w`'s buffer to the end of the global list.
  void combine(std::size_t w);

  /// Phase 3: insert every combined entry in list order.
  RTree finalize(RTreeConfig config = {});

  std::size_t combined_size() const;

 private:
  std::vector<std::vector<std::pair<STBox, RowId>>> buffers_;
  std::vector<std::pair<STBox, RowId>> global_;
  mutable std::mutex mutex_;
};

/// Splits `entries` into `workers` contiguous chunks, collects them on
/// worker threads, combines in worker order, and builds the tree. Yields the
/// same tree as inserting `entries` in order.
RTree bulk_build(const std::vector<std::pair<STBox, RowId>>& entries, std::size_t workers,
                 RTreeConfig config = {});

/// One side of a predicate as seen by the planner.
struct ScanOperand {
  enum class Kind { column, constant, expression };
  Kind kind = Kind::expression;
  std::string column;
  bool indexed = false;
  std::optional<STBox> box;

  static ScanOperand indexed_column(std::string name) { return {Kind::column, std::move(name), true, {}}; }
  static ScanOperand plain_column(std::string name) { return {Kind::column, std::move(name), false, {}}; }
  static ScanOperand constant(STBox b) { return {Kind::constant, {}, false, std::move(b)}; }
};

struct IndexScanBinding {
  std::string column;
  STBox query;
};

/// Index binding for `lhs op rhs`, present only for `&&` between an indexed
/// column and a constant stbox (either order).
std::optional<IndexScanBinding> scan_plan(std::string_view op, const ScanOperand& lhs, const ScanOperand& rhs);

}  // namespace mobkit
