#include "mobkit/rtree.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "mobkit/error.hpp"

namespace mobkit {

namespace {

// Flat box used inside nodes. Time bounds are meaningful only if has_t.
struct RBox {
  double xmin, ymin, xmax, ymax;
  bool has_t = false;
  std::int64_t tlo = 0, thi = 0;
  bool tlo_inc = true, thi_inc = true;

  friend bool operator==(const RBox&, const RBox&) = default;
};

RBox to_rbox(const STBox& b) {
  const XYRange& r = *b.xy();
  RBox out{r.xmin, r.ymin, r.xmax, r.ymax};
  if (b.has_t()) {
    const auto& t = *b.t();
    out.has_t = true;
    out.tlo = t.lower().micros;
    out.thi = t.upper().micros;
    out.tlo_inc = t.lower_inc();
    out.thi_inc = t.upper_inc();
  }
  return out;
}

RBox hull(const RBox& a, const RBox& b) {
  RBox out{std::min(a.xmin, b.xmin), std::min(a.ymin, b.ymin), std::max(a.xmax, b.xmax), std::max(a.ymax, b.ymax)};
  if (a.has_t && b.has_t) {
    out.has_t = true;
    out.tlo = std::min(a.tlo, b.tlo);
    out.tlo_inc = (a.tlo == out.tlo && a.tlo_inc) || (b.tlo == out.tlo && b.tlo_inc);
    out.thi = std::max(a.thi, b.thi);
    out.thi_inc = (a.thi == out.thi && a.thi_inc) || (b.thi == out.thi && b.thi_inc);
  }
  return out;
}

double area(const RBox& b) { return (b.xmax - b.xmin) * (b.ymax - b.ymin); }

bool time_overlaps(const RBox& a, const RBox& b) {
  bool lo_ok = a.tlo < b.thi || (a.tlo == b.thi && a.tlo_inc && b.thi_inc);
  bool hi_ok = b.tlo < a.thi || (b.tlo == a.thi && b.tlo_inc && a.thi_inc);
  return lo_ok && hi_ok;
}

bool overlaps(const RBox& a, const RBox& b) {
  if (a.xmin > b.xmax || b.xmin > a.xmax || a.ymin > b.ymax || b.ymin > a.ymax) return false;
  if (a.has_t && b.has_t && !time_overlaps(a, b)) return false;
  return true;
}

}  // namespace

struct RTree::Node {
  struct Entry {
    RBox box;
    std::unique_ptr<Node> child;
    RowId row = 0;
  };

  bool leaf = true;
  std::vector<Entry> entries;

  RBox cover() const {
    RBox out = entries.front().box;
    for (std::size_t i = 1; i < entries.size(); ++i) out = hull(out, entries[i].box);
    return out;
  }
};

namespace {

using Node = RTree::Node;
using Entry = Node::Entry;

std::size_t choose_subtree(const Node& n, const RBox& box) {
  std::size_t best = 0;
  double best_growth = 0;
  double best_area = 0;
  for (std::size_t i = 0; i < n.entries.size(); ++i) {
    const RBox& b = n.entries[i].box;
    double a = area(b);
    double growth = area(hull(b, box)) - a;
    if (i == 0 || growth < best_growth || (growth == best_growth && a < best_area)) {
      best = i;
      best_growth = growth;
      best_area = a;
    }
  }
  return best;
}

// Guttman quadratic split: `n` keeps one group, the returned node the other.
std::unique_ptr<Node> quadratic_split(Node& n, std::size_t min_fill) {
  std::vector<Entry> pool = std::move(n.entries);
  n.entries.clear();

  std::size_t s1 = 0, s2 = 1;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      double waste = area(hull(pool[i].box, pool[j].box)) - area(pool[i].box) - area(pool[j].box);
      if (waste > worst) {
        worst = waste;
        s1 = i;
        s2 = j;
      }
    }
  }

  auto sibling = std::make_unique<Node>();
  sibling->leaf = n.leaf;
  Node* groups[2] = {&n, sibling.get()};
  RBox covers[2] = {pool[s1].box, pool[s2].box};
  n.entries.push_back(std::move(pool[s1]));
  sibling->entries.push_back(std::move(pool[s2]));

  std::vector<bool> taken(pool.size(), false);
  taken[s1] = taken[s2] = true;
  std::size_t remaining = pool.size() - 2;

  auto assign = [&](std::size_t idx, int g) {
    covers[g] = hull(covers[g], pool[idx].box);
    groups[g]->entries.push_back(std::move(pool[idx]));
    taken[idx] = true;
    --remaining;
  };

  while (remaining > 0) {
    for (int g = 0; g < 2; ++g) {
      if (groups[g]->entries.size() + remaining <= min_fill) {
        for (std::size_t i = 0; i < pool.size(); ++i)
          if (!taken[i]) assign(i, g);
      }
    }
    if (remaining == 0) break;

    // PickNext: the entry with the strongest preference for one group.
    std::size_t pick = 0;
    double best_diff = -1;
    double d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      double e0 = area(hull(covers[0], pool[i].box)) - area(covers[0]);
      double e1 = area(hull(covers[1], pool[i].box)) - area(covers[1]);
      double diff = std::abs(e0 - e1);
      if (diff > best_diff) {
        best_diff = diff;
        pick = i;
        d0 = e0;
        d1 = e1;
      }
    }
    int g;
    if (d0 != d1) {
      g = d0 < d1 ? 0 : 1;
    } else if (area(covers[0]) != area(covers[1])) {
      g = area(covers[0]) < area(covers[1]) ? 0 : 1;
    } else {
      g = groups[0]->entries.size() <= groups[1]->entries.size() ? 0 : 1;
    }
    assign(pick, g);
  }
  return sibling;
}

// Inserts into the subtree at `n`; returns a new sibling if `n` split.
std::unique_ptr<Node> insert_rec(Node& n, Entry&& e, std::size_t max_fill, std::size_t min_fill) {
  if (n.leaf) {
    n.entries.push_back(std::move(e));
  } else {
    std::size_t i = choose_subtree(n, e.box);
    Entry& slot = n.entries[i];
    auto split = insert_rec(*slot.child, std::move(e), max_fill, min_fill);
    slot.box = slot.child->cover();
    if (split) {
      RBox b = split->cover();
      n.entries.push_back(Entry{b, std::move(split), 0});
    }
  }
  if (n.entries.size() > max_fill) return quadratic_split(n, min_fill);
  return nullptr;
}

void audit_rec(const Node& n, std::size_t level, bool is_root, std::size_t max_fill, std::size_t min_fill,
               std::optional<std::size_t>& leaf_level, AuditReport& rep) {
  ++rep.nodes;
  auto problem = [&rep](std::string msg) {
    rep.ok = false;
    rep.problems.push_back(std::move(msg));
  };
  std::size_t k = n.entries.size();
  if (k > max_fill) problem("node at level " + std::to_string(level) + " overfull: " + std::to_string(k));
  if (!is_root && k < min_fill)
    problem("node at level " + std::to_string(level) + " underfull: " + std::to_string(k));
  if (is_root && k == 0) problem("root has no entries");
  if (n.leaf) {
    rep.entries += k;
    if (!leaf_level) {
      leaf_level = level;
    } else if (*leaf_level != level) {
      problem("leaf at level " + std::to_string(level) + ", expected " + std::to_string(*leaf_level));
    }
    return;
  }
  for (const Entry& e : n.entries) {
    if (!e.child) {
      problem("internal entry without child at level " + std::to_string(level));
      continue;
    }
    if (e.child->entries.empty() || !(e.box == e.child->cover()))
      problem("cover is not the hull of its child at level " + std::to_string(level));
    audit_rec(*e.child, level + 1, false, max_fill, min_fill, leaf_level, rep);
  }
}

std::string box_label(const RBox& b) {
  std::ostringstream s;
  s << "((" << b.xmin << "," << b.ymin << "),(" << b.xmax << "," << b.ymax << "))";
  if (b.has_t) s << " t[" << b.tlo << "," << b.thi << "]";
  return s.str();
}

void dump_rec(const Node& n, std::size_t indent, std::ostringstream& out) {
  std::string pad(indent * 2, ' ');
  out << pad << (n.leaf ? "leaf" : "node") << " n=" << n.entries.size() << "\n";
  for (const Entry& e : n.entries) {
    if (n.leaf) {
      out << pad << "  row " << e.row << " " << box_label(e.box) << "\n";
    } else {
      out << pad << "  cover " << box_label(e.box) << "\n";
      dump_rec(*e.child, indent + 2, out);
    }
  }
}

}  // namespace

RTree::RTree(RTreeConfig config) : max_(config.max_entries) {
  if (max_ < 4) throw InvalidValue("rtree node capacity must be at least 4");
  min_ = config.min_entries ? config.min_entries : static_cast<std::size_t>(std::ceil(0.4 * max_));
  if (min_ < 2 || min_ > max_ / 2) throw InvalidValue("rtree min fill must lie in [2, capacity / 2]");
}

RTree::~RTree() = default;
RTree::RTree(RTree&&) noexcept = default;
RTree& RTree::operator=(RTree&&) noexcept = default;

void RTree::insert(const STBox& box, RowId row) {
  if (!box.has_xy()) throw InvalidValue("rtree entries need a spatial dimension");
  if (srid_fixed_) {
    check_same_srid(srid_, box.srid());
  } else {
    srid_ = box.srid();
    srid_fixed_ = true;
  }
  if (!root_) root_ = std::make_unique<Node>();
  auto split = insert_rec(*root_, Entry{to_rbox(box), nullptr, row}, max_, min_);
  if (split) {
    auto new_root = std::make_unique<Node>();
    new_root->leaf = false;
    RBox a = root_->cover();
    RBox b = split->cover();
    new_root->entries.push_back(Entry{a, std::move(root_), 0});
    new_root->entries.push_back(Entry{b, std::move(split), 0});
    root_ = std::move(new_root);
  }
  ++size_;
}

std::vector<RowId> RTree::search(const STBox& query) const {
  if (!query.has_xy()) throw InvalidValue("rtree queries need a spatial dimension");
  std::vector<RowId> out;
  if (!root_ || root_->entries.empty()) return out;
  check_same_srid(srid_, query.srid());
  RBox q = to_rbox(query);
  std::vector<const Node*> stack{root_.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    for (const Entry& e : n->entries) {
      if (!overlaps(e.box, q)) continue;
      if (n->leaf) {
        out.push_back(e.row);
      } else {
        stack.push_back(e.child.get());
      }
    }
  }
  return out;
}

std::size_t RTree::depth() const noexcept {
  std::size_t d = 0;
  for (const Node* n = root_.get(); n; n = n->leaf ? nullptr : n->entries.front().child.get()) ++d;
  return d;
}

AuditReport RTree::audit() const {
  AuditReport rep;
  if (!root_) return rep;
  std::optional<std::size_t> leaf_level;
  audit_rec(*root_, 1, true, max_, min_, leaf_level, rep);
  rep.depth = leaf_level.value_or(0);
  if (rep.entries != size_) {
    rep.ok = false;
    rep.problems.push_back("leaf entry count " + std::to_string(rep.entries) + " differs from size " +
                           std::to_string(size_));
  }
  return rep;
}

std::string RTree::dump() const {
  std::ostringstream out;
  out << "rtree size=" << size_ << " depth=" << depth() << " M=" << max_ << " m=" << min_ << "\n";
  if (root_) dump_rec(*root_, 1, out);
  return out.str();
}

BulkBuilder::BulkBuilder(std::size_t workers) : buffers_(std::max<std::size_t>(workers, 1)) {}

void BulkBuilder::sink(std::size_t w, const STBox& box, RowId row) { buffers_.at(w).emplace_back(box, row); }

void BulkBuilder::combine(std::size_t w) {
  auto& buf = buffers_.at(w);
  std::lock_guard lock(mutex_);
  global_.insert(global_.end(), std::make_move_iterator(buf.begin()), std::make_move_iterator(buf.end()));
  buf.clear();
}

std::size_t BulkBuilder::combined_size() const {
  std::lock_guard lock(mutex_);
  return global_.size();
}

RTree BulkBuilder::finalize(RTreeConfig config) {
  RTree tree(config);
  std::lock_guard lock(mutex_);
  for (const auto& [box, row] : global_) tree.insert(box, row);
  global_.clear();
  return tree;
}

RTree bulk_build(const std::vector<std::pair<STBox, RowId>>& entries, std::size_t workers, RTreeConfig config) {
  BulkBuilder builder(workers);
  const std::size_t w = builder.workers();
  const std::size_t chunk = (entries.size() + w - 1) / w;

  // Workers combine in index order so the global list matches the input order.
  std::mutex turn_mutex;
  std::condition_variable turn_cv;
  std::size_t turn = 0;
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t i = 0; i < w; ++i) {
    threads.emplace_back([&, i] {
      try {
        std::size_t lo = std::min(entries.size(), i * chunk);
        std::size_t hi = std::min(entries.size(), lo + chunk);
        for (std::size_t k = lo; k < hi; ++k) builder.sink(i, entries[k].first, entries[k].second);
      } catch (...) {
        errors[i] = std::current_exception();
      }
      std::unique_lock lock(turn_mutex);
      turn_cv.wait(lock, [&] { return turn == i; });
      builder.combine(i);
      ++turn;
      turn_cv.notify_all();
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return builder.finalize(config);
}

std::optional<IndexScanBinding> scan_plan(std::string_view op, const ScanOperand& lhs, const ScanOperand& rhs) {
  if (op != "&&") return std::nullopt;
  auto bind = [](const ScanOperand& col, const ScanOperand& k) -> std::optional<IndexScanBinding> {
    if (col.kind != ScanOperand::Kind::column || !col.indexed) return std::nullopt;
    if (k.kind != ScanOperand::Kind::constant || !k.box) return std::nullopt;
    return IndexScanBinding{col.column, *k.box};
  };
  if (auto b = bind(lhs, rhs)) return b;
  return bind(rhs, lhs);
}

}  // namespace mobkit
