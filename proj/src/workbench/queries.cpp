#include "mobkit/workbench/queries.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include "mobkit/error.hpp"
#include "mobkit/text_io.hpp"

namespace mobkit::workbench {

namespace {

using Row = std::vector<Cell>;

// Runs f(i) for i in [0, n) over `workers` threads and concatenates the
// per-item rows in item order.
template <class F>
std::vector<Row> parallel_rows(std::size_t n, std::size_t workers, F f) {
  std::vector<std::vector<Row>> parts(n);
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) parts[i] = f(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w)
      threads.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) parts[i] = f(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  std::vector<Row> out;
  for (auto& p : parts)
    for (auto& r : p) out.push_back(std::move(r));
  return out;
}

void require(bool present, const char* table) {
  if (!present) throw DataError(std::string("table ") + table + " is empty or missing");
}

// Trip positions matching `trip && box`, via the index when the planner binds one.
class TripFilter {
 public:
  TripFilter(const Database& db, bool use_index) : db_(db), use_index_(use_index) {
    if (use_index && !db.trip_index) throw DataError("no index on trips; run index build first");
    if (!use_index) {
      boxes_.reserve(db.trips.size());
      for (const auto& t : db.trips) boxes_.push_back(to_stbox(t.trip));
    }
  }

  std::vector<std::size_t> overlapping(const STBox& box) const {
    auto lhs = use_index_ ? ScanOperand::indexed_column("trip") : ScanOperand::plain_column("trip");
    std::vector<std::size_t> out;
    if (auto binding = scan_plan("&&", lhs, ScanOperand::constant(box))) {
      for (RowId r : db_.trip_index->search(binding->query)) out.push_back(static_cast<std::size_t>(r));
      std::sort(out.begin(), out.end());
    } else {
      for (std::size_t i = 0; i < boxes_.size(); ++i)
        if (overlaps(boxes_[i], box)) out.push_back(i);
    }
    return out;
  }

 private:
  const Database& db_;
  bool use_index_;
  std::vector<STBox> boxes_;
};

std::multimap<std::int64_t, std::size_t> trips_by_vehicle(const Database& db) {
  std::multimap<std::int64_t, std::size_t> out;
  for (std::size_t i = 0; i < db.trips.size(); ++i) out.emplace(db.trips[i].vehicle_id, i);
  return out;
}

const std::string& text_of(const Cell& c) { return std::get<std::string>(c); }

ResultSet q3(const Database& db, const QueryOptions& opt) {
  require(!db.licenses1.empty(), "Licenses1");
  require(!db.instants1.empty(), "Instants1");
  auto by_vehicle = trips_by_vehicle(db);
  auto rows = parallel_rows(db.licenses1.size(), opt.workers, [&](std::size_t li) {
    const auto& l = db.licenses1[li];
    std::vector<Row> out;
    for (const auto& inst : db.instants1) {
      auto [lo, hi] = by_vehicle.equal_range(l.vehicle_id);
      for (auto it = lo; it != hi; ++it) {
        const auto& trip = db.trips[it->second].trip;
        if (!to_tstzspan(trip).contains(inst.instant)) continue;
        Cell pos;
        if (auto p = value_at_timestamp(trip, inst.instant)) pos = Geometry(*p, trip.srid());
        out.push_back({l.license, inst.instant_id, inst.instant, std::move(pos)});
      }
    }
    return out;
  });
  auto key = [](const Row& r) { return std::tuple(text_of(r[0]), std::get<std::int64_t>(r[1])); };
  std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) { return key(a) < key(b); });
  // DISTINCT: duplicates can only share a sort key.
  std::vector<Row> distinct;
  for (auto& r : rows) {
    bool seen = false;
    for (auto it = distinct.rbegin(); it != distinct.rend() && key(*it) == key(r) && !seen; ++it) seen = *it == r;
    if (!seen) distinct.push_back(std::move(r));
  }
  return {{"license", "instant_id", "instant", "pos"}, std::move(distinct)};
}

ResultSet q5(const Database& db, bool optimized) {
  require(!db.licenses1.empty(), "Licenses1");
  require(!db.licenses2.empty(), "Licenses2");
  auto by_vehicle = trips_by_vehicle(db);
  auto collected = [&](const std::vector<LicenseRow>& licenses) {
    std::vector<std::pair<std::string, Geometry>> out;
    for (const auto& l : licenses) {
      std::vector<Geometry> parts;
      auto [lo, hi] = by_vehicle.equal_range(l.vehicle_id);
      for (auto it = lo; it != hi; ++it) {
        Geometry traj = trajectory(db.trips[it->second].trip);
        if (!optimized) traj = parse_geometry(geometry_to_wkt(traj, true));
        parts.push_back(std::move(traj));
      }
      if (!parts.empty()) out.emplace_back(l.license, collect(parts));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  };
  auto left = collected(db.licenses1);
  auto right = collected(db.licenses2);
  ResultSet rs{{"license1", "license2", "min_dist"}, {}};
  for (const auto& [l1, g1] : left)
    for (const auto& [l2, g2] : right) rs.rows.push_back({l1, l2, distance(g1, g2)});
  return rs;
}

ResultSet q7(const Database& db, const QueryOptions& opt) {
  require(!db.vehicles.empty(), "Vehicles");
  require(!db.points1.empty(), "Points1");
  std::map<std::int64_t, const VehicleRow*> passengers;
  for (const auto& v : db.vehicles)
    if (v.vehicle_type == "passenger") passengers.emplace(v.vehicle_id, &v);
  TripFilter filter(db, opt.use_index);

  // Per point: (license, earliest arrival) for every passenger license reaching it.
  auto grouped = parallel_rows(db.points1.size(), opt.workers, [&](std::size_t pi) {
    const auto& p = db.points1[pi];
    const auto* pt = std::get_if<Point>(&p.geom.shape());
    if (!pt) throw DataError("Points1 row " + std::to_string(p.point_id) + " is not a point");
    std::map<std::string, Timestamp> first;
    for (std::size_t ti : filter.overlapping(geometry_to_stbox(p.geom))) {
      const auto& trip = db.trips[ti];
      auto v = passengers.find(trip.vehicle_id);
      if (v == passengers.end()) continue;
      if (!intersects(trip.traj, p.geom)) continue;
      auto at = at_values(trip.trip, *pt);
      if (!at) continue;
      Timestamp t = start_timestamp(*at);
      auto [it, fresh] = first.emplace(v->second->license, t);
      if (!fresh && t < it->second) it->second = t;
    }
    std::vector<Row> out;
    if (first.empty()) return out;
    Timestamp earliest = std::min_element(first.begin(), first.end(), [](const auto& a, const auto& b) {
                           return a.second < b.second;
                         })->second;
    for (const auto& [license, t] : first)
      if (t <= earliest) out.push_back({license, p.point_id, p.geom, t});
    return out;
  });
  std::stable_sort(grouped.begin(), grouped.end(), [](const Row& a, const Row& b) {
    return std::tuple(std::get<std::int64_t>(a[1]), text_of(a[0])) <
           std::tuple(std::get<std::int64_t>(b[1]), text_of(b[0]));
  });
  return {{"license", "point_id", "geom", "instant"}, std::move(grouped)};
}

ResultSet q10(const Database& db, const QueryOptions& opt) {
  require(!db.licenses1.empty(), "Licenses1");
  require(!db.vehicles.empty(), "Vehicles");
  std::set<std::int64_t> known;
  for (const auto& v : db.vehicles) known.insert(v.vehicle_id);
  TripFilter filter(db, opt.use_index);
  auto by_vehicle = trips_by_vehicle(db);

  std::vector<std::pair<const LicenseRow*, std::size_t>> outer;
  for (const auto& l : db.licenses1) {
    auto [lo, hi] = by_vehicle.equal_range(l.vehicle_id);
    for (auto it = lo; it != hi; ++it) outer.emplace_back(&l, it->second);
  }
  // Rows carry the two trip ids as sort keys; they are dropped afterwards.
  auto rows = parallel_rows(outer.size(), opt.workers, [&](std::size_t oi) {
    const auto& [l, t1i] = outer[oi];
    const auto& t1 = db.trips[t1i];
    std::vector<Row> out;
    for (std::size_t t2i : filter.overlapping(expand_space(to_stbox(t1.trip), 3.0))) {
      const auto& t2 = db.trips[t2i];
      if (t2.vehicle_id == t1.vehicle_id || !known.count(t2.vehicle_id)) continue;
      auto tb = t_dwithin(t1.trip, t2.trip, 3.0);
      if (!tb) continue;
      auto periods = when_true(*tb);
      if (!periods) continue;
      out.push_back({l->license, t2.vehicle_id, std::move(*periods), t1.trip_id, t2.trip_id});
    }
    return out;
  });
  auto key = [](const Row& r) {
    return std::tuple(text_of(r[0]), std::get<std::int64_t>(r[1]), std::get<std::int64_t>(r[3]),
                      std::get<std::int64_t>(r[4]));
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) { return key(a) < key(b); });
  for (auto& r : rows) r.resize(3);
  return {{"license1", "car2_id", "periods"}, std::move(rows)};
}

}  // namespace

std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::monostate>) {
          return "NULL";
        } else if constexpr (std::is_same_v<V, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<V, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<V, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<V, Timestamp>) {
          return format_timestamp(v);
        } else if constexpr (std::is_same_v<V, Geometry>) {
          return geometry_to_wkt(v, true);
        } else {
          return serialize(Literal{TypeTag::tstzspanset, v});
        }
      },
      c);
}

void write_csv(std::ostream& out, const ResultSet& rs) {
  auto field = [&](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
      out << s;
      return;
    }
    out << '"';
    for (char ch : s) {
      if (ch == '"') out << '"';
      out << ch;
    }
    out << '"';
  };
  for (std::size_t i = 0; i < rs.columns.size(); ++i) {
    if (i) out << ',';
    field(rs.columns[i]);
  }
  out << '\n';
  for (const auto& row : rs.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      field(cell_text(row[i]));
    }
    out << '\n';
  }
}

std::string query_name(QueryId id) {
  switch (id) {
    case QueryId::q3: return "Q3";
    case QueryId::q5: return "Q5";
    case QueryId::q5opt: return "Q5opt";
    case QueryId::q7: return "Q7";
    case QueryId::q10: return "Q10";
  }
  return "?";
}

std::optional<QueryId> query_from_name(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "q3") return QueryId::q3;
  if (lower == "q5") return QueryId::q5;
  if (lower == "q5opt") return QueryId::q5opt;
  if (lower == "q7") return QueryId::q7;
  if (lower == "q10") return QueryId::q10;
  return std::nullopt;
}

QueryResult run_query(QueryId id, const Database& db, const QueryOptions& options) {
  require(!db.trips.empty(), "Trips");
  if (options.use_index && !db.trip_index) throw DataError("no index on trips; run index build first");
  auto start = std::chrono::steady_clock::now();
  ResultSet rs;
  switch (id) {
    case QueryId::q3: rs = q3(db, options); break;
    case QueryId::q5: rs = q5(db, false); break;
    case QueryId::q5opt: rs = q5(db, true); break;
    case QueryId::q7: rs = q7(db, options); break;
    case QueryId::q10: rs = q10(db, options); break;
  }
  auto elapsed = std::chrono::steady_clock::now() - start;
  BenchReport report;
  report.query_id = query_name(id);
  if (id == QueryId::q5) {
    report.variant = "naive";
  } else if (id == QueryId::q5opt) {
    report.variant = "optimized";
  } else {
    report.variant = options.use_index ? "indexed" : "seq";
  }
  report.scale = std::to_string(db.trips.size()) + " trips";
  report.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count();
  report.rows = rs.rows.size();
  report.workers = id == QueryId::q5 || id == QueryId::q5opt ? 1 : std::max<std::size_t>(1, options.workers);
  return {std::move(rs), std::move(report)};
}

ResultSet region_report(const Database& db) {
  ResultSet rs{{"region", "total_km"}, {}};
  for (const auto& region : db.regions) {
    bool any = false;
    double total = 0;
    for (const auto& trip : db.trips) {
      if (!intersects(trip.traj, region.polygon)) continue;
      any = true;
      if (auto r = at_geometry(trip.trip, region.polygon)) total += length(*r);
    }
    if (any) rs.rows.push_back({region.name, std::round(total) / 1000.0});
  }
  return rs;
}

ResultSet region_layer(const Database& db) {
  ResultSet rs = region_report(db);
  rs.columns.push_back("geom");
  for (auto& row : rs.rows) {
    const auto& name = std::get<std::string>(row[0]);
    auto it = std::find_if(db.regions.begin(), db.regions.end(), [&](const RegionRow& r) { return r.name == name; });
    row.push_back(it->polygon);
  }
  return rs;
}

ResultSet box_scan(const Database& db, const STBox& query, bool use_index) {
  std::vector<std::size_t> hits;
  if (use_index) {
    if (!db.box_index) throw DataError("no index on boxes; run index build first");
    for (RowId r : db.box_index->search(query)) hits.push_back(static_cast<std::size_t>(r));
    std::sort(hits.begin(), hits.end());
  } else {
    for (std::size_t i = 0; i < db.boxes.size(); ++i)
      if (overlaps(db.boxes[i].box, query)) hits.push_back(i);
  }
  ResultSet rs{{"row", "times", "box"}, {}};
  for (std::size_t i : hits)
    rs.rows.push_back({static_cast<std::int64_t>(i + 1), db.boxes[i].times,
                       serialize(Literal{TypeTag::stbox, db.boxes[i].box})});
  return rs;
}

}  // namespace mobkit::workbench
