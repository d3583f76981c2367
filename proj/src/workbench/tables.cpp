#include "mobkit/workbench/tables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "mobkit/error.hpp"
#include "mobkit/text_io.hpp"

namespace mobkit::workbench {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <class N>
N number(std::string_view field, const char* what, std::size_t line) {
  field = trim(field);
  N v{};
  auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || p != field.data() + field.size())
    throw DataError(std::string("bad ") + what + " '" + std::string(field) + "'", line);
  if constexpr (std::is_floating_point_v<N>) {
    if (!std::isfinite(v)) throw DataError(std::string("non-finite ") + what, line);
  }
  return v;
}

// Reads the header and calls `row(fields, line)` for every non-blank line.
template <class F>
void read_csv(std::istream& in, char sep, const std::vector<std::string>& header, F row) {
  std::string text;
  std::size_t line = 0;
  bool seen_header = false;
  while (std::getline(in, text)) {
    ++line;
    std::string_view view = trim(text);
    if (view.empty()) continue;
    auto fields = split(view, sep);
    if (!seen_header) {
      seen_header = true;
      bool ok = fields.size() == header.size();
      for (std::size_t i = 0; ok && i < fields.size(); ++i) ok = trim(fields[i]) == header[i];
      if (!ok) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : std::string(1, sep)) + h;
        throw DataError("expected header '" + want + "'", line);
      }
      continue;
    }
    if (fields.size() != header.size())
      throw DataError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()),
                      line);
    row(fields, line);
  }
  if (!seen_header) throw DataError("missing header");
}

TripRow make_trip(std::int64_t vehicle, std::int64_t trip, TGeomPoint tp) {
  Geometry traj = trajectory(tp);
  return TripRow{vehicle, trip, std::move(tp), std::move(traj)};
}

std::string license_for(std::int64_t vehicle_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "B-%04lld", static_cast<long long>(vehicle_id));
  return buf;
}

template <class T, class F>
void save_table(const std::filesystem::path& path, const std::vector<T>& rows, const std::string& header, F line) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << header << '\n';
  for (const auto& r : rows) out << line(r) << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

template <class F>
void load_table(const std::filesystem::path& path, const std::vector<std::string>& header, F row) {
  std::ifstream in(path);
  if (!in) return;
  try {
    read_csv(in, '\t', header, row);
  } catch (const DataError& e) {
    throw DataError(path.filename().string() + ": " + e.what());
  } catch (const Error& e) {
    throw DataError(path.filename().string() + ": " + e.what());
  }
}

std::string wkt(const Geometry& g) { return geometry_to_wkt(g, true); }

}  // namespace

void Database::build_trip_index(std::size_t workers) {
  std::vector<std::pair<STBox, RowId>> entries;
  entries.reserve(trips.size());
  for (std::size_t i = 0; i < trips.size(); ++i) entries.emplace_back(to_stbox(trips[i].trip), i);
  trip_index = bulk_build(entries, workers);
}

void Database::build_box_index(std::size_t workers) {
  std::vector<std::pair<STBox, RowId>> entries;
  entries.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) entries.emplace_back(boxes[i].box, i);
  box_index = bulk_build(entries, workers);
}

std::vector<TripRow> ingest_trips(std::istream& in, Srid srid) {
  struct Obs {
    Timestamp t;
    Point p;
    std::size_t line;
  };
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Obs>> groups;
  read_csv(in, ',', {"vehicle_id", "trip_id", "x", "y", "t"}, [&](const auto& f, std::size_t line) {
    auto vehicle = number<std::int64_t>(f[0], "vehicle_id", line);
    auto trip = number<std::int64_t>(f[1], "trip_id", line);
    Point p{number<double>(f[2], "x", line), number<double>(f[3], "y", line)};
    Timestamp t;
    try {
      t = parse_timestamp(trim(f[4]));
    } catch (const ParseError& e) {
      throw DataError("bad timestamp '" + std::string(trim(f[4])) + "': " + e.bare_message(), line);
    }
    groups[{vehicle, trip}].push_back({t, p, line});
  });

  std::vector<TripRow> rows;
  rows.reserve(groups.size());
  for (auto& [key, obs] : groups) {
    std::stable_sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) { return a.t < b.t; });
    std::vector<TInstant<Point>> instants;
    instants.reserve(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (i > 0 && obs[i].t == obs[i - 1].t)
        throw DataError("duplicate timestamp " + format_timestamp(obs[i].t) + " in vehicle " +
                            std::to_string(key.first) + " trip " + std::to_string(key.second),
                        std::max(obs[i].line, obs[i - 1].line));
      instants.push_back({obs[i].p, obs[i].t});
    }
    rows.push_back(make_trip(key.first, key.second, TGeomPoint(TSequence<Point>(std::move(instants), Interp::linear), srid)));
  }
  return rows;
}

std::vector<VehicleRow> ingest_vehicles(std::istream& in) {
  std::vector<VehicleRow> rows;
  read_csv(in, ',', {"vehicle_id", "license", "vehicle_type"}, [&](const auto& f, std::size_t line) {
    rows.push_back({number<std::int64_t>(f[0], "vehicle_id", line), std::string(trim(f[1])), std::string(trim(f[2]))});
  });
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.vehicle_id < b.vehicle_id; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].vehicle_id == rows[i - 1].vehicle_id)
      throw DataError("duplicate vehicle_id " + std::to_string(rows[i].vehicle_id));
  return rows;
}

std::vector<InstantRow> ingest_instants(std::istream& in) {
  std::vector<InstantRow> rows;
  read_csv(in, ',', {"instant_id", "instant"}, [&](const auto& f, std::size_t line) {
    try {
      rows.push_back({number<std::int64_t>(f[0], "instant_id", line), parse_timestamp(trim(f[1]))});
    } catch (const ParseError& e) {
      throw DataError("bad instant: " + e.bare_message(), line);
    }
  });
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.instant_id < b.instant_id; });
  if (rows.size() > 10) rows.erase(rows.begin() + 10, rows.end());
  return rows;
}

std::vector<PointRow> ingest_points(std::istream& in, Srid srid) {
  std::vector<PointRow> rows;
  read_csv(in, ',', {"point_id", "x", "y"}, [&](const auto& f, std::size_t line) {
    rows.push_back({number<std::int64_t>(f[0], "point_id", line),
                    Geometry(Point{number<double>(f[1], "x", line), number<double>(f[2], "y", line)}, srid)});
  });
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.point_id < b.point_id; });
  if (rows.size() > 10) rows.erase(rows.begin() + 10, rows.end());
  return rows;
}

std::vector<RegionRow> ingest_regions(std::istream& in) {
  std::vector<RegionRow> rows;
  read_csv(in, '\t', {"name", "geom"}, [&](const auto& f, std::size_t line) {
    try {
      rows.push_back({std::string(trim(f[0])), parse_geometry(trim(f[1]))});
    } catch (const Error& e) {
      throw DataError(std::string("bad region geometry: ") + e.what(), line);
    }
  });
  return rows;
}

void derive_license_samples(Database& db) {
  auto vehicles = db.vehicles;
  std::sort(vehicles.begin(), vehicles.end(), [](const auto& a, const auto& b) { return a.vehicle_id < b.vehicle_id; });
  db.licenses1.clear();
  db.licenses2.clear();
  for (std::size_t i = 0; i < vehicles.size() && i < 20; ++i) {
    auto& target = i < 10 ? db.licenses1 : db.licenses2;
    target.push_back({static_cast<std::int64_t>(i + 1), vehicles[i].license, vehicles[i].vehicle_id});
  }
}

void write_observations(std::ostream& out, const std::vector<TripRow>& trips) {
  out << "vehicle_id,trip_id,x,y,t\n";
  for (const auto& row : trips)
    for (const auto& inst : row.trip.instants())
      out << row.vehicle_id << ',' << row.trip_id << ',' << format_double(inst.value.x) << ','
          << format_double(inst.value.y) << ',' << format_timestamp(inst.t) << '\n';
}

std::vector<BoxRow> generate_boxes(std::size_t rows) {
  std::vector<BoxRow> out;
  out.reserve(rows);
  Timestamp t0 = make_timestamp(2025, 8, 11, 12);
  for (std::size_t i = 1; i <= rows; ++i) {
    double v = static_cast<double>(i);
    out.push_back({t0 + Interval::minutes(static_cast<std::int64_t>(i)), STBox::from_xy(v, v, v + 0.5, v + 0.5)});
  }
  return out;
}

Database generate_trips(const SyntheticConfig& config) {
  if (config.vehicles == 0 || config.grid < 2 || !(config.spacing > 0))
    throw InvalidValue("synthetic generator needs vehicles and a grid of at least 2x2");
  std::mt19937_64 rng(config.seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto node = [&](int gx, int gy) { return Point{gx * config.spacing, gy * config.spacing}; };

  Database db;
  struct Anchors {
    int hx, hy, wx, wy;
  };
  std::vector<Anchors> anchors;
  for (std::size_t v = 1; v <= config.vehicles; ++v) {
    Anchors a{pick(config.grid), pick(config.grid), 0, 0};
    do {
      a.wx = pick(config.grid);
      a.wy = pick(config.grid);
    } while (a.wx == a.hx && a.wy == a.hy);
    anchors.push_back(a);
    auto id = static_cast<std::int64_t>(v);
    db.vehicles.push_back({id, license_for(id), v % 4 == 3 ? "truck" : "passenger"});
  }

  Timestamp day0 = make_timestamp(2025, 6, 2);
  std::size_t last_day = 0;
  for (std::size_t k = 0; k < config.trips; ++k) {
    std::size_t v = k % config.vehicles;
    std::size_t n = k / config.vehicles;
    const Anchors& a = anchors[v];
    bool outbound = n % 2 == 0;
    int x0 = outbound ? a.hx : a.wx, y0 = outbound ? a.hy : a.wy;
    int x1 = outbound ? a.wx : a.hx, y1 = outbound ? a.wy : a.hy;
    std::size_t day = n / 2;
    last_day = std::max(last_day, day);
    Timestamp start = day0 + Interval::days(static_cast<std::int64_t>(day)) +
                      Interval::hours(outbound ? 7 : 17) +
                      Interval{static_cast<std::int64_t>(uniform(0, 300) * kMicrosPerSecond)};
    double speed = uniform(4, 6);
    bool x_first = pick(2) == 0;

    std::vector<std::pair<int, int>> route{{x0, y0}};
    auto walk = [&](bool along_x) {
      auto [cx, cy] = route.back();
      int target = along_x ? x1 : y1;
      int& c = along_x ? cx : cy;
      while (c != target) {
        c += c < target ? 1 : -1;
        route.emplace_back(cx, cy);
      }
    };
    walk(x_first);
    walk(!x_first);

    std::vector<TInstant<Point>> instants;
    Timestamp t = start;
    instants.push_back({node(route[0].first, route[0].second), t});
    for (std::size_t i = 1; i < route.size(); ++i) {
      t = t + Interval{static_cast<std::int64_t>(config.spacing / speed * kMicrosPerSecond)};
      Point p = node(route[i].first, route[i].second);
      instants.push_back({p, t});
      if (i + 1 < route.size() && uniform(0, 1) < 0.15) {
        t = t + Interval{static_cast<std::int64_t>(uniform(10, 30) * kMicrosPerSecond)};
        instants.push_back({p, t});
      }
    }
    auto vehicle_id = static_cast<std::int64_t>(v + 1);
    db.trips.push_back(make_trip(vehicle_id, static_cast<std::int64_t>(n + 1),
                                 TGeomPoint(TSequence<Point>(std::move(instants), Interp::linear))));
  }
  std::sort(db.trips.begin(), db.trips.end(), [](const TripRow& a, const TripRow& b) {
    return std::pair(a.vehicle_id, a.trip_id) < std::pair(b.vehicle_id, b.trip_id);
  });
  derive_license_samples(db);

  for (std::int64_t i = 1; i <= 10; ++i) {
    auto day = static_cast<std::int64_t>(std::uniform_int_distribution<std::size_t>(0, last_day)(rng));
    Timestamp ts = day0 + Interval::days(day) + Interval::hours(pick(2) == 0 ? 7 : 17) +
                   Interval{static_cast<std::int64_t>(uniform(0, 400) * kMicrosPerSecond)};
    db.instants1.push_back({i, ts});
  }
  std::vector<std::pair<int, int>> nodes;
  for (int gx = 0; gx < config.grid; ++gx)
    for (int gy = 0; gy < config.grid; ++gy) nodes.emplace_back(gx, gy);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  for (std::size_t i = 0; i < 10 && i < nodes.size(); ++i)
    db.points1.push_back({static_cast<std::int64_t>(i + 1), Geometry(node(nodes[i].first, nodes[i].second))});

  double lo = -config.spacing / 2;
  double hi = (config.grid - 1) * config.spacing + config.spacing / 2;
  double mid = (config.grid - 1) * config.spacing / 2;
  auto rect = [](double x0, double y0, double x1, double y1) {
    return Geometry(Polygon{{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}}});
  };
  db.regions.push_back({"north-east", rect(mid, mid, hi, hi)});
  db.regions.push_back({"north-west", rect(lo, mid, mid, hi)});
  db.regions.push_back({"south-east", rect(mid, lo, hi, mid)});
  db.regions.push_back({"south-west", rect(lo, lo, mid, mid)});
  return db;
}

void save_database(const Database& db, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_table(dir / "trips.tsv", db.trips, "vehicle_id\ttrip_id\ttrip", [](const TripRow& r) {
    return std::to_string(r.vehicle_id) + '\t' + std::to_string(r.trip_id) + '\t' +
           serialize_ewkt(Literal{TypeTag::tgeompoint, r.trip});
  });
  save_table(dir / "vehicles.tsv", db.vehicles, "vehicle_id\tlicense\tvehicle_type", [](const VehicleRow& r) {
    return std::to_string(r.vehicle_id) + '\t' + r.license + '\t' + r.vehicle_type;
  });
  auto license_line = [](const LicenseRow& r) {
    return std::to_string(r.license_id) + '\t' + r.license + '\t' + std::to_string(r.vehicle_id);
  };
  save_table(dir / "licenses1.tsv", db.licenses1, "license_id\tlicense\tvehicle_id", license_line);
  save_table(dir / "licenses2.tsv", db.licenses2, "license_id\tlicense\tvehicle_id", license_line);
  save_table(dir / "instants1.tsv", db.instants1, "instant_id\tinstant", [](const InstantRow& r) {
    return std::to_string(r.instant_id) + '\t' + format_timestamp(r.instant);
  });
  save_table(dir / "points1.tsv", db.points1, "point_id\tgeom",
             [](const PointRow& r) { return std::to_string(r.point_id) + '\t' + wkt(r.geom); });
  save_table(dir / "regions.tsv", db.regions, "name\tgeom",
             [](const RegionRow& r) { return r.name + '\t' + wkt(r.polygon); });
  save_table(dir / "boxes.tsv", db.boxes, "times\tbox", [](const BoxRow& r) {
    return format_timestamp(r.times) + '\t' + serialize(Literal{TypeTag::stbox, r.box});
  });
  std::vector<std::string> indexes;
  if (db.trip_index) indexes.push_back("trips");
  if (db.box_index) indexes.push_back("boxes");
  save_table(dir / "indexes.tsv", indexes, "table", [](const std::string& s) { return s; });
}

Database load_database(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("no workspace at " + dir.string());
  Database db;
  load_table(dir / "trips.tsv", {"vehicle_id", "trip_id", "trip"}, [&](const auto& f, std::size_t line) {
    db.trips.push_back(make_trip(number<std::int64_t>(f[0], "vehicle_id", line),
                                 number<std::int64_t>(f[1], "trip_id", line),
                                 parse(f[2], TypeTag::tgeompoint).template as<TGeomPoint>()));
  });
  load_table(dir / "vehicles.tsv", {"vehicle_id", "license", "vehicle_type"}, [&](const auto& f, std::size_t line) {
    db.vehicles.push_back({number<std::int64_t>(f[0], "vehicle_id", line), std::string(f[1]), std::string(f[2])});
  });
  auto license_row = [](std::vector<LicenseRow>& out) {
    return [&out](const auto& f, std::size_t line) {
      out.push_back({number<std::int64_t>(f[0], "license_id", line), std::string(f[1]),
                     number<std::int64_t>(f[2], "vehicle_id", line)});
    };
  };
  load_table(dir / "licenses1.tsv", {"license_id", "license", "vehicle_id"}, license_row(db.licenses1));
  load_table(dir / "licenses2.tsv", {"license_id", "license", "vehicle_id"}, license_row(db.licenses2));
  load_table(dir / "instants1.tsv", {"instant_id", "instant"}, [&](const auto& f, std::size_t line) {
    db.instants1.push_back({number<std::int64_t>(f[0], "instant_id", line), parse_timestamp(f[1])});
  });
  load_table(dir / "points1.tsv", {"point_id", "geom"}, [&](const auto& f, std::size_t line) {
    db.points1.push_back({number<std::int64_t>(f[0], "point_id", line), parse_geometry(f[1])});
  });
  load_table(dir / "regions.tsv", {"name", "geom"}, [&](const auto& f, std::size_t) {
    db.regions.push_back({std::string(f[0]), parse_geometry(f[1])});
  });
  load_table(dir / "boxes.tsv", {"times", "box"}, [&](const auto& f, std::size_t) {
    db.boxes.push_back({parse_timestamp(f[0]), parse(f[1], TypeTag::stbox).template as<STBox>()});
  });
  load_table(dir / "indexes.tsv", {"table"}, [&](const auto& f, std::size_t line) {
    if (f[0] == "trips") {
      db.build_trip_index();
    } else if (f[0] == "boxes") {
      db.build_box_index();
    } else {
      throw DataError("unknown index '" + std::string(f[0]) + "'", line);
    }
  });
  return db;
}

}  // namespace mobkit::workbench
