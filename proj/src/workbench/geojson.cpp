#include "mobkit/workbench/geojson.hpp"

#include <fstream>
#include <json.hpp>

#include "mobkit/text_io.hpp"

namespace mobkit::workbench {

namespace {

using nlohmann::json;

json position(const Point& p) { return json::array({p.x, p.y}); }

json positions(const std::vector<Point>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(position(p));
  return out;
}

json rings(const Polygon& poly) {
  json out = json::array();
  for (const auto& r : poly.rings) out.push_back(positions(r));
  return out;
}

json geometry_json(const Geometry& g) {
  return std::visit(
      [](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Point>) {
          return {{"type", "Point"}, {"coordinates", position(s)}};
        } else if constexpr (std::is_same_v<S, LineString>) {
          return {{"type", "LineString"}, {"coordinates", positions(s.points)}};
        } else if constexpr (std::is_same_v<S, Polygon>) {
          return {{"type", "Polygon"}, {"coordinates", rings(s)}};
        } else {
          json coords = json::array();
          switch (s.kind) {
            case CollectionKind::multipoint:
              for (const auto& item : s.items) coords.push_back(position(std::get<Point>(item.shape())));
              return {{"type", "MultiPoint"}, {"coordinates", coords}};
            case CollectionKind::multilinestring:
              for (const auto& item : s.items) coords.push_back(positions(std::get<LineString>(item.shape()).points));
              return {{"type", "MultiLineString"}, {"coordinates", coords}};
            case CollectionKind::multipolygon:
              for (const auto& item : s.items) coords.push_back(rings(std::get<Polygon>(item.shape())));
              return {{"type", "MultiPolygon"}, {"coordinates", coords}};
            case CollectionKind::mixed:
              break;
          }
          json members = json::array();
          for (const auto& item : s.items) members.push_back(geometry_json(item));
          return {{"type", "GeometryCollection"}, {"geometries", members}};
        }
      },
      g.shape());
}

json property(const Cell& c) {
  if (std::holds_alternative<std::monostate>(c)) return nullptr;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  if (const auto* d = std::get_if<double>(&c)) return *d;
  return cell_text(c);
}

}  // namespace

std::string to_geojson(const ResultSet& rs) {
  std::optional<std::size_t> geom_col;
  for (const auto& row : rs.rows) {
    for (std::size_t i = 0; i < row.size() && !geom_col; ++i)
      if (std::holds_alternative<Geometry>(row[i])) geom_col = i;
    if (geom_col) break;
  }
  if (!rs.rows.empty() && !geom_col) throw DataError("result has no geometry column");

  json features = json::array();
  for (const auto& row : rs.rows) {
    json props = json::object();
    for (std::size_t i = 0; i < row.size(); ++i)
      if (i != *geom_col) props[i < rs.columns.size() ? rs.columns[i] : "col" + std::to_string(i)] = property(row[i]);
    const auto* g = std::get_if<Geometry>(&row[*geom_col]);
    features.push_back({{"type", "Feature"}, {"geometry", g ? geometry_json(*g) : json(nullptr)}, {"properties", props}});
  }
  return json{{"type", "FeatureCollection"}, {"features", features}}.dump(2);
}

void export_geojson(const ResultSet& rs, const std::filesystem::path& path) {
  std::string text = to_geojson(rs);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace mobkit::workbench
