#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace mobkit {

using Srid = std::optional<std::int32_t>;

struct Point {
  double x = 0;
  double y = 0;

  friend auto operator<=>(const Point&, const Point&) = default;
};

struct LineString {
  std::vector<Point> points;

  friend bool operator==(const LineString&, const LineString&) = default;
};

/// First ring is the shell, the rest are holes. Each ring is closed.
struct Polygon {
  std::vector<std::vector<Point>> rings;

  friend bool operator==(const Polygon&, const Polygon&) = default;
};

class Geometry;

/// MULTI* kinds hold members of a single simple type.
enum class CollectionKind { multipoint, multilinestring, multipolygon, mixed };

struct Collection {
  std::vector<Geometry> items;
  CollectionKind kind = CollectionKind::mixed;

  friend bool operator==(const Collection&, const Collection&);
};

/// Narrowest collection kind that holds `items`.
CollectionKind infer_collection_kind(const std::vector<Geometry>& items);

/// Planar 2-D geometry with an optional SRID tag.
///
/// Construction validates the shape: linestrings have at least two points,
/// polygon rings are closed with at least four points, collections are
/// non-empty. Members of a collection carry no SRID of their own.
class Geometry {
 public:
  using Shape = std::variant<Point, LineString, Polygon, Collection>;

  Geometry(Point p, Srid srid = std::nullopt);
  Geometry(LineString l, Srid srid = std::nullopt);
  Geometry(Polygon p, Srid srid = std::nullopt);
  Geometry(Collection c, Srid srid = std::nullopt);

  const Shape& shape() const noexcept { return shape_; }
  const Srid& srid() const noexcept { return srid_; }
  Geometry with_srid(Srid srid) const;

  bool is_point() const { return std::holds_alternative<Point>(shape_); }
  bool is_polygon() const { return std::holds_alternative<Polygon>(shape_); }
  const Point& as_point() const;
  const Polygon& as_polygon() const;

  friend bool operator==(const Geometry&, const Geometry&) = default;

 private:
  Shape shape_;
  Srid srid_;
};

inline bool operator==(const Collection& a, const Collection& b) {
  return a.kind == b.kind && a.items == b.items;
}

/// Axis-aligned extent of a geometry.
struct Extent {
  double xmin, ymin, xmax, ymax;
};

Extent extent_of(const Geometry& g);

/// Throws SridMismatch unless both SRIDs are equal (including both absent).
void check_same_srid(const Srid& a, const Srid& b);

double point_distance(const Point& a, const Point& b);
double point_segment_distance(const Point& p, const Point& a, const Point& b);
double segment_distance(const Point& a0, const Point& a1, const Point& b0, const Point& b1);
bool segments_intersect(const Point& a0, const Point& a1, const Point& b0, const Point& b1);

/// Even-odd rule over all rings; points on any ring boundary count as inside.
bool point_in_polygon(const Point& p, const Polygon& poly);

/// Minimum Euclidean distance; 0 when the shapes share a point.
double distance(const Geometry& a, const Geometry& b);
bool intersects(const Geometry& a, const Geometry& b);

/// Collection of `parts` in order, typed as the narrowest MULTI* kind. Throws InvalidValue on empty input and
/// SridMismatch when the parts disagree on SRID.
Geometry collect(std::span<const Geometry> parts);

}  // namespace mobkit
