#include "mobkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mobkit/error.hpp"

namespace mobkit {

namespace {

struct Segment {
  Point a;
  Point b;
  Extent box;
};

Extent segment_box(const Point& a, const Point& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
}

// Flattened view of a geometry for pairwise kernels.
struct Parts {
  std::vector<Point> points;
  std::vector<Segment> segments;
  std::vector<const Polygon*> polygons;
  std::vector<Point> vertices;
  Extent box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  void grow(const Point& p) {
    box.xmin = std::min(box.xmin, p.x);
    box.ymin = std::min(box.ymin, p.y);
    box.xmax = std::max(box.xmax, p.x);
    box.ymax = std::max(box.ymax, p.y);
  }

  void add_path(const std::vector<Point>& pts) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      segments.push_back({pts[i], pts[i + 1], segment_box(pts[i], pts[i + 1])});
    for (const Point& p : pts) {
      vertices.push_back(p);
      grow(p);
    }
  }

  void add(const Geometry& g) {
    std::visit(
        [this](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Point>) {
            points.push_back(s);
            vertices.push_back(s);
            grow(s);
          } else if constexpr (std::is_same_v<S, LineString>) {
            add_path(s.points);
          } else if constexpr (std::is_same_v<S, Polygon>) {
            polygons.push_back(&s);
            for (const auto& ring : s.rings) add_path(ring);
          } else {
            for (const Geometry& item : s.items) add(item);
          }
        },
        g.shape());
  }
};

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool within_box(const Point& p, const Point& a, const Point& b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool on_segment(const Point& p, const Point& a, const Point& b) {
  return cross(a, b, p) == 0 && within_box(p, a, b);
}

bool boxes_disjoint(const Extent& a, const Extent& b) {
  return a.xmax < b.xmin || b.xmax < a.xmin || a.ymax < b.ymin || b.ymax < a.ymin;
}

double box_gap_sq(const Extent& a, const Extent& b) {
  double dx = std::max({0.0, b.xmin - a.xmax, a.xmin - b.xmax});
  double dy = std::max({0.0, b.ymin - a.ymax, a.ymin - b.ymax});
  return dx * dx + dy * dy;
}

void validate_ring(const std::vector<Point>& ring) {
  if (ring.size() < 4) throw InvalidValue("polygon ring needs at least 4 points");
  if (ring.front() != ring.back()) throw InvalidValue("polygon ring is not closed");
}

void validate(const Geometry::Shape& shape) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LineString>) {
          if (s.points.size() < 2) throw InvalidValue("linestring needs at least 2 points");
        } else if constexpr (std::is_same_v<S, Polygon>) {
          if (s.rings.empty()) throw InvalidValue("polygon needs an outer ring");
          for (const auto& ring : s.rings) validate_ring(ring);
        } else if constexpr (std::is_same_v<S, Collection>) {
          if (s.items.empty()) throw InvalidValue("empty geometry collection");
          if (s.kind != CollectionKind::mixed && infer_collection_kind(s.items) != s.kind)
            throw InvalidValue("multi-geometry members must share one simple type");
        }
      },
      shape);
}

bool parts_intersect(const Parts& pa, const Parts& pb) {
  if (boxes_disjoint(pa.box, pb.box)) return false;

  for (const Point& p : pa.points) {
    for (const Point& q : pb.points)
      if (p == q) return true;
  }
  auto point_hits = [](const Parts& ps, const Parts& other) {
    for (const Point& p : ps.points) {
      for (const Segment& s : other.segments)
        if (on_segment(p, s.a, s.b)) return true;
    }
    return false;
  };
  if (point_hits(pa, pb) || point_hits(pb, pa)) return true;

  for (const Segment& s : pa.segments) {
    if (boxes_disjoint(s.box, pb.box)) continue;
    for (const Segment& t : pb.segments) {
      if (boxes_disjoint(s.box, t.box)) continue;
      if (segments_intersect(s.a, s.b, t.a, t.b)) return true;
    }
  }

  // No boundary contact: containment is decided by any single vertex.
  auto contained = [](const Parts& ps, const Parts& other) {
    for (const Polygon* poly : other.polygons) {
      for (const Point& v : ps.vertices)
        if (point_in_polygon(v, *poly)) return true;
    }
    return false;
  };
  return contained(pa, pb) || contained(pb, pa);
}

}  // namespace

Geometry::Geometry(Point p, Srid srid) : shape_(p), srid_(srid) {}

Geometry::Geometry(LineString l, Srid srid) : shape_(std::move(l)), srid_(srid) { validate(shape_); }

Geometry::Geometry(Polygon p, Srid srid) : shape_(std::move(p)), srid_(srid) { validate(shape_); }

Geometry::Geometry(Collection c, Srid srid) : shape_(std::move(c)), srid_(srid) {
  validate(shape_);
}

Geometry Geometry::with_srid(Srid srid) const {
  Geometry g = *this;
  g.srid_ = srid;
  return g;
}

const Point& Geometry::as_point() const {
  if (!is_point()) throw InvalidValue("geometry is not a point");
  return std::get<Point>(shape_);
}

const Polygon& Geometry::as_polygon() const {
  if (!is_polygon()) throw InvalidValue("geometry is not a polygon");
  return std::get<Polygon>(shape_);
}

Extent extent_of(const Geometry& g) {
  Parts p;
  p.add(g);
  return p.box;
}

void check_same_srid(const Srid& a, const Srid& b) {
  if (a != b) {
    auto show = [](const Srid& s) { return s ? std::to_string(*s) : std::string("none"); };
    throw SridMismatch("SRID mismatch: " + show(a) + " vs " + show(b));
  }
}

double point_distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  double dx = b.x - a.x;
  double dy = b.y - a.y;
  double len2 = dx * dx + dy * dy;
  if (len2 == 0) return point_distance(p, a);
  double f = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  f = std::clamp(f, 0.0, 1.0);
  return std::hypot(p.x - (a.x + f * dx), p.y - (a.y + f * dy));
}

bool segments_intersect(const Point& a0, const Point& a1, const Point& b0, const Point& b1) {
  double d1 = cross(b0, b1, a0);
  double d2 = cross(b0, b1, a1);
  double d3 = cross(a0, a1, b0);
  double d4 = cross(a0, a1, b1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && within_box(a0, b0, b1)) return true;
  if (d2 == 0 && within_box(a1, b0, b1)) return true;
  if (d3 == 0 && within_box(b0, a0, a1)) return true;
  if (d4 == 0 && within_box(b1, a0, a1)) return true;
  return false;
}

double segment_distance(const Point& a0, const Point& a1, const Point& b0, const Point& b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

bool point_in_polygon(const Point& p, const Polygon& poly) {
  bool inside = false;
  for (const auto& ring : poly.rings) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      const Point& a = ring[i];
      const Point& b = ring[j];
      if (on_segment(p, a, b)) return true;
      if ((a.y > p.y) != (b.y > p.y)) {
        double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x_cross) inside = !inside;
      }
    }
  }
  return inside;
}

bool intersects(const Geometry& a, const Geometry& b) {
  check_same_srid(a.srid(), b.srid());
  Parts pa, pb;
  pa.add(a);
  pb.add(b);
  return parts_intersect(pa, pb);
}

double distance(const Geometry& a, const Geometry& b) {
  check_same_srid(a.srid(), b.srid());
  Parts pa, pb;
  pa.add(a);
  pb.add(b);
  if (parts_intersect(pa, pb)) return 0;

  double best_sq = std::numeric_limits<double>::infinity();
  auto consider = [&best_sq](double d) { best_sq = std::min(best_sq, d * d); };

  for (const Point& p : pa.points) {
    for (const Point& q : pb.points) consider(point_distance(p, q));
    for (const Segment& s : pb.segments) {
      Extent pbox{p.x, p.y, p.x, p.y};
      if (box_gap_sq(pbox, s.box) >= best_sq) continue;
      consider(point_segment_distance(p, s.a, s.b));
    }
  }
  for (const Point& q : pb.points) {
    Extent qbox{q.x, q.y, q.x, q.y};
    for (const Segment& s : pa.segments) {
      if (box_gap_sq(qbox, s.box) >= best_sq) continue;
      consider(point_segment_distance(q, s.a, s.b));
    }
  }

  // Sweep b's segments ordered by xmin so each a-segment scans a bounded window.
  std::vector<const Segment*> sorted;
  sorted.reserve(pb.segments.size());
  for (const Segment& t : pb.segments) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(),
            [](const Segment* l, const Segment* r) { return l->box.xmin < r->box.xmin; });
  for (const Segment& s : pa.segments) {
    for (const Segment* t : sorted) {
      double reach = std::sqrt(best_sq);
      if (t->box.xmin > s.box.xmax + reach) break;
      if (box_gap_sq(s.box, t->box) >= best_sq) continue;
      consider(segment_distance(s.a, s.b, t->a, t->b));
    }
  }
  return std::sqrt(best_sq);
}

Geometry collect(std::span<const Geometry> parts) {
  if (parts.empty()) throw InvalidValue("collect requires at least one geometry");
  Srid srid = parts.front().srid();
  Collection c;
  c.items.reserve(parts.size());
  for (const Geometry& g : parts) {
    check_same_srid(srid, g.srid());
    c.items.push_back(g.with_srid(std::nullopt));
  }
  c.kind = infer_collection_kind(c.items);
  return Geometry(std::move(c), srid);
}

CollectionKind infer_collection_kind(const std::vector<Geometry>& items) {
  if (items.empty()) return CollectionKind::mixed;
  std::size_t first = items.front().shape().index();
  for (const Geometry& g : items)
    if (g.shape().index() != first) return CollectionKind::mixed;
  switch (first) {
    case 0: return CollectionKind::multipoint;
    case 1: return CollectionKind::multilinestring;
    case 2: return CollectionKind::multipolygon;
    default: return CollectionKind::mixed;
  }
}

}  // namespace mobkit
