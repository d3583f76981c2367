#include "mobkit/tgeo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mobkit/error.hpp"

namespace mobkit {

namespace {

using TimeSpan = Span<Timestamp>;

std::vector<const TSequence<Point>*> sequences_of(const TGeomPoint& tp) {
  std::vector<const TSequence<Point>*> out;
  if (const auto* seq = std::get_if<TSequence<Point>>(&tp.rep())) {
    out.push_back(seq);
  } else if (const auto* ss = std::get_if<TSequenceSet<Point>>(&tp.rep())) {
    for (const auto& s : ss->sequences()) out.push_back(&s);
  }
  return out;
}

Geometry points_geometry(const std::vector<Point>& pts) {
  if (pts.size() == 1) return Geometry(pts.front());
  Collection c;
  for (const Point& p : pts) c.items.emplace_back(p);
  c.kind = CollectionKind::multipoint;
  return Geometry(std::move(c));
}

void push_distinct(std::vector<Point>& pts, const Point& p) {
  if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
}

Geometry linear_trace(const TSequence<Point>& seq) {
  std::vector<Point> pts;
  for (const auto& inst : seq.instants())
    if (pts.empty() || pts.back() != inst.value) pts.push_back(inst.value);
  if (pts.size() == 1) return Geometry(pts.front());
  return Geometry(LineString{std::move(pts)});
}

std::vector<const Polygon*> region_polygons(const Geometry& g) {
  std::vector<const Polygon*> out;
  std::visit(
      [&out](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Polygon>) {
          out.push_back(&s);
        } else if constexpr (std::is_same_v<S, Collection>) {
          for (const Geometry& item : s.items) {
            auto sub = region_polygons(item);
            out.insert(out.end(), sub.begin(), sub.end());
          }
        } else {
          throw InvalidValue("at_geometry expects a polygon or a collection of polygons");
        }
      },
      g.shape());
  return out;
}

bool inside_any(const Point& p, const std::vector<const Polygon*>& polys) {
  for (const Polygon* poly : polys)
    if (point_in_polygon(p, *poly)) return true;
  return false;
}

// Parameters in [0, 1] where segment p0->p1 meets the boundary of `polys`.
void boundary_params(const Point& p0, const Point& p1, const std::vector<const Polygon*>& polys,
                     std::vector<double>& out) {
  const double dx = p1.x - p0.x;
  const double dy = p1.y - p0.y;
  const double len2 = dx * dx + dy * dy;
  auto project = [&](const Point& q) { return ((q.x - p0.x) * dx + (q.y - p0.y) * dy) / len2; };
  for (const Polygon* poly : polys) {
    for (const auto& ring : poly->rings) {
      for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const Point& e0 = ring[i];
        const Point& e1 = ring[i + 1];
        if (!segments_intersect(p0, p1, e0, e1)) continue;
        const double ex = e1.x - e0.x;
        const double ey = e1.y - e0.y;
        const double denom = dx * ey - dy * ex;
        if (denom != 0) {
          double f = ((e0.x - p0.x) * ey - (e0.y - p0.y) * ex) / denom;
          out.push_back(std::clamp(f, 0.0, 1.0));
        } else {
          // Collinear overlap: the edge endpoints bound the shared stretch.
          out.push_back(std::clamp(project(e0), 0.0, 1.0));
          out.push_back(std::clamp(project(e1), 0.0, 1.0));
        }
      }
    }
  }
}

void add_span(std::vector<TimeSpan>& out, Timestamp lo, Timestamp hi, bool lo_inc, bool hi_inc) {
  if (lo == hi) {
    if (lo_inc && hi_inc) out.push_back(TimeSpan::singleton(lo));
    return;
  }
  if (lo < hi) out.emplace_back(lo, hi, lo_inc, hi_inc);
}

// Times at which a continuous sequence lies inside the region.
void inside_spans(const TSequence<Point>& seq, const std::vector<const Polygon*>& polys,
                  std::vector<TimeSpan>& out) {
  const auto& in = seq.instants();
  if (in.size() == 1) {
    if (inside_any(in[0].value, polys)) out.push_back(TimeSpan::singleton(in[0].t));
    return;
  }
  std::vector<TimeSpan> raw;
  for (std::size_t i = 0; i + 1 < in.size(); ++i) {
    const auto& a = in[i];
    const auto& b = in[i + 1];
    if (seq.interp() == Interp::step || a.value == b.value) {
      bool step = seq.interp() == Interp::step;
      if (inside_any(a.value, polys)) add_span(raw, a.t, b.t, true, !step);
      continue;
    }
    std::vector<double> params{0.0, 1.0};
    boundary_params(a.value, b.value, polys, params);
    std::sort(params.begin(), params.end());
    params.erase(std::unique(params.begin(), params.end()), params.end());
    auto at = [&](double f) {
      return Point{a.value.x + (b.value.x - a.value.x) * f, a.value.y + (b.value.y - a.value.y) * f};
    };
    for (std::size_t k = 0; k < params.size(); ++k) {
      Timestamp tk = detail::lerp_time(a.t, b.t, params[k]);
      if (inside_any(at(params[k]), polys)) add_span(raw, tk, tk, true, true);
      if (k + 1 < params.size()) {
        double mid = 0.5 * (params[k] + params[k + 1]);
        if (inside_any(at(mid), polys))
          add_span(raw, tk, detail::lerp_time(a.t, b.t, params[k + 1]), true, true);
      }
    }
  }
  if (seq.interp() == Interp::step && inside_any(in.back().value, polys))
    raw.push_back(TimeSpan::singleton(in.back().t));
  if (raw.empty()) return;
  auto clipped = intersection(SpanSet<Timestamp>(std::move(raw)), SpanSet<Timestamp>({seq.time_span()}));
  if (clipped) out.insert(out.end(), clipped->spans().begin(), clipped->spans().end());
}

// Parameter interval within [0, 1] where |c + tau * e| <= d.
std::optional<std::pair<double, double>> within_params(double cx, double cy, double ex, double ey,
                                                       double d) {
  const double qa = ex * ex + ey * ey;
  const double qc = cx * cx + cy * cy - d * d;
  if (qa == 0) {
    if (qc <= 0) return std::make_pair(0.0, 1.0);
    return std::nullopt;
  }
  const double qb = 2 * (cx * ex + cy * ey);
  const double disc = qb * qb - 4 * qa * qc;
  if (disc < 0) return std::nullopt;
  double r1, r2;
  if (disc == 0) {
    r1 = r2 = -qb / (2 * qa);
  } else {
    // Stable form: avoid subtracting nearly equal quantities.
    const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
    r1 = q / qa;
    r2 = q != 0 ? qc / q : -r1;
    if (r1 > r2) std::swap(r1, r2);
  }
  double lo = std::max(r1, 0.0);
  double hi = std::min(r2, 1.0);
  if (lo > hi) return std::nullopt;
  return std::make_pair(lo, hi);
}

using BoolSeq = TSequence<bool>;

// Appends a constant piece, stitching onto the previous step sequence when
// the two meet at one timestamp.
void append_piece(std::vector<BoolSeq>& seqs, bool v, Timestamp lo, Timestamp hi, bool lo_inc,
                  bool hi_inc) {
  std::vector<TInstant<bool>> inst;
  if (lo == hi) {
    inst = {{v, lo}};
  } else {
    inst = {{v, lo}, {v, hi}};
  }
  BoolSeq piece(std::move(inst), Interp::step, lo_inc, hi_inc);
  if (!seqs.empty()) {
    BoolSeq& cur = seqs.back();
    if (cur.end_time() == piece.start_time()) {
      std::vector<TInstant<bool>> merged = cur.instants();
      if (!cur.upper_inc() && piece.lower_inc()) {
        merged.pop_back();
        merged.insert(merged.end(), piece.instants().begin(), piece.instants().end());
        cur = BoolSeq(std::move(merged), Interp::step, cur.lower_inc(), piece.upper_inc());
        return;
      }
      if (merged.back().value == v) {
        merged.insert(merged.end(), piece.instants().begin() + 1, piece.instants().end());
        cur = BoolSeq(std::move(merged), Interp::step, cur.lower_inc(), piece.upper_inc());
        return;
      }
    }
  }
  seqs.push_back(std::move(piece));
}

}  // namespace

TGeomPoint tgeometry_from(const Geometry& g, const TimeSpan& s, Interp interp) {
  if (!g.is_point()) throw InvalidValue("tgeometry requires a point geometry");
  if (interp == Interp::discrete) throw InvalidValue("tgeometry interpolation must be step or linear");
  const Point& p = g.as_point();
  if (s.lower() == s.upper()) return TGeomPoint(TInstant<Point>{p, s.lower()}, g.srid());
  return TGeomPoint(TSequence<Point>({{p, s.lower()}, {p, s.upper()}}, interp, s.lower_inc(), s.upper_inc()),
                    g.srid());
}

Geometry trajectory(const TGeomPoint& tp) {
  if (const auto* inst = std::get_if<TInstant<Point>>(&tp.rep())) return Geometry(inst->value, tp.srid());
  if (tp.interp() != Interp::linear) {
    std::vector<Point> pts;
    for (const auto& inst : tp.instants()) push_distinct(pts, inst.value);
    return points_geometry(pts).with_srid(tp.srid());
  }
  auto seqs = sequences_of(tp);
  if (seqs.size() == 1) return linear_trace(*seqs.front()).with_srid(tp.srid());
  Collection c;
  for (const auto* seq : seqs) c.items.push_back(linear_trace(*seq));
  c.kind = infer_collection_kind(c.items);
  return Geometry(std::move(c), tp.srid());
}

double length(const TGeomPoint& tp) {
  if (tp.interp() != Interp::linear) return 0;
  double total = 0;
  for (const auto* seq : sequences_of(tp)) {
    const auto& in = seq->instants();
    for (std::size_t i = 0; i + 1 < in.size(); ++i) total += point_distance(in[i].value, in[i + 1].value);
  }
  return total;
}

std::optional<TGeomPoint> at_geometry(const TGeomPoint& tp, const Geometry& g) {
  check_same_srid(tp.srid(), g.srid());
  auto polys = region_polygons(g);
  if (tp.interp() == Interp::discrete) {
    std::vector<TimeSpan> spans;
    for (const auto& inst : tp.instants())
      if (inside_any(inst.value, polys)) spans.push_back(TimeSpan::singleton(inst.t));
    if (spans.empty()) return std::nullopt;
    return at_time(tp, SpanSet<Timestamp>(std::move(spans)));
  }
  std::vector<TimeSpan> spans;
  for (const auto* seq : sequences_of(tp)) inside_spans(*seq, polys, spans);
  if (spans.empty()) return std::nullopt;
  return at_time(tp, SpanSet<Timestamp>(std::move(spans)));
}

std::optional<TBool> t_dwithin(const TGeomPoint& a, const TGeomPoint& b, double d) {
  if (!(d >= 0)) throw InvalidValue("tDwithin distance must be non-negative");
  check_same_srid(a.srid(), b.srid());
  auto pieces = detail::synchronize_pieces(a, b);
  if (pieces.empty()) return std::nullopt;

  const double d2 = d * d;
  auto close = [d2](const Point& p, const Point& q) {
    double dx = p.x - q.x;
    double dy = p.y - q.y;
    return dx * dx + dy * dy <= d2;
  };

  if (pieces.front().interp_a == Interp::discrete) {
    const auto& p = pieces.front();
    std::vector<TInstant<bool>> inst;
    for (std::size_t i = 0; i < p.times.size(); ++i) inst.push_back({close(p.a[i], p.b[i]), p.times[i]});
    return TBool(TSequence<bool>(std::move(inst), Interp::discrete));
  }

  std::vector<BoolSeq> seqs;
  for (const auto& p : pieces) {
    const std::size_t m = p.times.size();
    std::vector<TimeSpan> truths;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const Point& a0 = p.a[k];
      const Point& b0 = p.b[k];
      double ex = 0, ey = 0;
      if (p.interp_a == Interp::linear) {
        ex += p.a[k + 1].x - a0.x;
        ey += p.a[k + 1].y - a0.y;
      }
      if (p.interp_b == Interp::linear) {
        ex -= p.b[k + 1].x - b0.x;
        ey -= p.b[k + 1].y - b0.y;
      }
      auto range = within_params(a0.x - b0.x, a0.y - b0.y, ex, ey, d);
      if (!range) continue;
      auto [lo, hi] = *range;
      Timestamp t_lo = detail::lerp_time(p.times[k], p.times[k + 1], lo);
      if (hi >= 1) {
        // The segment end belongs to the next segment (or the final instant).
        add_span(truths, t_lo, p.times[k + 1], true, false);
      } else {
        add_span(truths, t_lo, detail::lerp_time(p.times[k], p.times[k + 1], hi), true, true);
      }
    }
    if (close(p.a[m - 1], p.b[m - 1])) truths.push_back(TimeSpan::singleton(p.times[m - 1]));

    const TimeSpan domain(p.times.front(), p.times.back(), p.lower_inc, p.upper_inc);
    std::vector<TimeSpan> true_spans;
    if (!truths.empty()) {
      if (auto clipped = intersection(SpanSet<Timestamp>(std::move(truths)), SpanSet<Timestamp>({domain})))
        true_spans = clipped->spans();
    }

    Timestamp cursor = domain.lower();
    bool cursor_inc = domain.lower_inc();
    for (const auto& s : true_spans) {
      bool gap = cursor < s.lower() || (cursor == s.lower() && cursor_inc && !s.lower_inc());
      if (gap) append_piece(seqs, false, cursor, s.lower(), cursor_inc, !s.lower_inc());
      append_piece(seqs, true, s.lower(), s.upper(), s.lower_inc(), s.upper_inc());
      cursor = s.upper();
      cursor_inc = !s.upper_inc();
    }
    bool tail = cursor < domain.upper() || (cursor == domain.upper() && cursor_inc && domain.upper_inc());
    if (tail) append_piece(seqs, false, cursor, domain.upper(), cursor_inc, domain.upper_inc());
  }
  if (seqs.size() == 1) return TBool(std::move(seqs.front()));
  return TBool(TSequenceSet<bool>(std::move(seqs)));
}

bool e_dwithin(const TGeomPoint& a, const TGeomPoint& b, double d) {
  auto tb = t_dwithin(a, b, d);
  return tb && when_true(*tb).has_value();
}

bool e_intersects(const TGeomPoint& tp, const Geometry& g) { return intersects(trajectory(tp), g); }

STBox to_stbox(const TGeomPoint& tp) {
  double inf = std::numeric_limits<double>::infinity();
  XYRange r{inf, inf, -inf, -inf};
  for (const auto& inst : tp.instants()) {
    r.xmin = std::min(r.xmin, inst.value.x);
    r.ymin = std::min(r.ymin, inst.value.y);
    r.xmax = std::max(r.xmax, inst.value.x);
    r.ymax = std::max(r.ymax, inst.value.y);
  }
  return STBox(r, to_tstzspan(tp), tp.srid());
}

bool overlaps(const TGeomPoint& tp, const STBox& box) { return overlaps(to_stbox(tp), box); }

}  // namespace mobkit
