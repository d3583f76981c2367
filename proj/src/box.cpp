#include "mobkit/box.hpp"

#include <algorithm>

#include "mobkit/error.hpp"

namespace mobkit {

namespace {

bool ranges_overlap(const XYRange& a, const XYRange& b) {
  return a.xmin <= b.xmax && b.xmin <= a.xmax && a.ymin <= b.ymax && b.ymin <= a.ymax;
}

bool range_within(const XYRange& outer, const XYRange& inner) {
  return outer.xmin <= inner.xmin && inner.xmax <= outer.xmax && outer.ymin <= inner.ymin &&
         inner.ymax <= outer.ymax;
}

bool span_within(const Span<Timestamp>& outer, const Span<Timestamp>& inner) {
  bool lower_ok = outer.lower() < inner.lower() ||
                  (outer.lower() == inner.lower() && (outer.lower_inc() || !inner.lower_inc()));
  bool upper_ok = inner.upper() < outer.upper() ||
                  (outer.upper() == inner.upper() && (outer.upper_inc() || !inner.upper_inc()));
  return lower_ok && upper_ok;
}

}  // namespace

STBox::STBox(std::optional<XYRange> xy, std::optional<Span<Timestamp>> t, Srid srid)
    : xy_(xy), t_(t), srid_(srid) {
  if (!xy_ && !t_) throw InvalidValue("stbox needs a spatial or a time dimension");
  if (xy_ && (!(xy_->xmin <= xy_->xmax) || !(xy_->ymin <= xy_->ymax)))
    throw InvalidValue("stbox minimum exceeds maximum");
}

TBox::TBox(std::optional<ValueSpan> value, std::optional<Span<Timestamp>> t)
    : value_(std::move(value)), t_(t) {
  if (!value_ && !t_) throw InvalidValue("tbox needs a value or a time dimension");
}

STBox expand_space(const STBox& b, double d) {
  if (!b.has_xy()) throw InvalidValue("expand_space requires a spatial dimension");
  const XYRange& r = *b.xy();
  XYRange out{r.xmin - d, r.ymin - d, r.xmax + d, r.ymax + d};
  if (out.xmin > out.xmax || out.ymin > out.ymax)
    throw InvalidValue("expand_space distance collapses the box");
  return STBox(out, b.t(), b.srid());
}

STBox expand_time(const STBox& b, Interval i) {
  if (!b.has_t()) throw InvalidValue("expand_time requires a time dimension");
  const auto& t = *b.t();
  return STBox(b.xy(), Span<Timestamp>(t.lower() - i, t.upper() + i, t.lower_inc(), t.upper_inc()),
               b.srid());
}

TBox expand_time(const TBox& b, Interval i) {
  if (!b.t()) throw InvalidValue("expand_time requires a time dimension");
  const auto& t = *b.t();
  return TBox(b.value(), Span<Timestamp>(t.lower() - i, t.upper() + i, t.lower_inc(), t.upper_inc()));
}

bool overlaps(const STBox& a, const STBox& b) {
  check_same_srid(a.srid(), b.srid());
  if (a.has_xy() && b.has_xy() && !ranges_overlap(*a.xy(), *b.xy())) return false;
  if (a.has_t() && b.has_t() && !a.t()->overlaps(*b.t())) return false;
  return true;
}

bool contains(const STBox& a, const STBox& b) {
  check_same_srid(a.srid(), b.srid());
  if (a.has_xy() && b.has_xy() && !range_within(*a.xy(), *b.xy())) return false;
  if (a.has_t() && b.has_t() && !span_within(*a.t(), *b.t())) return false;
  return true;
}

Span<Timestamp> span_hull(const Span<Timestamp>& a, const Span<Timestamp>& b) {
  Timestamp lo = std::min(a.lower(), b.lower());
  bool lo_inc = (a.lower() == lo && a.lower_inc()) || (b.lower() == lo && b.lower_inc());
  Timestamp hi = std::max(a.upper(), b.upper());
  bool hi_inc = (a.upper() == hi && a.upper_inc()) || (b.upper() == hi && b.upper_inc());
  return Span<Timestamp>(lo, hi, lo_inc, hi_inc);
}

STBox union_mbr(const STBox& a, const STBox& b) {
  check_same_srid(a.srid(), b.srid());
  if (a.has_xy() != b.has_xy() || a.has_t() != b.has_t())
    throw InvalidValue("union_mbr requires boxes with the same dimensions");
  std::optional<XYRange> xy;
  if (a.has_xy()) {
    const auto& p = *a.xy();
    const auto& q = *b.xy();
    xy = XYRange{std::min(p.xmin, q.xmin), std::min(p.ymin, q.ymin), std::max(p.xmax, q.xmax),
                 std::max(p.ymax, q.ymax)};
  }
  std::optional<Span<Timestamp>> t;
  if (a.has_t()) t = span_hull(*a.t(), *b.t());
  return STBox(xy, t, a.srid());
}

STBox geometry_to_stbox(const Geometry& g) {
  Extent e = extent_of(g);
  return STBox(XYRange{e.xmin, e.ymin, e.xmax, e.ymax}, std::nullopt, g.srid());
}

}  // namespace mobkit
