#pragma once

#include <optional>
#include <variant>

#include "mobkit/geometry.hpp"
#include "mobkit/span.hpp"
#include "mobkit/time.hpp"

namespace mobkit {

/// Closed planar extent of an STBox.
struct XYRange {
  double xmin;
  double ymin;
  double xmax;
  double ymax;

  friend bool operator==(const XYRange&, const XYRange&) = default;
};

/// Spatiotemporal bounding box. At least one of the spatial or time
/// dimensions is present.
class STBox {
 public:
  STBox(std::optional<XYRange> xy, std::optional<Span<Timestamp>> t, Srid srid = std::nullopt);

  static STBox from_xy(double xmin, double ymin, double xmax, double ymax, Srid srid = std::nullopt) {
    return STBox(XYRange{xmin, ymin, xmax, ymax}, std::nullopt, srid);
  }

  const std::optional<XYRange>& xy() const noexcept { return xy_; }
  const std::optional<Span<Timestamp>>& t() const noexcept { return t_; }
  const Srid& srid() const noexcept { return srid_; }
  bool has_xy() const noexcept { return xy_.has_value(); }
  bool has_t() const noexcept { return t_.has_value(); }

  friend bool operator==(const STBox&, const STBox&) = default;

 private:
  std::optional<XYRange> xy_;
  std::optional<Span<Timestamp>> t_;
  Srid srid_;
};

/// Value-time bounding box over an int or float value span.
class TBox {
 public:
  using ValueSpan = std::variant<Span<std::int32_t>, Span<double>>;

  TBox(std::optional<ValueSpan> value, std::optional<Span<Timestamp>> t);

  const std::optional<ValueSpan>& value() const noexcept { return value_; }
  const std::optional<Span<Timestamp>>& t() const noexcept { return t_; }

  friend bool operator==(const TBox&, const TBox&) = default;

 private:
  std::optional<ValueSpan> value_;
  std::optional<Span<Timestamp>> t_;
};

/// Widens x and y by `d` on each side. Throws InvalidValue when the box has
/// no spatial dimension or a negative `d` would invert an axis.
STBox expand_space(const STBox& b, double d);

/// Widens the time span by `i` on each side. Throws InvalidValue without a
/// time dimension.
STBox expand_time(const STBox& b, Interval i);
TBox expand_time(const TBox& b, Interval i);

/// `&&`: every dimension present in both boxes intersects. Dimensions
/// present on one side only are ignored. Throws SridMismatch.
bool overlaps(const STBox& a, const STBox& b);

/// Every dimension of `b` shared with `a` lies within `a`.
bool contains(const STBox& a, const STBox& b);

/// Per-axis hull of two boxes with the same dimensions and SRID.
STBox union_mbr(const STBox& a, const STBox& b);

STBox geometry_to_stbox(const Geometry& g);

/// Span hull of two time spans.
Span<Timestamp> span_hull(const Span<Timestamp>& a, const Span<Timestamp>& b);

}  // namespace mobkit
