#pragma once

#include <optional>

#include "mobkit/box.hpp"
#include "mobkit/geometry.hpp"
#include "mobkit/temporal.hpp"

namespace mobkit {

/// Temporal point (tgeompoint / tgeometry).
using TGeomPoint = Temporal<Point>;

/// Constant point over `s`: a two-instant sequence, or a single instant when
/// `s` is a singleton. `interp` must be step or linear; `g` must be a point.
TGeomPoint tgeometry_from(const Geometry& g, const Span<Timestamp>& s, Interp interp);

/// Spatial trace. Linear sequences give linestrings (a point when
/// stationary); step and discrete values give their distinct points.
Geometry trajectory(const TGeomPoint& tp);

/// Distance travelled along linear sequences.
double length(const TGeomPoint& tp);

/// Restriction to the times the point lies in the closed region `g`
/// (a polygon or a collection of polygons). nullopt if never inside.
std::optional<TGeomPoint> at_geometry(const TGeomPoint& tp, const Geometry& g);

/// Temporal boolean: distance(a(t), b(t)) <= d over the common time domain,
/// with crossing instants solved exactly per synchronized segment. nullopt
/// when the time domains do not intersect. Throws InvalidValue for d < 0.
std::optional<TBool> t_dwithin(const TGeomPoint& a, const TGeomPoint& b, double d);

/// Ever within distance `d`.
bool e_dwithin(const TGeomPoint& a, const TGeomPoint& b, double d);

/// Ever intersects `g`.
bool e_intersects(const TGeomPoint& tp, const Geometry& g);

STBox to_stbox(const TGeomPoint& tp);

/// `tgeompoint && stbox`
bool overlaps(const TGeomPoint& tp, const STBox& box);

}  // namespace mobkit
