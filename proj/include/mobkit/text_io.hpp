#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "mobkit/box.hpp"
#include "mobkit/geometry.hpp"
#include "mobkit/span.hpp"
#include "mobkit/temporal.hpp"
#include "mobkit/tgeo.hpp"
#include "mobkit/time.hpp"

namespace mobkit {

/// Concrete literal type, named after the SQL type it spells.
enum class TypeTag {
  intset, bigintset, floatset, dateset, tstzset, textset, geomset,
  intspan, bigintspan, floatspan, datespan, tstzspan,
  intspanset, bigintspanset, floatspanset, datespanset, tstzspanset,
  tbool, tint, tfloat, ttext, tgeompoint, tgeometry,
  stbox, tbox, geometry, interval, timestamptz, date,
  int4, int8, float8, boolean, text,
};

enum class LiteralKind { set, span, spanset, temporal, stbox, tbox, geometry, interval, timestamptz, scalar };

LiteralKind kind_of(TypeTag tag);

/// SQL spelling of a tag, e.g. "tstzspan".
std::string_view tag_name(TypeTag tag);

/// Case-insensitive lookup of a SQL type name; accepts common aliases
/// (int, integer, bigint, float, double, bool, timestamp). nullopt if unknown.
std::optional<TypeTag> tag_from_name(std::string_view name);

using Value = std::variant<
    Set<std::int32_t>, Set<std::int64_t>, Set<double>, Set<Date>, Set<Timestamp>, Set<std::string>, Set<Point>,
    Span<std::int32_t>, Span<std::int64_t>, Span<double>, Span<Date>, Span<Timestamp>,
    SpanSet<std::int32_t>, SpanSet<std::int64_t>, SpanSet<double>, SpanSet<Date>, SpanSet<Timestamp>,
    TBool, TInt, TFloat, TText, TGeomPoint,
    STBox, TBox, Geometry, Interval, Timestamp, Date,
    std::int32_t, std::int64_t, double, bool, std::string>;

/// A parsed value together with its SQL type. tgeompoint and tgeometry share
/// a payload type and differ only in the tag.
struct Literal {
  TypeTag tag;
  Value value;

  LiteralKind kind() const { return kind_of(tag); }

  template <class T>
  const T& as() const {
    return std::get<T>(value);
  }

  friend bool operator==(const Literal&, const Literal&) = default;
};

/// Parses `text` as a literal of type `tag`. Throws ParseError carrying the
/// byte offset of the failure; semantic violations (bounds, ordering, empty
/// sets) are reported as ParseError at the offending element.
Literal parse(std::string_view text, TypeTag tag);

struct FormatOptions {
  /// Round coordinates and float values to this many decimals.
  std::optional<int> max_decimals;
};

/// Canonical text (asText). The SRID is omitted except on stbox.
std::string serialize(const Literal& lit, const FormatOptions& opts = {});

/// As serialize, prefixed with `SRID=n;` when the value carries an SRID.
std::string serialize_ewkt(const Literal& lit, const FormatOptions& opts = {});

/// Shortest decimal text that reads back as `v`; integral values print
/// without a decimal point.
std::string format_double(double v, const FormatOptions& opts = {});

/// WKT (PostGIS style, upper-case tags). `ewkt` adds the SRID prefix.
std::string geometry_to_wkt(const Geometry& g, bool ewkt = false, const FormatOptions& opts = {});
Geometry parse_geometry(std::string_view text);

}  // namespace mobkit
