#include "mobkit/text_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <type_traits>

#include "mobkit/error.hpp"

namespace mobkit {

namespace {

struct TagInfo {
  TypeTag tag;
  std::string_view name;
  LiteralKind kind;
};

constexpr std::array<TagInfo, 34> kTags{{
    {TypeTag::intset, "intset", LiteralKind::set},
    {TypeTag::bigintset, "bigintset", LiteralKind::set},
    {TypeTag::floatset, "floatset", LiteralKind::set},
    {TypeTag::dateset, "dateset", LiteralKind::set},
    {TypeTag::tstzset, "tstzset", LiteralKind::set},
    {TypeTag::textset, "textset", LiteralKind::set},
    {TypeTag::geomset, "geomset", LiteralKind::set},
    {TypeTag::intspan, "intspan", LiteralKind::span},
    {TypeTag::bigintspan, "bigintspan", LiteralKind::span},
    {TypeTag::floatspan, "floatspan", LiteralKind::span},
    {TypeTag::datespan, "datespan", LiteralKind::span},
    {TypeTag::tstzspan, "tstzspan", LiteralKind::span},
    {TypeTag::intspanset, "intspanset", LiteralKind::spanset},
    {TypeTag::bigintspanset, "bigintspanset", LiteralKind::spanset},
    {TypeTag::floatspanset, "floatspanset", LiteralKind::spanset},
    {TypeTag::datespanset, "datespanset", LiteralKind::spanset},
    {TypeTag::tstzspanset, "tstzspanset", LiteralKind::spanset},
    {TypeTag::tbool, "tbool", LiteralKind::temporal},
    {TypeTag::tint, "tint", LiteralKind::temporal},
    {TypeTag::tfloat, "tfloat", LiteralKind::temporal},
    {TypeTag::ttext, "ttext", LiteralKind::temporal},
    {TypeTag::tgeompoint, "tgeompoint", LiteralKind::temporal},
    {TypeTag::tgeometry, "tgeometry", LiteralKind::temporal},
    {TypeTag::stbox, "stbox", LiteralKind::stbox},
    {TypeTag::tbox, "tbox", LiteralKind::tbox},
    {TypeTag::geometry, "geometry", LiteralKind::geometry},
    {TypeTag::interval, "interval", LiteralKind::interval},
    {TypeTag::timestamptz, "timestamptz", LiteralKind::timestamptz},
    {TypeTag::date, "date", LiteralKind::scalar},
    {TypeTag::int4, "integer", LiteralKind::scalar},
    {TypeTag::int8, "bigint", LiteralKind::scalar},
    {TypeTag::float8, "float", LiteralKind::scalar},
    {TypeTag::boolean, "boolean", LiteralKind::scalar},
    {TypeTag::text, "text", LiteralKind::scalar},
}};

const TagInfo& info(TypeTag tag) {
  for (const auto& t : kTags)
    if (t.tag == tag) return t;
  throw Error("unknown type tag");
}

char lower_ascii(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (lower_ascii(a[i]) != lower_ascii(b[i])) return false;
  return true;
}

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// ---------------------------------------------------------------------------
// Parsing

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  std::size_t pos() const { return pos_; }
  void skip_rest() { pos_ = s_.size(); }
  bool done() {
    ws();
    return pos_ >= s_.size();
  }
  char peek() {
    ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void ws() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
  [[noreturn]] static void fail_at(const std::string& msg, std::size_t at) { throw ParseError(msg, at); }

  bool eat(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  // Case-insensitive keyword not followed by a word character.
  bool eat_keyword(std::string_view kw) {
    ws();
    if (s_.size() - pos_ < kw.size()) return false;
    if (!iequals(s_.substr(pos_, kw.size()), kw)) return false;
    std::size_t end = pos_ + kw.size();
    if (end < s_.size() && is_word_char(s_[end]) && is_word_char(kw.back())) return false;
    pos_ = end;
    return true;
  }

  std::string_view word() {
    ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && is_word_char(s_[pos_])) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  // Raw text up to (not including) any of `delims`, trailing space trimmed.
  std::string_view token(std::string_view delims) {
    ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && delims.find(s_[pos_]) == std::string_view::npos) ++pos_;
    std::size_t end = pos_;
    while (end > start && is_space(s_[end - 1])) --end;
    if (end == start) fail("expected a value");
    return s_.substr(start, end - start);
  }

  std::string quoted() {
    expect('"');
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') return out;
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        out += s_[pos_++];
      } else {
        out += c;
      }
    }
  }

  template <class N>
  N number() {
    ws();
    std::size_t start = pos_;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    if (first < last && *first == '+') ++first;
    N v{};
    std::from_chars_result r;
    if constexpr (std::is_floating_point_v<N>) {
      r = std::from_chars(first, last, v, std::chars_format::general);
    } else {
      r = std::from_chars(first, last, v);
    }
    if (r.ec == std::errc::result_out_of_range) fail_at("number out of range", start);
    if (r.ec != std::errc()) fail_at("expected a number", start);
    if constexpr (std::is_floating_point_v<N>) {
      if (!std::isfinite(v)) fail_at("non-finite number", start);
    }
    pos_ = static_cast<std::size_t>(r.ptr - s_.data());
    if (pos_ < s_.size() && is_word_char(s_[pos_])) fail("malformed number");
    return v;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

template <class F>
auto build(std::size_t at, F&& f) {
  try {
    return f();
  } catch (const InvalidValue& e) {
    throw ParseError(e.what(), at);
  }
}

Srid parse_srid_prefix(Cursor& c) {
  if (!c.eat_keyword("SRID")) return std::nullopt;
  c.expect('=');
  auto srid = c.number<std::int32_t>();
  c.expect(';');
  return srid;
}

// WKT ---------------------------------------------------------------------

Point wkt_coord(Cursor& c) {
  double x = c.number<double>();
  double y = c.number<double>();
  return {x, y};
}

std::vector<Point> wkt_coord_list(Cursor& c) {
  c.expect('(');
  std::vector<Point> pts{wkt_coord(c)};
  while (c.eat(',')) pts.push_back(wkt_coord(c));
  c.expect(')');
  return pts;
}

Polygon wkt_polygon_body(Cursor& c) {
  c.expect('(');
  Polygon p;
  p.rings.push_back(wkt_coord_list(c));
  while (c.eat(',')) p.rings.push_back(wkt_coord_list(c));
  c.expect(')');
  return p;
}

Geometry wkt_geometry(Cursor& c) {
  c.ws();
  std::size_t start = c.pos();
  std::string_view tag = c.word();
  if (c.eat_keyword("EMPTY")) Cursor::fail_at("empty geometries are not supported", start);
  return build(start, [&]() -> Geometry {
    if (iequals(tag, "POINT")) {
      c.expect('(');
      Point p = wkt_coord(c);
      c.expect(')');
      return Geometry(p);
    }
    if (iequals(tag, "LINESTRING")) return Geometry(LineString{wkt_coord_list(c)});
    if (iequals(tag, "POLYGON")) return Geometry(wkt_polygon_body(c));
    Collection col;
    c.expect('(');
    if (iequals(tag, "MULTIPOINT")) {
      col.kind = CollectionKind::multipoint;
      do {
        bool wrapped = c.eat('(');
        col.items.emplace_back(wkt_coord(c));
        if (wrapped) c.expect(')');
      } while (c.eat(','));
    } else if (iequals(tag, "MULTILINESTRING")) {
      col.kind = CollectionKind::multilinestring;
      do col.items.emplace_back(LineString{wkt_coord_list(c)});
      while (c.eat(','));
    } else if (iequals(tag, "MULTIPOLYGON")) {
      col.kind = CollectionKind::multipolygon;
      do col.items.emplace_back(wkt_polygon_body(c));
      while (c.eat(','));
    } else if (iequals(tag, "GEOMETRYCOLLECTION")) {
      do col.items.push_back(wkt_geometry(c));
      while (c.eat(','));
    } else {
      Cursor::fail_at("unknown geometry type '" + std::string(tag) + "'", start);
    }
    c.expect(')');
    return Geometry(std::move(col));
  });
}

// Base values --------------------------------------------------------------

template <class T>
T parse_base(Cursor& c, std::string_view delims);

template <>
std::int32_t parse_base<std::int32_t>(Cursor& c, std::string_view) {
  return c.number<std::int32_t>();
}
template <>
std::int64_t parse_base<std::int64_t>(Cursor& c, std::string_view) {
  return c.number<std::int64_t>();
}
template <>
double parse_base<double>(Cursor& c, std::string_view) {
  return c.number<double>();
}

template <class R, class Fn>
R parse_time_text(Cursor& c, std::string_view delims, Fn fn) {
  c.ws();
  std::size_t start = c.pos();
  bool quoted = c.peek() == '"';
  std::string text = quoted ? c.quoted() : std::string(c.token(delims));
  try {
    return fn(text);
  } catch (const ParseError& e) {
    throw e.shifted(start + (quoted ? 1 : 0));
  }
}

template <>
Timestamp parse_base<Timestamp>(Cursor& c, std::string_view delims) {
  return parse_time_text<Timestamp>(c, delims, [](std::string_view t) { return parse_timestamp(t); });
}
template <>
Date parse_base<Date>(Cursor& c, std::string_view delims) {
  return parse_time_text<Date>(c, delims, [](std::string_view t) { return parse_date(t); });
}
template <>
std::string parse_base<std::string>(Cursor& c, std::string_view delims) {
  if (c.peek() == '"') return c.quoted();
  return std::string(c.token(delims));
}
template <>
bool parse_base<bool>(Cursor& c, std::string_view) {
  std::size_t start = c.pos();
  std::string_view w = c.word();
  if (iequals(w, "t") || iequals(w, "true")) return true;
  if (iequals(w, "f") || iequals(w, "false")) return false;
  Cursor::fail_at("expected a boolean", start);
}
template <>
Point parse_base<Point>(Cursor& c, std::string_view) {
  bool quoted = c.eat('"');
  c.ws();
  std::size_t start = c.pos();
  Geometry g = wkt_geometry(c);
  if (!g.is_point()) Cursor::fail_at("expected a point", start);
  if (quoted) c.expect('"');
  return g.as_point();
}

// Collections --------------------------------------------------------------

template <class T>
Set<T> parse_set(Cursor& c) {
  Srid srid;
  if constexpr (std::is_same_v<T, Point>) srid = parse_srid_prefix(c);
  std::size_t start = c.pos();
  c.expect('{');
  std::vector<T> items;
  if (c.peek() != '}') {
    do items.push_back(parse_base<T>(c, ",}"));
    while (c.eat(','));
  }
  c.expect('}');
  return build(start, [&] { return Set<T>(std::move(items), srid); });
}

template <class T>
Span<T> parse_span(Cursor& c) {
  c.ws();
  std::size_t start = c.pos();
  bool lower_inc;
  if (c.eat('[')) {
    lower_inc = true;
  } else if (c.eat('(')) {
    lower_inc = false;
  } else {
    c.fail("expected '[' or '('");
  }
  T lo = parse_base<T>(c, ",])");
  c.expect(',');
  T hi = parse_base<T>(c, ",])");
  bool upper_inc;
  if (c.eat(']')) {
    upper_inc = true;
  } else if (c.eat(')')) {
    upper_inc = false;
  } else {
    c.fail("expected ']' or ')'");
  }
  return build(start, [&] { return Span<T>(lo, hi, lower_inc, upper_inc); });
}

template <class T>
SpanSet<T> parse_spanset(Cursor& c) {
  std::size_t start = c.pos();
  c.expect('{');
  std::vector<Span<T>> spans;
  if (c.peek() != '}') {
    do spans.push_back(parse_span<T>(c));
    while (c.eat(','));
  }
  c.expect('}');
  return build(start, [&] { return SpanSet<T>(std::move(spans)); });
}

// Temporal -----------------------------------------------------------------

bool default_linear(TypeTag tag) { return tag == TypeTag::tfloat || tag == TypeTag::tgeompoint; }

std::optional<Interp> parse_interp_name(Cursor& c) {
  std::size_t start = c.pos();
  std::string_view w = c.word();
  if (iequals(w, "step")) return Interp::step;
  if (iequals(w, "linear")) return Interp::linear;
  if (iequals(w, "discrete")) return Interp::discrete;
  Cursor::fail_at("unknown interpolation '" + std::string(w) + "'", start);
}

template <class B>
TInstant<B> parse_instant(Cursor& c) {
  B v = parse_base<B>(c, "@");
  c.expect('@');
  Timestamp t = parse_base<Timestamp>(c, ",]});");
  return {v, t};
}

struct RawSequence {
  std::size_t start;
  std::vector<std::size_t> positions;
  bool lower_inc;
  bool upper_inc;
};

template <class B>
std::pair<RawSequence, std::vector<TInstant<B>>> parse_raw_sequence(Cursor& c) {
  c.ws();
  RawSequence raw{c.pos(), {}, true, true};
  if (c.eat('[')) {
    raw.lower_inc = true;
  } else if (c.eat('(')) {
    raw.lower_inc = false;
  } else {
    c.fail("expected '[' or '('");
  }
  std::vector<TInstant<B>> instants;
  do {
    c.ws();
    raw.positions.push_back(c.pos());
    instants.push_back(parse_instant<B>(c));
  } while (c.eat(','));
  if (c.eat(']')) {
    raw.upper_inc = true;
  } else if (c.eat(')')) {
    raw.upper_inc = false;
  } else {
    c.fail("expected ']' or ')'");
  }
  return {raw, std::move(instants)};
}

template <class B>
void check_order(const std::vector<TInstant<B>>& in, const std::vector<std::size_t>& positions) {
  for (std::size_t i = 1; i < in.size(); ++i)
    if (!(in[i - 1].t < in[i].t)) Cursor::fail_at("sequence timestamps must be strictly increasing", positions[i]);
}

template <class B>
Temporal<B> parse_temporal(Cursor& c, TypeTag tag) {
  Srid srid;
  if constexpr (std::is_same_v<B, Point>) srid = parse_srid_prefix(c);
  std::optional<Interp> interp;
  if (c.eat_keyword("Interp")) {
    c.expect('=');
    interp = parse_interp_name(c);
    c.expect(';');
  }
  auto trailing_interp = [&] {
    std::size_t save = c.pos();
    if (c.eat(';')) {
      if (!c.eat_keyword("interp")) Cursor::fail_at("expected 'interp='", save + 1);
      c.expect('=');
      interp = parse_interp_name(c);
    }
  };
  auto continuous_interp = [&](std::size_t at) {
    Interp ip = interp.value_or(is_continuous_base<B> && default_linear(tag) ? Interp::linear : Interp::step);
    if (ip == Interp::discrete) Cursor::fail_at("discrete interpolation needs a '{...}' sequence", at);
    return ip;
  };

  c.ws();
  std::size_t start = c.pos();
  if (c.peek() == '{') {
    c.expect('{');
    char next = c.peek();
    if (next == '[' || next == '(') {
      std::vector<std::pair<RawSequence, std::vector<TInstant<B>>>> raws;
      do raws.push_back(parse_raw_sequence<B>(c));
      while (c.eat(','));
      c.expect('}');
      trailing_interp();
      Interp ip = continuous_interp(start);
      std::vector<TSequence<B>> seqs;
      for (auto& [raw, inst] : raws) {
        check_order(inst, raw.positions);
        seqs.push_back(build(raw.start, [&] {
          return TSequence<B>(std::move(inst), ip, raw.lower_inc, raw.upper_inc);
        }));
      }
      return build(start, [&] { return Temporal<B>(TSequenceSet<B>(std::move(seqs)), srid); });
    }
    std::vector<TInstant<B>> inst;
    std::vector<std::size_t> positions;
    do {
      c.ws();
      positions.push_back(c.pos());
      inst.push_back(parse_instant<B>(c));
    } while (c.eat(','));
    c.expect('}');
    if (interp && *interp != Interp::discrete) Cursor::fail_at("a '{...}' sequence is discrete", start);
    check_order(inst, positions);
    return build(start, [&] { return Temporal<B>(TSequence<B>(std::move(inst), Interp::discrete), srid); });
  }
  if (c.peek() == '[' || c.peek() == '(') {
    auto [raw, inst] = parse_raw_sequence<B>(c);
    trailing_interp();
    Interp ip = continuous_interp(start);
    check_order(inst, raw.positions);
    return build(start, [&] {
      return Temporal<B>(TSequence<B>(std::move(inst), ip, raw.lower_inc, raw.upper_inc), srid);
    });
  }
  return Temporal<B>(parse_instant<B>(c), srid);
}

// Boxes ----------------------------------------------------------------------

XYRange parse_xy(Cursor& c) {
  std::size_t start = c.pos();
  c.expect('(');
  c.expect('(');
  double xmin = c.number<double>();
  c.expect(',');
  double ymin = c.number<double>();
  c.expect(')');
  c.expect(',');
  c.expect('(');
  double xmax = c.number<double>();
  c.expect(',');
  double ymax = c.number<double>();
  c.expect(')');
  c.expect(')');
  if (!(xmin <= xmax) || !(ymin <= ymax)) Cursor::fail_at("stbox minimum exceeds maximum", start);
  return {xmin, ymin, xmax, ymax};
}

STBox parse_stbox(Cursor& c) {
  Srid srid = parse_srid_prefix(c);
  std::size_t start = c.pos();
  if (!c.eat_keyword("STBOX")) c.fail("expected 'STBOX'");
  std::string_view dims = c.word();
  std::optional<XYRange> xy;
  std::optional<Span<Timestamp>> t;
  c.expect('(');
  if (iequals(dims, "X")) {
    // STBOX X((xmin,ymin),(xmax,ymax)): the outer parenthesis doubles as the pair wrapper.
    double v[4];
    for (int i = 0; i < 2; ++i) {
      if (i) c.expect(',');
      c.expect('(');
      v[2 * i] = c.number<double>();
      c.expect(',');
      v[2 * i + 1] = c.number<double>();
      c.expect(')');
    }
    if (!(v[0] <= v[2]) || !(v[1] <= v[3])) Cursor::fail_at("stbox minimum exceeds maximum", start);
    xy = XYRange{v[0], v[1], v[2], v[3]};
  } else if (iequals(dims, "XT")) {
    xy = parse_xy(c);
    c.expect(',');
    t = parse_span<Timestamp>(c);
  } else if (iequals(dims, "T")) {
    t = parse_span<Timestamp>(c);
  } else {
    Cursor::fail_at("expected stbox dimensions X, T, or XT", start);
  }
  c.expect(')');
  return build(start, [&] { return STBox(xy, t, srid); });
}

TBox parse_tbox(Cursor& c) {
  c.ws();
  std::size_t start = c.pos();
  std::string_view kw = c.word();
  enum { untyped, ints, floats } base;
  if (iequals(kw, "TBOX")) {
    base = untyped;
  } else if (iequals(kw, "TBOXINT")) {
    base = ints;
  } else if (iequals(kw, "TBOXFLOAT")) {
    base = floats;
  } else {
    Cursor::fail_at("expected 'TBOXINT', 'TBOXFLOAT', or 'TBOX'", start);
  }
  std::string_view dims = c.word();
  bool has_x = iequals(dims, "X") || iequals(dims, "XT");
  bool has_t = iequals(dims, "T") || iequals(dims, "XT");
  if (!has_x && !has_t) Cursor::fail_at("expected tbox dimensions X, T, or XT", start);
  if (has_x && base == untyped) Cursor::fail_at("a tbox value dimension needs TBOXINT or TBOXFLOAT", start);
  std::optional<TBox::ValueSpan> value;
  std::optional<Span<Timestamp>> t;
  c.expect('(');
  if (has_x) {
    if (base == ints) {
      value = parse_span<std::int32_t>(c);
    } else {
      value = parse_span<double>(c);
    }
    if (has_t) c.expect(',');
  }
  if (has_t) t = parse_span<Timestamp>(c);
  c.expect(')');
  return build(start, [&] { return TBox(value, t); });
}

Value parse_value(Cursor& c, std::string_view whole, TypeTag tag) {
  switch (tag) {
    case TypeTag::intset: return parse_set<std::int32_t>(c);
    case TypeTag::bigintset: return parse_set<std::int64_t>(c);
    case TypeTag::floatset: return parse_set<double>(c);
    case TypeTag::dateset: return parse_set<Date>(c);
    case TypeTag::tstzset: return parse_set<Timestamp>(c);
    case TypeTag::textset: return parse_set<std::string>(c);
    case TypeTag::geomset: return parse_set<Point>(c);
    case TypeTag::intspan: return parse_span<std::int32_t>(c);
    case TypeTag::bigintspan: return parse_span<std::int64_t>(c);
    case TypeTag::floatspan: return parse_span<double>(c);
    case TypeTag::datespan: return parse_span<Date>(c);
    case TypeTag::tstzspan: return parse_span<Timestamp>(c);
    case TypeTag::intspanset: return parse_spanset<std::int32_t>(c);
    case TypeTag::bigintspanset: return parse_spanset<std::int64_t>(c);
    case TypeTag::floatspanset: return parse_spanset<double>(c);
    case TypeTag::datespanset: return parse_spanset<Date>(c);
    case TypeTag::tstzspanset: return parse_spanset<Timestamp>(c);
    case TypeTag::tbool: return parse_temporal<bool>(c, tag);
    case TypeTag::tint: return parse_temporal<std::int32_t>(c, tag);
    case TypeTag::tfloat: return parse_temporal<double>(c, tag);
    case TypeTag::ttext: return parse_temporal<std::string>(c, tag);
    case TypeTag::tgeompoint:
    case TypeTag::tgeometry: return parse_temporal<Point>(c, tag);
    case TypeTag::stbox: return parse_stbox(c);
    case TypeTag::tbox: return parse_tbox(c);
    case TypeTag::geometry: {
      Srid srid = parse_srid_prefix(c);
      return wkt_geometry(c).with_srid(srid);
    }
    case TypeTag::interval:
      return parse_time_text<Interval>(c, "", [](std::string_view t) { return parse_interval(t); });
    case TypeTag::timestamptz: return parse_base<Timestamp>(c, "");
    case TypeTag::date: return parse_base<Date>(c, "");
    case TypeTag::int4: return c.number<std::int32_t>();
    case TypeTag::int8: return c.number<std::int64_t>();
    case TypeTag::float8: return c.number<double>();
    case TypeTag::boolean: return parse_base<bool>(c, "");
    case TypeTag::text:
      c.skip_rest();
      return std::string(whole);
  }
  throw Error("unknown type tag");
}

// ---------------------------------------------------------------------------
// Serialization

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  out += '"';
  return out;
}

void append_coord(std::string& out, const Point& p, const FormatOptions& o) {
  out += format_double(p.x, o);
  out += ' ';
  out += format_double(p.y, o);
}

void append_coord_list(std::string& out, const std::vector<Point>& pts, const FormatOptions& o) {
  out += '(';
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ',';
    append_coord(out, pts[i], o);
  }
  out += ')';
}

void append_polygon_body(std::string& out, const Polygon& p, const FormatOptions& o) {
  out += '(';
  for (std::size_t i = 0; i < p.rings.size(); ++i) {
    if (i) out += ',';
    append_coord_list(out, p.rings[i], o);
  }
  out += ')';
}

void append_wkt(std::string& out, const Geometry& g, const FormatOptions& o) {
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Point>) {
          out += "POINT(";
          append_coord(out, s, o);
          out += ')';
        } else if constexpr (std::is_same_v<S, LineString>) {
          out += "LINESTRING";
          append_coord_list(out, s.points, o);
        } else if constexpr (std::is_same_v<S, Polygon>) {
          out += "POLYGON";
          append_polygon_body(out, s, o);
        } else {
          switch (s.kind) {
            case CollectionKind::multipoint: out += "MULTIPOINT("; break;
            case CollectionKind::multilinestring: out += "MULTILINESTRING("; break;
            case CollectionKind::multipolygon: out += "MULTIPOLYGON("; break;
            case CollectionKind::mixed: out += "GEOMETRYCOLLECTION("; break;
          }
          for (std::size_t i = 0; i < s.items.size(); ++i) {
            if (i) out += ',';
            const Geometry& item = s.items[i];
            switch (s.kind) {
              case CollectionKind::multipoint: append_coord(out, item.as_point(), o); break;
              case CollectionKind::multilinestring:
                append_coord_list(out, std::get<LineString>(item.shape()).points, o);
                break;
              case CollectionKind::multipolygon: append_polygon_body(out, item.as_polygon(), o); break;
              case CollectionKind::mixed: append_wkt(out, item, o); break;
            }
          }
          out += ')';
        }
      },
      g.shape());
}

std::string srid_prefix(const Srid& srid) { return srid ? "SRID=" + std::to_string(*srid) + ";" : ""; }

template <class T>
std::string base_text(const T& v, const FormatOptions& o) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "t" : "f";
  } else if constexpr (std::is_same_v<T, double>) {
    return format_double(v, o);
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(v);
  } else if constexpr (std::is_same_v<T, Timestamp>) {
    return format_timestamp(v);
  } else if constexpr (std::is_same_v<T, Date>) {
    return format_date(v);
  } else if constexpr (std::is_same_v<T, std::string>) {
    return quote(v);
  } else {
    std::string out;
    append_wkt(out, Geometry(v), o);
    return out;
  }
}

template <class T>
std::string set_text(const Set<T>& s, const FormatOptions& o) {
  constexpr bool quoted = std::is_same_v<T, Timestamp> || std::is_same_v<T, Point>;
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    std::string e = base_text(s.elements()[i], o);
    out += quoted ? quote(e) : e;
  }
  out += '}';
  return out;
}

template <class T>
std::string span_text(const Span<T>& s, const FormatOptions& o) {
  std::string out;
  out += s.lower_inc() ? '[' : '(';
  out += base_text(s.lower(), o);
  out += ", ";
  out += base_text(s.last(), o);
  if constexpr (BaseTraits<T>::discrete) {
    out += ']';
  } else {
    out += s.upper_inc() ? ']' : ')';
  }
  return out;
}

template <class T>
std::string spanset_text(const SpanSet<T>& ss, const FormatOptions& o) {
  std::string out = "{";
  for (std::size_t i = 0; i < ss.size(); ++i) {
    if (i) out += ", ";
    out += span_text(ss.spans()[i], o);
  }
  out += '}';
  return out;
}

template <class B>
void append_instant(std::string& out, const TInstant<B>& in, const FormatOptions& o) {
  out += base_text(in.value, o);
  out += '@';
  out += format_timestamp(in.t);
}

template <class B>
void append_sequence(std::string& out, const TSequence<B>& seq, const FormatOptions& o) {
  bool discrete = seq.interp() == Interp::discrete;
  out += discrete ? '{' : (seq.lower_inc() ? '[' : '(');
  for (std::size_t i = 0; i < seq.instants().size(); ++i) {
    if (i) out += ", ";
    append_instant(out, seq.instants()[i], o);
  }
  out += discrete ? '}' : (seq.upper_inc() ? ']' : ')');
}

template <class B>
std::string temporal_text(const Temporal<B>& tv, TypeTag tag, const FormatOptions& o) {
  std::string out;
  Interp ip = tv.interp();
  if (ip != Interp::discrete) {
    Interp def = is_continuous_base<B> && default_linear(tag) ? Interp::linear : Interp::step;
    if (ip != def) out += std::string("Interp=") + interp_name(ip) + ";";
  }
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, TInstant<B>>) {
          append_instant(out, r, o);
        } else if constexpr (std::is_same_v<R, TSequence<B>>) {
          append_sequence(out, r, o);
        } else {
          out += '{';
          for (std::size_t i = 0; i < r.sequences().size(); ++i) {
            if (i) out += ", ";
            append_sequence(out, r.sequences()[i], o);
          }
          out += '}';
        }
      },
      tv.rep());
  return out;
}

std::string stbox_text(const STBox& b, const FormatOptions& o) {
  std::string out = srid_prefix(b.srid());
  auto xy = [&](const XYRange& r) {
    return "(" + format_double(r.xmin, o) + "," + format_double(r.ymin, o) + "),(" + format_double(r.xmax, o) +
           "," + format_double(r.ymax, o) + ")";
  };
  if (b.has_xy() && b.has_t()) {
    out += "STBOX XT((" + xy(*b.xy()) + ")," + span_text(*b.t(), o) + ")";
  } else if (b.has_xy()) {
    out += "STBOX X(" + xy(*b.xy()) + ")";
  } else {
    out += "STBOX T(" + span_text(*b.t(), o) + ")";
  }
  return out;
}

std::string tbox_text(const TBox& b, const FormatOptions& o) {
  std::string out;
  std::string value;
  if (b.value()) {
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          out = std::is_same_v<S, Span<double>> ? "TBOXFLOAT " : "TBOXINT ";
          value = span_text(s, o);
        },
        *b.value());
  } else {
    out = "TBOX ";
  }
  if (b.value() && b.t()) {
    out += "XT(" + value + "," + span_text(*b.t(), o) + ")";
  } else if (b.value()) {
    out += "X(" + value + ")";
  } else {
    out += "T(" + span_text(*b.t(), o) + ")";
  }
  return out;
}

Srid value_srid(const Value& v) {
  if (const auto* g = std::get_if<Geometry>(&v)) return g->srid();
  if (const auto* s = std::get_if<Set<Point>>(&v)) return s->srid();
  if (const auto* t = std::get_if<TGeomPoint>(&v)) return t->srid();
  return std::nullopt;
}

}  // namespace

LiteralKind kind_of(TypeTag tag) { return info(tag).kind; }

std::string_view tag_name(TypeTag tag) { return info(tag).name; }

std::optional<TypeTag> tag_from_name(std::string_view name) {
  for (const auto& t : kTags)
    if (iequals(t.name, name)) return t.tag;
  static constexpr std::array<std::pair<std::string_view, TypeTag>, 11> kAliases{{
      {"int", TypeTag::int4},
      {"int4", TypeTag::int4},
      {"int8", TypeTag::int8},
      {"double", TypeTag::float8},
      {"float8", TypeTag::float8},
      {"double precision", TypeTag::float8},
      {"bool", TypeTag::boolean},
      {"timestamp", TypeTag::timestamptz},
      {"geom", TypeTag::geometry},
      {"varchar", TypeTag::text},
      {"numeric", TypeTag::float8},
  }};
  for (const auto& [alias, tag] : kAliases)
    if (iequals(alias, name)) return tag;
  return std::nullopt;
}

Literal parse(std::string_view text, TypeTag tag) {
  Cursor c(text);
  Value v = parse_value(c, text, tag);
  if (!c.done()) c.fail("unexpected trailing characters");
  return Literal{tag, std::move(v)};
}

std::string format_double(double v, const FormatOptions& opts) {
  if (opts.max_decimals) {
    double scale = std::pow(10.0, *opts.max_decimals);
    double r = std::round(v * scale) / scale;
    if (std::isfinite(r)) v = r;
  }
  if (v == 0) v = 0;  // drop the sign of negative zero
  std::array<char, 32> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string geometry_to_wkt(const Geometry& g, bool ewkt, const FormatOptions& opts) {
  std::string out = ewkt ? srid_prefix(g.srid()) : "";
  append_wkt(out, g, opts);
  return out;
}

Geometry parse_geometry(std::string_view text) { return parse(text, TypeTag::geometry).as<Geometry>(); }

std::string serialize(const Literal& lit, const FormatOptions& o) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (requires { set_text(v, o); }) {
          return set_text(v, o);
        } else if constexpr (requires { spanset_text(v, o); }) {
          return spanset_text(v, o);
        } else if constexpr (requires { span_text(v, o); }) {
          return span_text(v, o);
        } else if constexpr (requires { temporal_text(v, lit.tag, o); }) {
          return temporal_text(v, lit.tag, o);
        } else if constexpr (std::is_same_v<V, STBox>) {
          return stbox_text(v, o);
        } else if constexpr (std::is_same_v<V, TBox>) {
          return tbox_text(v, o);
        } else if constexpr (std::is_same_v<V, Geometry>) {
          return geometry_to_wkt(v, false, o);
        } else if constexpr (std::is_same_v<V, Interval>) {
          return format_interval(v);
        } else if constexpr (std::is_same_v<V, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<V, std::string>) {
          return v;
        } else {
          return base_text(v, o);
        }
      },
      lit.value);
}

std::string serialize_ewkt(const Literal& lit, const FormatOptions& opts) {
  return srid_prefix(value_srid(lit.value)) + serialize(lit, opts);
}

}  // namespace mobkit
