#include "mobkit/workbench/eval.hpp"

#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <vector>

namespace mobkit::workbench {

namespace {

std::string lower(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

// An evaluated argument: a typed literal, an untyped quoted string, or NULL.
struct Arg {
  std::optional<Literal> lit;
  std::optional<std::string> raw;
  std::size_t at = 0;
  bool null = false;
};

Literal parse_at(const std::string& text, TypeTag tag, std::size_t at) {
  try {
    return parse(text, tag);
  } catch (const ParseError& e) {
    throw e.shifted(at);
  }
}

// Converts `a` to `want`: parses untyped text, retags points, widens numbers.
Literal coerce(const Arg& a, TypeTag want, std::size_t index) {
  if (a.raw) return parse_at(*a.raw, want, a.at);
  const Literal& l = *a.lit;
  if (l.tag == want) return l;
  auto pair = [&](TypeTag from, TypeTag to) { return l.tag == from && want == to; };
  if (pair(TypeTag::tgeompoint, TypeTag::tgeometry) || pair(TypeTag::tgeometry, TypeTag::tgeompoint))
    return Literal{want, l.value};
  if (pair(TypeTag::int4, TypeTag::float8)) return Literal{want, static_cast<double>(l.as<std::int32_t>())};
  if (pair(TypeTag::int8, TypeTag::float8)) return Literal{want, static_cast<double>(l.as<std::int64_t>())};
  if (pair(TypeTag::int4, TypeTag::int8)) return Literal{want, static_cast<std::int64_t>(l.as<std::int32_t>())};
  if (pair(TypeTag::date, TypeTag::timestamptz)) return Literal{want, to_timestamp(l.as<Date>())};
  throw EvalError("argument " + std::to_string(index + 1) + ": expected " + std::string(tag_name(want)) + ", got " +
                  std::string(tag_name(l.tag)));
}

const Literal& typed(const Arg& a, std::size_t index, const char* what) {
  if (!a.lit) throw EvalError("argument " + std::to_string(index + 1) + ": cannot infer the type of an untyped " +
                              "string here; expected " + what + ", add a type such as 'text'::tint");
  return *a.lit;
}

template <class B>
TypeTag base_tag() {
  if constexpr (std::is_same_v<B, bool>) {
    return TypeTag::boolean;
  } else if constexpr (std::is_same_v<B, std::int32_t>) {
    return TypeTag::int4;
  } else if constexpr (std::is_same_v<B, double>) {
    return TypeTag::float8;
  } else if constexpr (std::is_same_v<B, std::string>) {
    return TypeTag::text;
  } else {
    return TypeTag::geometry;
  }
}

// Calls f(temporal) with the concrete Temporal<B> held by `lit`.
template <class F>
auto with_temporal(const Literal& lit, std::size_t index, F f) {
  switch (lit.tag) {
    case TypeTag::tbool: return f(lit.as<TBool>());
    case TypeTag::tint: return f(lit.as<TInt>());
    case TypeTag::tfloat: return f(lit.as<TFloat>());
    case TypeTag::ttext: return f(lit.as<TText>());
    case TypeTag::tgeompoint:
    case TypeTag::tgeometry: return f(lit.as<TGeomPoint>());
    default:
      throw EvalError("argument " + std::to_string(index + 1) + ": expected a temporal value, got " +
                      std::string(tag_name(lit.tag)));
  }
}

template <class B>
Literal base_literal(const B& v, const Srid& srid) {
  if constexpr (std::is_same_v<B, Point>) {
    return Literal{TypeTag::geometry, Geometry(v, srid)};
  } else {
    return Literal{base_tag<B>(), v};
  }
}

template <class B>
B base_value(const Literal& lit) {
  if constexpr (std::is_same_v<B, Point>) {
    const auto& g = lit.as<Geometry>();
    const auto* p = std::get_if<Point>(&g.shape());
    if (!p) throw EvalError("expected a point geometry");
    return *p;
  } else {
    return lit.as<B>();
  }
}

TGeomPoint tpoint(const Arg& a, std::size_t index) {
  return coerce(a, TypeTag::tgeompoint, index).as<TGeomPoint>();
}

// stbox of a box-like argument; untyped text parses as an stbox.
STBox as_stbox(const Arg& a, std::size_t index) {
  if (a.raw) return parse_at(*a.raw, TypeTag::stbox, a.at).as<STBox>();
  const Literal& l = *a.lit;
  switch (l.tag) {
    case TypeTag::stbox: return l.as<STBox>();
    case TypeTag::geometry: return geometry_to_stbox(l.as<Geometry>());
    case TypeTag::tgeompoint:
    case TypeTag::tgeometry: return to_stbox(l.as<TGeomPoint>());
    default:
      throw EvalError("argument " + std::to_string(index + 1) + ": expected stbox, geometry or tgeompoint, got " +
                      std::string(tag_name(l.tag)));
  }
}

double as_double(const Arg& a, std::size_t index) { return coerce(a, TypeTag::float8, index).as<double>(); }
Interval as_interval(const Arg& a, std::size_t index) { return coerce(a, TypeTag::interval, index).as<Interval>(); }

Interp as_interp(const Arg& a, std::size_t index) {
  std::string s = lower(coerce(a, TypeTag::text, index).as<std::string>());
  if (s == "discrete") return Interp::discrete;
  if (s == "step") return Interp::step;
  if (s == "linear") return Interp::linear;
  throw EvalError("argument " + std::to_string(index + 1) + ": unknown interpolation '" + s + "'");
}

FormatOptions decimals(const std::vector<Arg>& args, std::size_t index) {
  FormatOptions opts;
  if (args.size() > index) opts.max_decimals = coerce(args[index], TypeTag::int4, index).as<std::int32_t>();
  return opts;
}

using Result = std::optional<Literal>;
using Args = std::vector<Arg>;

struct Function {
  std::size_t min_args;
  std::size_t max_args;
  std::function<Result(const Args&)> run;
};

template <class T>
Literal shifted_set(const Literal& l, const Args& args, TypeTag scalar) {
  std::optional<T> shift, width;
  if (args.size() > 1 && !args[1].null) shift = coerce(args[1], scalar, 1).template as<T>();
  if (args.size() > 2 && !args[2].null) width = coerce(args[2], scalar, 2).template as<T>();
  return Literal{l.tag, shift_scale(l.as<Set<T>>(), shift, width)};
}

Result eval_shift_scale(const Args& args) {
  const Literal& l = typed(args[0], 0, "a set");
  switch (l.tag) {
    case TypeTag::tstzset: {
      std::optional<Interval> shift, width;
      if (args.size() > 1 && !args[1].null) shift = as_interval(args[1], 1);
      if (args.size() > 2 && !args[2].null) width = as_interval(args[2], 2);
      return Literal{l.tag, shift_scale(l.as<Set<Timestamp>>(), shift, width)};
    }
    case TypeTag::intset: return shifted_set<std::int32_t>(l, args, TypeTag::int4);
    case TypeTag::bigintset: return shifted_set<std::int64_t>(l, args, TypeTag::int8);
    case TypeTag::floatset: return shifted_set<double>(l, args, TypeTag::float8);
    default: throw EvalError("shiftScale: unsupported type " + std::string(tag_name(l.tag)));
  }
}

Result eval_at_time(const Args& args) {
  const Literal& l = typed(args[0], 0, "a temporal value");
  Literal when = args[1].raw ? parse_at(*args[1].raw, TypeTag::tstzspan, args[1].at) : *args[1].lit;
  return with_temporal(l, 0, [&](const auto& tv) -> Result {
    using T = std::decay_t<decltype(tv)>;
    std::optional<T> r;
    switch (when.tag) {
      case TypeTag::tstzspan: r = at_time(tv, when.as<Span<Timestamp>>()); break;
      case TypeTag::tstzspanset: r = at_time(tv, when.as<SpanSet<Timestamp>>()); break;
      case TypeTag::timestamptz: r = at_time(tv, Span<Timestamp>::singleton(when.as<Timestamp>())); break;
      case TypeTag::tstzset: {
        std::vector<Span<Timestamp>> spans;
        for (Timestamp t : when.as<Set<Timestamp>>().elements()) spans.push_back(Span<Timestamp>::singleton(t));
        r = at_time(tv, SpanSet<Timestamp>(std::move(spans)));
        break;
      }
      default:
        throw EvalError("argument 2: expected tstzspan, tstzspanset, tstzset or timestamptz, got " +
                        std::string(tag_name(when.tag)));
    }
    if (!r) return std::nullopt;
    return Literal{l.tag, *r};
  });
}

bool span_covers(const Literal& a, const Literal& b) {
  return std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (requires { s.lower(); s.contains(s.lower()); }) {
          using T = std::decay_t<decltype(s.lower())>;
          if (const auto* v = std::get_if<T>(&b.value)) return s.contains(*v);
          if (const auto* o = std::get_if<S>(&b.value)) return intersection(s, *o) == *o;
        }
        throw EvalError("@>: unsupported operands " + std::string(tag_name(a.tag)) + " and " +
                        std::string(tag_name(b.tag)));
      },
      a.value);
}

Result eval_infix(const std::string& op, const Arg& lhs, const Arg& rhs) {
  if (lhs.null || rhs.null) return std::nullopt;
  bool spans = (lhs.lit && lhs.lit->kind() == LiteralKind::span) || (rhs.lit && rhs.lit->kind() == LiteralKind::span);
  if (spans) {
    TypeTag tag = lhs.lit && lhs.lit->kind() == LiteralKind::span ? lhs.lit->tag : rhs.lit->tag;
    Literal a = coerce(lhs, tag, 0);
    if (op == "@>") {
      Literal b = rhs.raw ? parse_at(*rhs.raw, tag, rhs.at) : *rhs.lit;
      return Literal{TypeTag::boolean, span_covers(a, b)};
    }
    Literal b = coerce(rhs, tag, 1);
    bool r = std::visit(
        [&](const auto& s) -> bool {
          using S = std::decay_t<decltype(s)>;
          if constexpr (requires { s.overlaps(s); s.lower(); }) {
            return s.overlaps(std::get<S>(b.value));
          } else {
            throw EvalError("&&: unsupported operands");
          }
        },
        a.value);
    return Literal{TypeTag::boolean, r};
  }
  STBox a = as_stbox(lhs, 0);
  STBox b = as_stbox(rhs, 1);
  return Literal{TypeTag::boolean, op == "&&" ? overlaps(a, b) : contains(a, b)};
}

const std::map<std::string, Function>& functions() {
  static const std::map<std::string, Function> table = {
      {"duration", {1, 2, [](const Args& a) -> Result {
         bool bound = a.size() > 1 && coerce(a[1], TypeTag::boolean, 1).as<bool>();
         return with_temporal(typed(a[0], 0, "a temporal value"), 0,
                              [&](const auto& tv) { return Literal{TypeTag::interval, duration(tv, bound)}; });
       }}},
      {"shiftscale", {2, 3, eval_shift_scale}},
      {"expandspace", {2, 2, [](const Args& a) -> Result {
         return Literal{TypeTag::stbox, expand_space(as_stbox(a[0], 0), as_double(a[1], 1))};
       }}},
      {"expandtime", {2, 2, [](const Args& a) -> Result {
         Interval i = as_interval(a[1], 1);
         if (a[0].lit && a[0].lit->tag == TypeTag::tbox) return Literal{TypeTag::tbox, expand_time(a[0].lit->as<TBox>(), i)};
         return Literal{TypeTag::stbox, expand_time(as_stbox(a[0], 0), i)};
       }}},
      {"tgeometry", {2, 3, [](const Args& a) -> Result {
         Geometry g = coerce(a[0], TypeTag::geometry, 0).as<Geometry>();
         Interp interp = a.size() > 2 ? as_interp(a[2], 2) : Interp::step;
         Literal when = a[1].raw ? parse_at(*a[1].raw, TypeTag::tstzspan, a[1].at) : *a[1].lit;
         Span<Timestamp> s = when.tag == TypeTag::timestamptz ? Span<Timestamp>::singleton(when.as<Timestamp>())
                                                               : coerce(a[1], TypeTag::tstzspan, 1).as<Span<Timestamp>>();
         return Literal{TypeTag::tgeometry, tgeometry_from(g, s, interp)};
       }}},
      {"tgeompoint", {2, 3, [](const Args& a) -> Result {
         Geometry g = coerce(a[0], TypeTag::geometry, 0).as<Geometry>();
         Interp interp = a.size() > 2 ? as_interp(a[2], 2) : Interp::linear;
         Literal when = a[1].raw ? parse_at(*a[1].raw, TypeTag::tstzspan, a[1].at) : *a[1].lit;
         Span<Timestamp> s = when.tag == TypeTag::timestamptz ? Span<Timestamp>::singleton(when.as<Timestamp>())
                                                               : coerce(a[1], TypeTag::tstzspan, 1).as<Span<Timestamp>>();
         return Literal{TypeTag::tgeompoint, tgeometry_from(g, s, interp)};
       }}},
      {"astext", {1, 2, [](const Args& a) -> Result {
         return Literal{TypeTag::text, serialize(typed(a[0], 0, "a value"), decimals(a, 1))};
       }}},
      {"asewkt", {1, 2, [](const Args& a) -> Result {
         return Literal{TypeTag::text, serialize_ewkt(typed(a[0], 0, "a value"), decimals(a, 1))};
       }}},
      {"attime", {2, 2, eval_at_time}},
      {"atvalues", {2, 2, [](const Args& a) -> Result {
         const Literal& l = typed(a[0], 0, "a temporal value");
         return with_temporal(l, 0, [&](const auto& tv) -> Result {
           using B = std::decay_t<decltype(tv.instants().front().value)>;
           Literal v = coerce(a[1], base_tag<B>(), 1);
           if constexpr (std::is_same_v<B, Point>) check_same_srid(tv.srid(), v.as<Geometry>().srid());
           auto r = at_values(tv, base_value<B>(v));
           if (!r) return std::nullopt;
           return Literal{l.tag, *r};
         });
       }}},
      {"valueattimestamp", {2, 2, [](const Args& a) -> Result {
         Timestamp t = coerce(a[1], TypeTag::timestamptz, 1).as<Timestamp>();
         return with_temporal(typed(a[0], 0, "a temporal value"), 0, [&](const auto& tv) -> Result {
           auto v = value_at_timestamp(tv, t);
           if (!v) return std::nullopt;
           return base_literal(*v, tv.srid());
         });
       }}},
      {"starttimestamp", {1, 1, [](const Args& a) -> Result {
         return with_temporal(typed(a[0], 0, "a temporal value"), 0,
                              [](const auto& tv) { return Literal{TypeTag::timestamptz, start_timestamp(tv)}; });
       }}},
      {"endtimestamp", {1, 1, [](const Args& a) -> Result {
         return with_temporal(typed(a[0], 0, "a temporal value"), 0,
                              [](const auto& tv) { return Literal{TypeTag::timestamptz, end_timestamp(tv)}; });
       }}},
      {"trajectory", {1, 1, [](const Args& a) -> Result {
         return Literal{TypeTag::geometry, trajectory(tpoint(a[0], 0))};
       }}},
      {"length", {1, 1, [](const Args& a) -> Result { return Literal{TypeTag::float8, length(tpoint(a[0], 0))}; }}},
      {"atgeometry", {2, 2, [](const Args& a) -> Result {
         auto r = at_geometry(tpoint(a[0], 0), coerce(a[1], TypeTag::geometry, 1).as<Geometry>());
         if (!r) return std::nullopt;
         return Literal{a[0].lit ? a[0].lit->tag : TypeTag::tgeompoint, *r};
       }}},
      {"whentrue", {1, 1, [](const Args& a) -> Result {
         auto r = when_true(coerce(a[0], TypeTag::tbool, 0).as<TBool>());
         if (!r) return std::nullopt;
         return Literal{TypeTag::tstzspanset, *r};
       }}},
      {"tdwithin", {3, 3, [](const Args& a) -> Result {
         auto r = t_dwithin(tpoint(a[0], 0), tpoint(a[1], 1), as_double(a[2], 2));
         if (!r) return std::nullopt;
         return Literal{TypeTag::tbool, *r};
       }}},
      {"edwithin", {3, 3, [](const Args& a) -> Result {
         return Literal{TypeTag::boolean, e_dwithin(tpoint(a[0], 0), tpoint(a[1], 1), as_double(a[2], 2))};
       }}},
      {"eintersects", {2, 2, [](const Args& a) -> Result {
         return Literal{TypeTag::boolean,
                        e_intersects(tpoint(a[0], 0), coerce(a[1], TypeTag::geometry, 1).as<Geometry>())};
       }}},
      {"stbox", {1, 1, [](const Args& a) -> Result { return Literal{TypeTag::stbox, as_stbox(a[0], 0)}; }}},
  };
  return table;
}

class Evaluator {
 public:
  explicit Evaluator(std::string_view text) : s_(text) {}

  Result run() {
    ws();
    std::size_t save = pos_;
    if (lower(ident()) != "select") pos_ = save;
    Arg a = expr();
    ws();
    if (peek() == ';') ++pos_;
    ws();
    if (pos_ != s_.size()) throw ParseError("unexpected trailing input", pos_);
    if (a.null) return std::nullopt;
    if (a.raw) return Literal{TypeTag::text, *a.raw};
    return a.lit;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string ident() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  void expect(char c) {
    ws();
    if (peek() != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  // SQL string: '' escapes a quote. Sets `at` to the offset of the content.
  std::string quoted(std::size_t& at) {
    at = pos_ + 1;
    std::size_t open = pos_++;
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) throw ParseError("unterminated string", open);
      char c = s_[pos_++];
      if (c == '\'') {
        if (peek() != '\'') return out;
        ++pos_;
      }
      out.push_back(c);
    }
  }

  TypeTag tag_at(std::string_view name, std::size_t at) {
    auto tag = tag_from_name(name);
    if (!tag) throw ParseError("unknown type '" + std::string(name) + "'", at);
    return *tag;
  }

  Arg expr() {
    Arg lhs = operand();
    ws();
    for (const char* op : {"&&", "@>"}) {
      if (s_.substr(pos_, 2) == op) {
        pos_ += 2;
        Arg rhs = operand();
        Arg out;
        out.at = lhs.at;
        auto r = eval_infix(op, lhs, rhs);
        if (r) {
          out.lit = std::move(*r);
        } else {
          out.null = true;
        }
        return out;
      }
    }
    return lhs;
  }

  Arg operand() {
    ws();
    Arg a;
    a.at = pos_;
    char c = peek();
    if (c == '(') {
      ++pos_;
      a = expr();
      expect(')');
    } else if (c == '\'') {
      std::size_t at;
      std::string text = quoted(at);
      ws();
      if (s_.substr(pos_, 2) == "::") {
        pos_ += 2;
        ws();
        std::size_t tag_pos = pos_;
        a.lit = parse_at(text, tag_at(ident(), tag_pos), at);
      } else {
        a.raw = std::move(text);
        a.at = at;
      }
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      a.lit = number();
    } else if (ident_char(c)) {
      std::size_t name_pos = pos_;
      std::string name = ident();
      ws();
      std::string key = lower(name);
      if (peek() == '(') {
        a = call(key, name, name_pos);
      } else if (peek() == '\'') {
        TypeTag tag = tag_at(name, name_pos);
        std::size_t at;
        std::string text = quoted(at);
        a.lit = parse_at(text, tag, at);
      } else if (key == "true" || key == "false") {
        a.lit = Literal{TypeTag::boolean, key == "true"};
      } else if (key == "null") {
        a.null = true;
      } else {
        throw ParseError("expected '(' or a quoted literal after '" + name + "'", pos_);
      }
    } else {
      throw ParseError("expected an expression", pos_);
    }
    ws();
    if (s_.substr(pos_, 2) == "::" && !a.null) {
      pos_ += 2;
      ws();
      std::size_t tag_pos = pos_;
      TypeTag tag = tag_at(ident(), tag_pos);
      a.lit = coerce(a, tag, 0);
      a.raw.reset();
    }
    return a;
  }

  Literal number() {
    std::size_t start = pos_;
    if (peek() == '-' || peek() == '+') ++pos_;
    bool real = false;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '.' || c == 'e' || c == 'E') {
        real = true;
        ++pos_;
        if ((c == 'e' || c == 'E') && (peek() == '-' || peek() == '+')) ++pos_;
      } else {
        break;
      }
    }
    std::string_view text = s_.substr(start, pos_ - start);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const char* b = text.data();
    const char* e = b + text.size();
    if (!real) {
      std::int64_t v;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec == std::errc() && p == e) {
        if (v >= INT32_MIN && v <= INT32_MAX) return Literal{TypeTag::int4, static_cast<std::int32_t>(v)};
        return Literal{TypeTag::int8, v};
      }
    }
    double d;
    auto [p, ec] = std::from_chars(b, e, d);
    if (ec != std::errc() || p != e) throw ParseError("malformed number", start);
    return Literal{TypeTag::float8, d};
  }

  Arg call(const std::string& key, const std::string& name, std::size_t name_pos) {
    expect('(');
    Args args;
    ws();
    if (peek() != ')') {
      while (true) {
        args.push_back(expr());
        ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect(')');
    auto it = functions().find(key);
    if (it == functions().end()) throw EvalError("unknown function '" + name + "'");
    const Function& f = it->second;
    if (args.size() < f.min_args || args.size() > f.max_args) {
      std::string want = f.min_args == f.max_args ? std::to_string(f.min_args)
                                                  : std::to_string(f.min_args) + " to " + std::to_string(f.max_args);
      throw EvalError(name + " takes " + want + " arguments, got " + std::to_string(args.size()));
    }
    Arg out;
    out.at = name_pos;
    for (const auto& a : args)
      if (a.null) {
        out.null = true;
        return out;
      }
    Result r;
    try {
      r = f.run(args);
    } catch (const EvalError& e) {
      throw EvalError(name + ": " + e.what());
    }
    if (r) {
      out.lit = std::move(*r);
    } else {
      out.null = true;
    }
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<Literal> eval_expression(std::string_view expr) { return Evaluator(expr).run(); }

std::string format_result(const std::optional<Literal>& result) {
  if (!result) return "NULL";
  if (result->tag == TypeTag::text) return result->as<std::string>();
  return serialize(*result);
}

}  // namespace mobkit::workbench
