#include "mobkit/span.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace mobkit {

namespace {

void require_any(bool shift, bool width) {
  if (!shift && !width) throw InvalidValue("shift_scale needs a shift or a width");
}

// Rounded (a * b) / c, halves away from zero; c > 0.
std::int64_t mul_div_round(std::int64_t a, std::int64_t b, std::int64_t c) {
  __int128 num = static_cast<__int128>(a) * b;
  __int128 q = num / c;
  __int128 r = num % c;
  if (r < 0) r = -r;
  if (2 * r >= c) q += (num < 0 ? -1 : 1);
  return static_cast<std::int64_t>(q);
}

template <class I>
Set<I> shift_scale_integral(const Set<I>& s, std::optional<I> shift, std::optional<I> width) {
  require_any(shift.has_value(), width.has_value());
  if (width && *width <= 0) throw InvalidValue("shift_scale width must be positive");
  std::int64_t first = s.front();
  std::int64_t extent = static_cast<std::int64_t>(s.back()) - first;
  std::int64_t new_first = first + (shift ? *shift : 0);
  std::vector<I> out;
  out.reserve(s.size());
  for (I e : s.elements()) {
    std::int64_t offset = static_cast<std::int64_t>(e) - first;
    if (width && extent > 0) offset = mul_div_round(offset, *width, extent);
    std::int64_t v = new_first + offset;
    if (v < std::numeric_limits<I>::min() || v > std::numeric_limits<I>::max())
      throw InvalidValue("shift_scale result out of range");
    out.push_back(static_cast<I>(v));
  }
  return Set<I>(std::move(out));
}

template <class T>
struct Codec;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_u64(out, bits);
}

template <>
struct Codec<std::int32_t> {
  static constexpr std::uint8_t tag = 1;
  static std::size_t size(std::int32_t) { return 4; }
  static void put(std::vector<std::uint8_t>& o, std::int32_t v) {
    put_u32(o, static_cast<std::uint32_t>(v));
  }
};

template <>
struct Codec<std::int64_t> {
  static constexpr std::uint8_t tag = 2;
  static std::size_t size(std::int64_t) { return 8; }
  static void put(std::vector<std::uint8_t>& o, std::int64_t v) {
    put_u64(o, static_cast<std::uint64_t>(v));
  }
};

template <>
struct Codec<double> {
  static constexpr std::uint8_t tag = 3;
  static std::size_t size(double) { return 8; }
  static void put(std::vector<std::uint8_t>& o, double v) { put_f64(o, v); }
};

template <>
struct Codec<Date> {
  static constexpr std::uint8_t tag = 4;
  static std::size_t size(Date) { return 4; }
  static void put(std::vector<std::uint8_t>& o, Date v) {
    put_u32(o, static_cast<std::uint32_t>(v.days));
  }
};

template <>
struct Codec<Timestamp> {
  static constexpr std::uint8_t tag = 5;
  static std::size_t size(Timestamp) { return 8; }
  static void put(std::vector<std::uint8_t>& o, Timestamp v) {
    put_u64(o, static_cast<std::uint64_t>(v.micros));
  }
};

template <>
struct Codec<std::string> {
  static constexpr std::uint8_t tag = 6;
  static std::size_t size(const std::string& v) { return 4 + v.size(); }
  static void put(std::vector<std::uint8_t>& o, const std::string& v) {
    put_u32(o, static_cast<std::uint32_t>(v.size()));
    o.insert(o.end(), v.begin(), v.end());
  }
};

template <>
struct Codec<Point> {
  static constexpr std::uint8_t tag = 7;
  static std::size_t size(const Point&) { return 16; }
  static void put(std::vector<std::uint8_t>& o, const Point& p) {
    put_f64(o, p.x);
    put_f64(o, p.y);
  }
};

}  // namespace

Set<Timestamp> shift_scale(const Set<Timestamp>& s, std::optional<Interval> shift,
                           std::optional<Interval> width) {
  require_any(shift.has_value(), width.has_value());
  if (width && width->micros <= 0) throw InvalidValue("shift_scale width must be positive");
  Timestamp first = s.front();
  std::int64_t extent = (s.back() - first).micros;
  Timestamp new_first = first + (shift ? *shift : Interval{});
  std::vector<Timestamp> out;
  out.reserve(s.size());
  for (Timestamp e : s.elements()) {
    std::int64_t offset = (e - first).micros;
    if (width && extent > 0) offset = mul_div_round(offset, width->micros, extent);
    out.push_back(new_first + Interval{offset});
  }
  return Set<Timestamp>(std::move(out));
}

Set<std::int32_t> shift_scale(const Set<std::int32_t>& s, std::optional<std::int32_t> shift,
                              std::optional<std::int32_t> width) {
  return shift_scale_integral(s, shift, width);
}

Set<std::int64_t> shift_scale(const Set<std::int64_t>& s, std::optional<std::int64_t> shift,
                              std::optional<std::int64_t> width) {
  return shift_scale_integral(s, shift, width);
}

Set<double> shift_scale(const Set<double>& s, std::optional<double> shift,
                        std::optional<double> width) {
  require_any(shift.has_value(), width.has_value());
  if (width && !(*width > 0)) throw InvalidValue("shift_scale width must be positive");
  double first = s.front();
  double extent = s.back() - first;
  double new_first = first + (shift ? *shift : 0.0);
  std::vector<double> out;
  out.reserve(s.size());
  for (double e : s.elements()) {
    if (width && extent > 0) {
      out.push_back(new_first + (e - first) / extent * *width);
    } else {
      out.push_back(new_first + (e - first));
    }
  }
  return Set<double>(std::move(out));
}

Set<double> intset_to_floatset(const Set<std::int32_t>& s) {
  std::vector<double> out(s.elements().begin(), s.elements().end());
  return Set<double>(std::move(out));
}

Set<std::int32_t> floatset_to_intset(const Set<double>& s) {
  std::vector<std::int32_t> out;
  out.reserve(s.size());
  for (double v : s.elements()) {
    double r = std::round(v);
    if (!(r >= std::numeric_limits<std::int32_t>::min() &&
          r <= std::numeric_limits<std::int32_t>::max()))
      throw InvalidValue("float value out of int range");
    out.push_back(static_cast<std::int32_t>(r));
  }
  return Set<std::int32_t>(std::move(out));
}

Set<Timestamp> dateset_to_tstzset(const Set<Date>& s) {
  std::vector<Timestamp> out;
  out.reserve(s.size());
  for (Date d : s.elements()) out.push_back(to_timestamp(d));
  return Set<Timestamp>(std::move(out));
}

Set<Date> tstzset_to_dateset(const Set<Timestamp>& s) {
  std::vector<Date> out;
  out.reserve(s.size());
  for (Timestamp t : s.elements()) out.push_back(to_date(t));
  return Set<Date>(std::move(out));
}

template <class T>
std::vector<std::uint8_t> encode_set(const Set<T>& s) {
  std::vector<std::uint8_t> out;
  out.push_back(Codec<T>::tag);
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  if constexpr (std::is_same_v<T, Point>) put_u32(out, static_cast<std::uint32_t>(s.srid().value_or(0)));
  for (const T& v : s.elements()) Codec<T>::put(out, v);
  return out;
}

template <class T>
std::size_t set_mem_size(const Set<T>& s) {
  std::size_t n = 1 + 4;
  if constexpr (std::is_same_v<T, Point>) n += 4;
  for (const T& v : s.elements()) n += Codec<T>::size(v);
  return n;
}

#define MOBKIT_INSTANTIATE_SET(T)                                   \
  template std::vector<std::uint8_t> encode_set<T>(const Set<T>&); \
  template std::size_t set_mem_size<T>(const Set<T>&);

MOBKIT_INSTANTIATE_SET(std::int32_t)
MOBKIT_INSTANTIATE_SET(std::int64_t)
MOBKIT_INSTANTIATE_SET(double)
MOBKIT_INSTANTIATE_SET(Date)
MOBKIT_INSTANTIATE_SET(Timestamp)
MOBKIT_INSTANTIATE_SET(std::string)
MOBKIT_INSTANTIATE_SET(Point)

#undef MOBKIT_INSTANTIATE_SET

}  // namespace mobkit
