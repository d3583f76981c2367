#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "mobkit/error.hpp"
#include "mobkit/geometry.hpp"
#include "mobkit/time.hpp"

namespace mobkit {

// Per-base-type properties. Discrete bases are canonicalized to [lo, hi).
template <class T>
struct BaseTraits;

template <>
struct BaseTraits<std::int32_t> {
  static constexpr bool discrete = true;
  static std::int32_t next(std::int32_t v) { return v + 1; }
  static std::int32_t prev(std::int32_t v) { return v - 1; }
};

template <>
struct BaseTraits<std::int64_t> {
  static constexpr bool discrete = true;
  static std::int64_t next(std::int64_t v) { return v + 1; }
  static std::int64_t prev(std::int64_t v) { return v - 1; }
};

template <>
struct BaseTraits<Date> {
  static constexpr bool discrete = true;
  static Date next(Date v) { return {v.days + 1}; }
  static Date prev(Date v) { return {v.days - 1}; }
};

template <>
struct BaseTraits<double> {
  static constexpr bool discrete = false;
};

template <>
struct BaseTraits<Timestamp> {
  static constexpr bool discrete = false;
};

/// Range of an ordered base type with inclusivity flags.
///
/// Invariant: lower < upper, or lower == upper with both bounds inclusive.
/// Discrete bases are stored as [lower, upper) and compare equal across
/// equivalent spellings, e.g. [1, 3] == [1, 4).
template <class T>
class Span {
 public:
  Span(T lower, T upper, bool lower_inc = true, bool upper_inc = true)
      : lower_(lower), upper_(upper), lower_inc_(lower_inc), upper_inc_(upper_inc) {
    if constexpr (BaseTraits<T>::discrete) {
      if (!lower_inc_) {
        lower_ = BaseTraits<T>::next(lower_);
        lower_inc_ = true;
      }
      if (upper_inc_) {
        upper_ = BaseTraits<T>::next(upper_);
        upper_inc_ = false;
      }
      if (!(lower_ < upper_)) throw InvalidValue("span lower bound must not exceed upper bound");
    } else {
      if (upper_ < lower_) throw InvalidValue("span lower bound must not exceed upper bound");
      if (lower_ == upper_ && !(lower_inc_ && upper_inc_))
        throw InvalidValue("empty span: equal bounds must both be inclusive");
    }
  }

  static Span singleton(T v) { return Span(v, v, true, true); }

  const T& lower() const noexcept { return lower_; }
  const T& upper() const noexcept { return upper_; }
  bool lower_inc() const noexcept { return lower_inc_; }
  bool upper_inc() const noexcept { return upper_inc_; }

  /// Inclusive upper value for discrete bases (how the span is rendered).
  T last() const {
    if constexpr (BaseTraits<T>::discrete) {
      return BaseTraits<T>::prev(upper_);
    } else {
      return upper_;
    }
  }

  bool contains(const T& v) const {
    bool above = lower_inc_ ? !(v < lower_) : lower_ < v;
    bool below = upper_inc_ ? !(upper_ < v) : v < upper_;
    return above && below;
  }

  bool overlaps(const Span& o) const {
    return starts_before_end(*this, o) && starts_before_end(o, *this);
  }

  /// True when `o` starts exactly where this span ends, with no gap and no overlap.
  bool adjacent_before(const Span& o) const {
    return upper_ == o.lower_ && (upper_inc_ != o.lower_inc_);
  }

  friend bool operator==(const Span&, const Span&) = default;

 private:
  // a.lower is not after b.upper.
  static bool starts_before_end(const Span& a, const Span& b) {
    if (a.lower_ < b.upper_) return true;
    return a.lower_ == b.upper_ && a.lower_inc_ && b.upper_inc_;
  }

  T lower_;
  T upper_;
  bool lower_inc_;
  bool upper_inc_;
};

/// Overlapping portion of two spans, if any.
template <class T>
std::optional<Span<T>> intersection(const Span<T>& a, const Span<T>& b) {
  if (!a.overlaps(b)) return std::nullopt;
  T lo = a.lower();
  bool lo_inc = a.lower_inc();
  if (b.lower() > lo || (b.lower() == lo && !b.lower_inc())) {
    lo = b.lower();
    lo_inc = b.lower_inc();
  }
  T hi = a.upper();
  bool hi_inc = a.upper_inc();
  if (b.upper() < hi || (b.upper() == hi && !b.upper_inc())) {
    hi = b.upper();
    hi_inc = b.upper_inc();
  }
  return Span<T>(lo, hi, lo_inc, hi_inc);
}

/// Ordered, duplicate-free, non-empty collection of base values.
/// `srid` is meaningful for point sets only.
template <class T>
class Set {
 public:
  explicit Set(std::vector<T> elements, Srid srid = std::nullopt)
      : elements_(std::move(elements)), srid_(srid) {
    if (elements_.empty()) throw InvalidValue("empty set literal");
    std::sort(elements_.begin(), elements_.end());
    elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
  }

  const std::vector<T>& elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const T& front() const { return elements_.front(); }
  const T& back() const { return elements_.back(); }
  const Srid& srid() const noexcept { return srid_; }

  friend bool operator==(const Set&, const Set&) = default;

 private:
  std::vector<T> elements_;
  Srid srid_;
};

/// Normalized union of spans: sorted by lower bound, pairwise disjoint and
/// non-adjacent. Construction merges overlapping and adjacent inputs.
template <class T>
class SpanSet {
 public:
  explicit SpanSet(std::vector<Span<T>> spans) {
    if (spans.empty()) throw InvalidValue("empty span set");
    std::sort(spans.begin(), spans.end(), [](const Span<T>& a, const Span<T>& b) {
      if (a.lower() != b.lower()) return a.lower() < b.lower();
      return a.lower_inc() && !b.lower_inc();
    });
    for (const Span<T>& s : spans) {
      if (!spans_.empty()) {
        Span<T>& cur = spans_.back();
        if (cur.overlaps(s) || cur.adjacent_before(s)) {
          bool extend = s.upper() > cur.upper() || (s.upper() == cur.upper() && s.upper_inc());
          if (extend) cur = Span<T>(cur.lower(), s.upper(), cur.lower_inc(), s.upper_inc());
          continue;
        }
      }
      spans_.push_back(s);
    }
  }

  const std::vector<Span<T>>& spans() const noexcept { return spans_; }
  std::size_t size() const noexcept { return spans_.size(); }

  bool contains(const T& v) const {
    auto it = std::upper_bound(spans_.begin(), spans_.end(), v,
                               [](const T& x, const Span<T>& s) { return x < s.lower(); });
    if (it == spans_.begin()) return false;
    return std::prev(it)->contains(v);
  }

  /// Bounding span.
  Span<T> extent() const {
    return Span<T>(spans_.front().lower(), spans_.back().upper(), spans_.front().lower_inc(),
                   spans_.back().upper_inc());
  }

  friend bool operator==(const SpanSet&, const SpanSet&) = default;

 private:
  std::vector<Span<T>> spans_;
};

template <class T>
SpanSet<T> spanset_union_normalize(std::vector<Span<T>> spans) {
  return SpanSet<T>(std::move(spans));
}

/// Pairwise intersection of two span sets; nullopt when empty.
template <class T>
std::optional<SpanSet<T>> intersection(const SpanSet<T>& a, const SpanSet<T>& b) {
  std::vector<Span<T>> out;
  std::size_t i = 0, j = 0;
  const auto& sa = a.spans();
  const auto& sb = b.spans();
  while (i < sa.size() && j < sb.size()) {
    if (auto x = intersection(sa[i], sb[j])) out.push_back(*x);
    bool a_ends_first = sa[i].upper() < sb[j].upper() ||
                        (sa[i].upper() == sb[j].upper() && !sa[i].upper_inc());
    if (a_ends_first) {
      ++i;
    } else {
      ++j;
    }
  }
  if (out.empty()) return std::nullopt;
  return SpanSet<T>(std::move(out));
}

template <class T>
Set<T> value_to_set(T v) {
  return Set<T>({std::move(v)});
}

/// The `@>` operator between a time span and an instant.
inline bool span_contains(const Span<Timestamp>& s, Timestamp t) { return s.contains(t); }

// Shift-and-scale

/// Moves the set so its first element lands at first + shift and, when
/// `width` is given, rescales it so last - first == width. Single-element
/// sets ignore `width`. Throws InvalidValue on a non-positive width.
Set<Timestamp> shift_scale(const Set<Timestamp>& s, std::optional<Interval> shift,
                           std::optional<Interval> width);
Set<std::int32_t> shift_scale(const Set<std::int32_t>& s, std::optional<std::int32_t> shift,
                              std::optional<std::int32_t> width);
Set<std::int64_t> shift_scale(const Set<std::int64_t>& s, std::optional<std::int64_t> shift,
                              std::optional<std::int64_t> width);
Set<double> shift_scale(const Set<double>& s, std::optional<double> shift,
                        std::optional<double> width);

// Casts between set base types.

Set<double> intset_to_floatset(const Set<std::int32_t>& s);
/// Rounds half away from zero, then removes duplicates.
Set<std::int32_t> floatset_to_intset(const Set<double>& s);
Set<Timestamp> dateset_to_tstzset(const Set<Date>& s);
Set<Date> tstzset_to_dateset(const Set<Timestamp>& s);

// Canonical binary layout used for sizing:
//   u8 tag | u32 count | [i32 srid, point sets only] | elements
// Fixed-width elements: int/date 4 bytes; bigint/float/timestamptz 8 bytes;
// point 16 bytes (x, y). Text elements: u32 length followed by the bytes.
// All integers little-endian.

template <class T>
std::vector<std::uint8_t> encode_set(const Set<T>& s);

template <class T>
std::size_t set_mem_size(const Set<T>& s);

}  // namespace mobkit
