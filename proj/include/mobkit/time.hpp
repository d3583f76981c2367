#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace mobkit {

inline constexpr std::int64_t kMicrosPerSecond = 1'000'000;
inline constexpr std::int64_t kMicrosPerMinute = 60 * kMicrosPerSecond;
inline constexpr std::int64_t kMicrosPerHour = 60 * kMicrosPerMinute;
inline constexpr std::int64_t kMicrosPerDay = 24 * kMicrosPerHour;

/// Fixed-length duration in microseconds. Days are always 86 400 s.
struct Interval {
  std::int64_t micros = 0;

  static constexpr Interval days(std::int64_t n) { return {n * kMicrosPerDay}; }
  static constexpr Interval hours(std::int64_t n) { return {n * kMicrosPerHour}; }
  static constexpr Interval minutes(std::int64_t n) { return {n * kMicrosPerMinute}; }
  static constexpr Interval seconds(std::int64_t n) { return {n * kMicrosPerSecond}; }

  double to_seconds() const { return static_cast<double>(micros) / kMicrosPerSecond; }

  friend constexpr auto operator<=>(Interval, Interval) = default;
  friend constexpr Interval operator+(Interval a, Interval b) { return {a.micros + b.micros}; }
  friend constexpr Interval operator-(Interval a, Interval b) { return {a.micros - b.micros}; }
  friend constexpr Interval operator-(Interval a) { return {-a.micros}; }
};

/// Instant in time: UTC microseconds since 1970-01-01 00:00:00.
struct Timestamp {
  std::int64_t micros = 0;

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
  friend constexpr Timestamp operator+(Timestamp t, Interval i) { return {t.micros + i.micros}; }
  friend constexpr Timestamp operator-(Timestamp t, Interval i) { return {t.micros - i.micros}; }
  friend constexpr Interval operator-(Timestamp a, Timestamp b) { return {a.micros - b.micros}; }
};

/// Calendar date: days since 1970-01-01.
struct Date {
  std::int32_t days = 0;

  friend constexpr auto operator<=>(Date, Date) = default;
};

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour = 0, int minute = 0,
                         int second = 0, std::int64_t micros = 0);
Date make_date(int year, unsigned month, unsigned day);

Timestamp to_timestamp(Date d);
/// Calendar date (UTC) containing `t`.
Date to_date(Timestamp t);

// Parsing throws ParseError with offsets relative to the argument.

/// `YYYY-MM-DD[( |T)HH:MM[:SS[.ffffff]]][Z|(+|-)HH[[:]MM]]`, normalized to UTC.
Timestamp parse_timestamp(std::string_view text);
/// `YYYY-MM-DD`
Date parse_date(std::string_view text);
/// `N days`, `N hours`, `1 day 02:00:00`, `HH:MM:SS`, or a bare number of seconds.
Interval parse_interval(std::string_view text);

/// `YYYY-MM-DD HH:MM:SS[.ffffff]+00`
std::string format_timestamp(Timestamp t);
std::string format_date(Date d);
/// PostgreSQL style: `2 days`, `1 day 01:30:00`, `00:00:00`.
std::string format_interval(Interval i);

}  // namespace mobkit
