#include "mobkit/time.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cctype>
#include <cstdlib>

#include "mobkit/error.hpp"

namespace mobkit {

namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::sys_days;
using std::chrono::year;
using std::chrono::year_month_day;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  std::size_t pos() const { return pos_; }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  void skip_space() {
    while (!done() && is_space(s_[pos_])) ++pos_;
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c, const char* what) {
    if (!accept(c)) throw ParseError(std::string("expected ") + what, pos_);
  }
  int digits(int count, const char* what) {
    int v = 0;
    for (int i = 0; i < count; ++i) {
      if (!is_digit(peek())) throw ParseError(std::string("expected ") + what, pos_);
      v = v * 10 + (s_[pos_++] - '0');
    }
    return v;
  }
  std::string_view rest() const { return s_.substr(pos_); }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

struct Ymd {
  int y;
  unsigned m;
  unsigned d;
};

Ymd scan_date(Scanner& sc) {
  std::size_t start = sc.pos();
  Ymd r{};
  r.y = sc.digits(4, "year");
  sc.expect('-', "'-'");
  r.m = static_cast<unsigned>(sc.digits(2, "month"));
  sc.expect('-', "'-'");
  r.d = static_cast<unsigned>(sc.digits(2, "day"));
  if (!year_month_day{year{r.y}, month{r.m}, day{r.d}}.ok())
    throw ParseError("invalid calendar date", start);
  return r;
}

std::int64_t days_of(const Ymd& d) {
  return sys_days{year{d.y} / month{d.m} / day{d.d}}.time_since_epoch().count();
}

// Fractional digits after '.', scaled to microseconds (rounded half up).
std::int64_t scan_fraction_micros(Scanner& sc) {
  std::int64_t value = 0;
  int n = 0;
  bool round_up = false;
  if (!is_digit(sc.peek())) throw ParseError("expected fractional digits", sc.pos());
  while (is_digit(sc.peek())) {
    int d = sc.peek() - '0';
    if (n < 6) {
      value = value * 10 + d;
    } else if (n == 6) {
      round_up = d >= 5;
    }
    ++n;
    sc.advance(1);
  }
  for (int i = n; i < 6; ++i) value *= 10;
  return value + (round_up ? 1 : 0);
}

void two_digits(char* out, int v) {
  out[0] = static_cast<char>('0' + v / 10);
  out[1] = static_cast<char>('0' + v % 10);
}

std::string format_clock(std::int64_t micros_of_day) {
  // micros_of_day >= 0; hours may exceed 23 only for intervals.
  std::int64_t h = micros_of_day / kMicrosPerHour;
  std::int64_t rem = micros_of_day % kMicrosPerHour;
  int m = static_cast<int>(rem / kMicrosPerMinute);
  rem %= kMicrosPerMinute;
  int s = static_cast<int>(rem / kMicrosPerSecond);
  std::int64_t frac = rem % kMicrosPerSecond;

  std::string out;
  if (h < 10) out += '0';
  out += std::to_string(h);
  char buf[6] = {':', 0, 0, ':', 0, 0};
  two_digits(buf + 1, m);
  two_digits(buf + 4, s);
  out.append(buf, 6);
  if (frac != 0) {
    char f[24];
    std::snprintf(f, sizeof f, ".%06lld", static_cast<long long>(frac));
    std::string fs(f);
    while (fs.back() == '0') fs.pop_back();
    out += fs;
  }
  return out;
}

}  // namespace

Timestamp make_timestamp(int y, unsigned mo, unsigned d, int hh, int mi, int ss, std::int64_t us) {
  std::int64_t days = sys_days{year{y} / month{mo} / day{d}}.time_since_epoch().count();
  return {days * kMicrosPerDay + hh * kMicrosPerHour + mi * kMicrosPerMinute +
          ss * kMicrosPerSecond + us};
}

Date make_date(int y, unsigned mo, unsigned d) {
  return {static_cast<std::int32_t>(sys_days{year{y} / month{mo} / day{d}}.time_since_epoch().count())};
}

Timestamp to_timestamp(Date d) { return {static_cast<std::int64_t>(d.days) * kMicrosPerDay}; }

Date to_date(Timestamp t) { return {static_cast<std::int32_t>(floor_div(t.micros, kMicrosPerDay))}; }

Timestamp parse_timestamp(std::string_view text) {
  Scanner sc(text);
  sc.skip_space();
  Ymd ymd = scan_date(sc);
  std::int64_t micros = days_of(ymd) * kMicrosPerDay;

  std::size_t before_time = sc.pos();
  sc.skip_space();
  char c = sc.peek();
  if (c == 'T' || c == 't' || (is_digit(c) && sc.pos() > before_time)) {
    if (c == 'T' || c == 't') sc.advance(1);
    std::size_t tpos = sc.pos();
    int hh = sc.digits(2, "hour");
    sc.expect(':', "':'");
    int mi = sc.digits(2, "minute");
    int ss = 0;
    std::int64_t frac = 0;
    if (sc.accept(':')) {
      ss = sc.digits(2, "second");
      if (sc.accept('.')) frac = scan_fraction_micros(sc);
    }
    if (hh > 24 || mi > 59 || ss > 60 || (hh == 24 && (mi != 0 || ss != 0 || frac != 0)))
      throw ParseError("time of day out of range", tpos);
    micros += hh * kMicrosPerHour + mi * kMicrosPerMinute + ss * kMicrosPerSecond + frac;
  }

  sc.skip_space();
  c = sc.peek();
  if (c == 'Z' || c == 'z') {
    sc.advance(1);
  } else if (c == '+' || c == '-') {
    sc.advance(1);
    int sign = c == '-' ? -1 : 1;
    int oh = sc.digits(2, "zone hours");
    int om = 0;
    if (sc.accept(':')) {
      om = sc.digits(2, "zone minutes");
    } else if (is_digit(sc.peek())) {
      om = sc.digits(2, "zone minutes");
    }
    micros -= sign * (oh * kMicrosPerHour + om * kMicrosPerMinute);
  }
  sc.skip_space();
  if (!sc.done()) throw ParseError("unexpected trailing characters in timestamp", sc.pos());
  return {micros};
}

Date parse_date(std::string_view text) {
  Scanner sc(text);
  sc.skip_space();
  Ymd ymd = scan_date(sc);
  sc.skip_space();
  if (!sc.done()) throw ParseError("unexpected trailing characters in date", sc.pos());
  return {static_cast<std::int32_t>(days_of(ymd))};
}

Interval parse_interval(std::string_view text) {
  Scanner sc(text);
  sc.skip_space();
  if (sc.done()) throw ParseError("empty interval", 0);
  long double total = 0;
  bool any = false;
  while (true) {
    sc.skip_space();
    if (sc.done()) break;
    std::size_t start = sc.pos();
    int sign = 1;
    if (sc.accept('-')) {
      sign = -1;
    } else {
      sc.accept('+');
    }
    std::string_view rest = sc.rest();
    // Clock form HH:MM[:SS[.f]]
    std::size_t ndig = 0;
    while (ndig < rest.size() && is_digit(rest[ndig])) ++ndig;
    if (ndig == 0) throw ParseError("expected number in interval", sc.pos());
    if (ndig < rest.size() && rest[ndig] == ':') {
      std::int64_t hh = std::strtoll(std::string(rest.substr(0, ndig)).c_str(), nullptr, 10);
      sc.advance(ndig + 1);
      int mi = sc.digits(2, "minutes");
      int ss = 0;
      std::int64_t frac = 0;
      if (sc.accept(':')) {
        ss = sc.digits(2, "seconds");
        if (sc.accept('.')) frac = scan_fraction_micros(sc);
      }
      if (mi > 59 || ss > 59) throw ParseError("clock field out of range", start);
      total += sign * static_cast<long double>(hh * kMicrosPerHour + mi * kMicrosPerMinute +
                                               ss * kMicrosPerSecond + frac);
      any = true;
      continue;
    }
    // Number, optionally followed by a unit.
    std::size_t len = ndig;
    if (len < rest.size() && rest[len] == '.') {
      ++len;
      while (len < rest.size() && is_digit(rest[len])) ++len;
    }
    double number = 0;
    auto res = std::from_chars(rest.data(), rest.data() + len, number);
    if (res.ec != std::errc()) throw ParseError("invalid number in interval", sc.pos());
    sc.advance(len);
    sc.skip_space();
    std::string unit;
    while (!sc.done() && std::isalpha(static_cast<unsigned char>(sc.peek()))) {
      unit += static_cast<char>(std::tolower(static_cast<unsigned char>(sc.peek())));
      sc.advance(1);
    }
    long double scale;
    if (unit.empty() || unit == "s" || unit == "sec" || unit == "secs" || unit == "second" ||
        unit == "seconds") {
      scale = kMicrosPerSecond;
    } else if (unit == "d" || unit == "day" || unit == "days") {
      scale = kMicrosPerDay;
    } else if (unit == "h" || unit == "hour" || unit == "hours") {
      scale = kMicrosPerHour;
    } else if (unit == "m" || unit == "min" || unit == "mins" || unit == "minute" ||
               unit == "minutes") {
      scale = kMicrosPerMinute;
    } else if (unit == "w" || unit == "week" || unit == "weeks") {
      scale = 7.0L * kMicrosPerDay;
    } else if (unit == "ms" || unit == "millisecond" || unit == "milliseconds") {
      scale = 1000;
    } else if (unit == "us" || unit == "microsecond" || unit == "microseconds") {
      scale = 1;
    } else if (unit == "mon" || unit == "mons" || unit == "month" || unit == "months" ||
               unit == "year" || unit == "years") {
      throw ParseError("calendar units are not supported in intervals", start);
    } else {
      throw ParseError("unknown interval unit '" + unit + "'", start);
    }
    total += sign * static_cast<long double>(number) * scale;
    any = true;
  }
  if (!any) throw ParseError("empty interval", 0);
  return {static_cast<std::int64_t>(std::llround(total))};
}

std::string format_timestamp(Timestamp t) {
  std::int64_t days = floor_div(t.micros, kMicrosPerDay);
  std::int64_t tod = t.micros - days * kMicrosPerDay;
  return format_date(Date{static_cast<std::int32_t>(days)}) + ' ' + format_clock(tod) + "+00";
}

std::string format_date(Date d) {
  year_month_day ymd{sys_days{std::chrono::days{d.days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_interval(Interval i) {
  std::int64_t days = i.micros / kMicrosPerDay;  // truncates toward zero
  std::int64_t rest = i.micros - days * kMicrosPerDay;
  std::string out;
  if (days != 0) {
    out = std::to_string(days) + (days == 1 ? " day" : " days");
  }
  if (rest != 0 || days == 0) {
    if (!out.empty()) out += ' ';
    if (rest < 0) out += '-';
    out += format_clock(rest < 0 ? -rest : rest);
  }
  return out;
}

}  // namespace mobkit
