#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mobkit/geometry.hpp"
#include "mobkit/span.hpp"
#include "mobkit/time.hpp"

namespace mobkit {

/// How a sequence's value evolves between its instants.
enum class Interp { discrete, step, linear };

const char* interp_name(Interp i);

/// Bases that admit linear interpolation.
template <class B>
inline constexpr bool is_continuous_base = std::is_same_v<B, double> || std::is_same_v<B, Point>;

template <class B>
struct TInstant {
  B value;
  Timestamp t;

  friend bool operator==(const TInstant&, const TInstant&) = default;
};

/// Ordered instants with an interpolation rule.
///
/// Timestamps are strictly increasing. Discrete sequences and single-instant
/// sequences have both bounds inclusive. Linear interpolation is only
/// available for float and point bases.
template <class B>
class TSequence {
 public:
  TSequence(std::vector<TInstant<B>> instants, Interp interp, bool lower_inc = true,
            bool upper_inc = true);

  const std::vector<TInstant<B>>& instants() const noexcept { return instants_; }
  Interp interp() const noexcept { return interp_; }
  bool lower_inc() const noexcept { return lower_inc_; }
  bool upper_inc() const noexcept { return upper_inc_; }

  Timestamp start_time() const { return instants_.front().t; }
  Timestamp end_time() const { return instants_.back().t; }
  Span<Timestamp> time_span() const {
    return Span<Timestamp>(start_time(), end_time(), lower_inc_, upper_inc_);
  }

  friend bool operator==(const TSequence&, const TSequence&) = default;

 private:
  std::vector<TInstant<B>> instants_;
  Interp interp_;
  bool lower_inc_;
  bool upper_inc_;
};

/// Temporally disjoint, ordered continuous sequences (a value with gaps).
///
/// Construction merges neighbours that touch in time with equal boundary
/// values and compatible inclusivity.
template <class B>
class TSequenceSet {
 public:
  explicit TSequenceSet(std::vector<TSequence<B>> sequences);

  const std::vector<TSequence<B>>& sequences() const noexcept { return sequences_; }
  Interp interp() const { return sequences_.front().interp(); }

  friend bool operator==(const TSequenceSet&, const TSequenceSet&) = default;

 private:
  std::vector<TSequence<B>> sequences_;
};

/// Instant, sequence, or sequence set of timestamped values. `srid` applies
/// to point bases only.
template <class B>
class Temporal {
 public:
  using Rep = std::variant<TInstant<B>, TSequence<B>, TSequenceSet<B>>;

  Temporal(TInstant<B> v, Srid srid = std::nullopt) : rep_(std::move(v)), srid_(srid) {}
  Temporal(TSequence<B> v, Srid srid = std::nullopt) : rep_(std::move(v)), srid_(srid) {}
  Temporal(TSequenceSet<B> v, Srid srid = std::nullopt) : rep_(std::move(v)), srid_(srid) {}

  const Rep& rep() const noexcept { return rep_; }
  const Srid& srid() const noexcept { return srid_; }
  Temporal with_srid(Srid srid) const {
    Temporal t = *this;
    t.srid_ = srid;
    return t;
  }

  /// Instants report `discrete`.
  Interp interp() const;

  /// Every instant in temporal order.
  std::vector<TInstant<B>> instants() const;

  friend bool operator==(const Temporal&, const Temporal&) = default;

 private:
  Rep rep_;
  Srid srid_;
};

using TBool = Temporal<bool>;
using TInt = Temporal<std::int32_t>;
using TFloat = Temporal<double>;
using TText = Temporal<std::string>;

/// Span of the whole value (first to last timestamp, with the outer bounds).
template <class B>
Span<Timestamp> to_tstzspan(const Temporal<B>& tv);
template <class B>
Timestamp start_timestamp(const Temporal<B>& tv);
template <class B>
Timestamp end_timestamp(const Temporal<B>& tv);
/// Exact set of times at which the value is defined.
template <class B>
SpanSet<Timestamp> time_domain(const Temporal<B>& tv);

/// `bound_span` true: extent of the bounding span. False: summed extent of
/// the continuous sequences (instants and discrete sequences measure zero).
template <class B>
Interval duration(const Temporal<B>& tv, bool bound_span);

/// Value at `t`, or nullopt outside the time domain.
template <class B>
std::optional<B> value_at_timestamp(const Temporal<B>& tv, Timestamp t);

/// Restriction to a time span; nullopt when nothing remains.
template <class B>
std::optional<Temporal<B>> at_time(const Temporal<B>& tv, const Span<Timestamp>& s);
template <class B>
std::optional<Temporal<B>> at_time(const Temporal<B>& tv, const SpanSet<Timestamp>& ss);

/// Restriction to the times where the value equals `v`. Point values match
/// within kPointTolerance.
template <class B>
std::optional<Temporal<B>> at_values(const Temporal<B>& tv, const B& v);

inline constexpr double kPointTolerance = 1e-9;

/// Times at which a temporal boolean is true; nullopt if never.
std::optional<SpanSet<Timestamp>> when_true(const TBool& tv);

/// Two values resampled onto the union of their instants over the common
/// time domain. Each side keeps its interpolation. nullopt when the domains
/// do not intersect.
template <class B>
std::optional<std::pair<Temporal<B>, Temporal<B>>> synchronize(const Temporal<B>& a,
                                                              const Temporal<B>& b);

namespace detail {

/// One aligned stretch of a synchronization: both sides share `times`.
template <class B>
struct SyncedPiece {
  std::vector<Timestamp> times;
  std::vector<B> a;
  std::vector<B> b;
  Interp interp_a;
  Interp interp_b;
  bool lower_inc;
  bool upper_inc;
};

template <class B>
std::vector<SyncedPiece<B>> synchronize_pieces(const Temporal<B>& a, const Temporal<B>& b);

/// Time at fraction `f` of [t0, t1], rounded to the microsecond.
Timestamp lerp_time(Timestamp t0, Timestamp t1, double f);

}  // namespace detail

}  // namespace mobkit
