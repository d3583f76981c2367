#include "mobkit/temporal.hpp"

#include <algorithm>
#include <cmath>

#include "mobkit/error.hpp"

namespace mobkit {

const char* interp_name(Interp i) {
  switch (i) {
    case Interp::discrete:
      return "Discrete";
    case Interp::step:
      return "Step";
    case Interp::linear:
      return "Linear";
  }
  return "?";
}

namespace detail {

Timestamp lerp_time(Timestamp t0, Timestamp t1, double f) {
  if (f <= 0) return t0;
  if (f >= 1) return t1;
  auto offset = static_cast<std::int64_t>(std::llround(f * static_cast<double>(t1.micros - t0.micros)));
  return Timestamp{std::clamp(t0.micros + offset, t0.micros, t1.micros)};
}

}  // namespace detail

namespace {

template <class B>
B interpolate(const B& a, const B& b, double f) {
  if constexpr (std::is_same_v<B, double>) {
    if (f == 0) return a;
    if (f == 1) return b;
    return a + (b - a) * f;
  } else if constexpr (std::is_same_v<B, Point>) {
    if (f == 0) return a;
    if (f == 1) return b;
    return Point{a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
  } else {
    (void)b;
    (void)f;
    return a;
  }
}

double fraction(Timestamp t0, Timestamp t1, Timestamp t) {
  return static_cast<double>(t.micros - t0.micros) / static_cast<double>(t1.micros - t0.micros);
}

// Index of the last instant at or before t (t >= first).
template <class B>
std::size_t locate(const std::vector<TInstant<B>>& in, Timestamp t) {
  auto it = std::upper_bound(in.begin(), in.end(), t,
                             [](Timestamp x, const TInstant<B>& i) { return x < i.t; });
  return static_cast<std::size_t>(std::distance(in.begin(), it)) - 1;
}

// Value at t within [first, last], ignoring bound inclusivity.
template <class B>
B sample(const TSequence<B>& s, Timestamp t) {
  const auto& in = s.instants();
  std::size_t i = locate(in, t);
  if (in[i].t == t || s.interp() != Interp::linear || i + 1 == in.size()) return in[i].value;
  return interpolate(in[i].value, in[i + 1].value, fraction(in[i].t, in[i + 1].t, t));
}

// Limit of the value approaching t from the left, t in (first, last].
template <class B>
B left_limit(const TSequence<B>& s, Timestamp t) {
  if (s.interp() == Interp::linear) return sample(s, t);
  const auto& in = s.instants();
  auto it = std::lower_bound(in.begin(), in.end(), t,
                             [](const TInstant<B>& i, Timestamp x) { return i.t < x; });
  return std::prev(it)->value;
}

template <class B>
bool matches(const B& a, const B& v) {
  if constexpr (std::is_same_v<B, Point>) {
    return std::abs(a.x - v.x) <= kPointTolerance && std::abs(a.y - v.y) <= kPointTolerance;
  } else {
    return a == v;
  }
}

template <class B>
std::optional<TSequence<B>> clip(const TSequence<B>& seq, const Span<Timestamp>& s) {
  auto inter = intersection(seq.time_span(), s);
  if (!inter) return std::nullopt;
  if (seq.interp() == Interp::discrete) {
    std::vector<TInstant<B>> kept;
    for (const auto& inst : seq.instants())
      if (s.contains(inst.t)) kept.push_back(inst);
    if (kept.empty()) return std::nullopt;
    return TSequence<B>(std::move(kept), Interp::discrete);
  }
  Timestamp lo = inter->lower();
  Timestamp hi = inter->upper();
  if (lo == hi) return TSequence<B>({{sample(seq, lo), lo}}, seq.interp(), true, true);
  std::vector<TInstant<B>> out;
  out.push_back({sample(seq, lo), lo});
  for (const auto& inst : seq.instants())
    if (lo < inst.t && inst.t < hi) out.push_back(inst);
  out.push_back({inter->upper_inc() ? sample(seq, hi) : left_limit(seq, hi), hi});
  return TSequence<B>(std::move(out), seq.interp(), inter->lower_inc(), inter->upper_inc());
}

template <class B>
std::vector<const TSequence<B>*> sequences_of(const Temporal<B>& tv) {
  std::vector<const TSequence<B>*> out;
  if (const auto* seq = std::get_if<TSequence<B>>(&tv.rep())) {
    out.push_back(seq);
  } else if (const auto* ss = std::get_if<TSequenceSet<B>>(&tv.rep())) {
    for (const auto& s : ss->sequences()) out.push_back(&s);
  }
  return out;
}

template <class B>
bool is_discrete(const Temporal<B>& tv) {
  return tv.interp() == Interp::discrete;
}

// Restriction of a continuous sequence to where its value equals v.
template <class B>
void value_pieces(const TSequence<B>& seq, const B& v, std::vector<TSequence<B>>& out) {
  const auto& in = seq.instants();
  const std::size_t n = in.size();
  auto instant_piece = [&](Timestamp t) { out.push_back(TSequence<B>({{v, t}}, seq.interp())); };
  if (n == 1) {
    if (matches(in[0].value, v)) instant_piece(in[0].t);
    return;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& a = in[i];
    const auto& b = in[i + 1];
    bool lower_inc = i == 0 ? seq.lower_inc() : true;
    bool last_segment = i + 2 == n;
    if (seq.interp() == Interp::step) {
      if (matches(a.value, v)) out.push_back(TSequence<B>({{v, a.t}, {v, b.t}}, Interp::step, lower_inc, false));
      if (last_segment && seq.upper_inc() && matches(b.value, v)) instant_piece(b.t);
      continue;
    }
    bool upper_inc = last_segment ? seq.upper_inc() : true;
    bool ma = matches(a.value, v);
    bool mb = matches(b.value, v);
    if (ma && mb) {
      out.push_back(TSequence<B>({{v, a.t}, {v, b.t}}, Interp::linear, lower_inc, upper_inc));
      continue;
    }
    std::optional<double> f;
    if (ma) {
      f = 0.0;
    } else if (mb) {
      f = 1.0;
    } else if constexpr (std::is_same_v<B, double>) {
      if ((a.value - v) * (b.value - v) < 0) f = (v - a.value) / (b.value - a.value);
    } else if constexpr (std::is_same_v<B, Point>) {
      double dx = b.value.x - a.value.x;
      double dy = b.value.y - a.value.y;
      double len2 = dx * dx + dy * dy;
      if (len2 > 0) {
        double g = ((v.x - a.value.x) * dx + (v.y - a.value.y) * dy) / len2;
        if (g >= 0 && g <= 1 && matches(interpolate(a.value, b.value, g), v)) f = g;
      }
    }
    if (!f) continue;
    Timestamp tc = detail::lerp_time(a.t, b.t, *f);
    if ((tc > a.t || lower_inc) && (tc < b.t || upper_inc)) instant_piece(tc);
  }
}

}  // namespace

// TSequence

template <class B>
TSequence<B>::TSequence(std::vector<TInstant<B>> instants, Interp interp, bool lower_inc,
                        bool upper_inc)
    : instants_(std::move(instants)), interp_(interp), lower_inc_(lower_inc), upper_inc_(upper_inc) {
  if (instants_.empty()) throw InvalidValue("sequence needs at least one instant");
  for (std::size_t i = 0; i + 1 < instants_.size(); ++i) {
    if (!(instants_[i].t < instants_[i + 1].t))
      throw InvalidValue("sequence timestamps must be strictly increasing");
  }
  if (interp_ == Interp::linear && !is_continuous_base<B>)
    throw InvalidValue("linear interpolation requires a continuous base type");
  if (interp_ == Interp::discrete && !(lower_inc_ && upper_inc_))
    throw InvalidValue("discrete sequences have inclusive bounds");
  if (instants_.size() == 1 && !(lower_inc_ && upper_inc_))
    throw InvalidValue("single-instant sequence must have inclusive bounds");
  // A step sequence never reaches an excluded last instant; keep its value
  // equal to the held one so equal functions compare equal.
  if (interp_ == Interp::step && !upper_inc_)
    instants_.back().value = instants_[instants_.size() - 2].value;
}

// TSequenceSet

template <class B>
TSequenceSet<B>::TSequenceSet(std::vector<TSequence<B>> sequences) {
  if (sequences.empty()) throw InvalidValue("sequence set needs at least one sequence");
  Interp interp = sequences.front().interp();
  if (interp == Interp::discrete) throw InvalidValue("sequence sets hold continuous sequences");
  for (auto& s : sequences) {
    if (s.interp() != interp) throw InvalidValue("sequences in a set must share interpolation");
    if (sequences_.empty()) {
      sequences_.push_back(std::move(s));
      continue;
    }
    TSequence<B>& a = sequences_.back();
    if (a.end_time() < s.start_time()) {
      sequences_.push_back(std::move(s));
      continue;
    }
    if (a.end_time() > s.start_time())
      throw InvalidValue("sequences in a set must be ordered and disjoint");
    bool equal_join = a.instants().back().value == s.instants().front().value;
    if (a.upper_inc() && s.lower_inc() && !equal_join)
      throw InvalidValue("sequences in a set overlap at " + format_timestamp(s.start_time()));
    if ((a.upper_inc() || s.lower_inc()) && equal_join) {
      std::vector<TInstant<B>> merged = a.instants();
      merged.insert(merged.end(), s.instants().begin() + 1, s.instants().end());
      a = TSequence<B>(std::move(merged), interp, a.lower_inc(), s.upper_inc());
      continue;
    }
    sequences_.push_back(std::move(s));
  }
}

// Temporal

template <class B>
Interp Temporal<B>::interp() const {
  if (const auto* seq = std::get_if<TSequence<B>>(&rep_)) return seq->interp();
  if (const auto* ss = std::get_if<TSequenceSet<B>>(&rep_)) return ss->interp();
  return Interp::discrete;
}

template <class B>
std::vector<TInstant<B>> Temporal<B>::instants() const {
  if (const auto* inst = std::get_if<TInstant<B>>(&rep_)) return {*inst};
  std::vector<TInstant<B>> out;
  for (const auto* seq : sequences_of(*this))
    out.insert(out.end(), seq->instants().begin(), seq->instants().end());
  return out;
}

// Accessors

template <class B>
Span<Timestamp> to_tstzspan(const Temporal<B>& tv) {
  if (const auto* inst = std::get_if<TInstant<B>>(&tv.rep())) return Span<Timestamp>::singleton(inst->t);
  auto seqs = sequences_of(tv);
  return Span<Timestamp>(seqs.front()->start_time(), seqs.back()->end_time(),
                         seqs.front()->lower_inc(), seqs.back()->upper_inc());
}

template <class B>
Timestamp start_timestamp(const Temporal<B>& tv) {
  return to_tstzspan(tv).lower();
}

template <class B>
Timestamp end_timestamp(const Temporal<B>& tv) {
  return to_tstzspan(tv).upper();
}

template <class B>
SpanSet<Timestamp> time_domain(const Temporal<B>& tv) {
  std::vector<Span<Timestamp>> spans;
  if (is_discrete(tv)) {
    for (const auto& inst : tv.instants()) spans.push_back(Span<Timestamp>::singleton(inst.t));
  } else {
    for (const auto* seq : sequences_of(tv)) spans.push_back(seq->time_span());
  }
  return SpanSet<Timestamp>(std::move(spans));
}

template <class B>
Interval duration(const Temporal<B>& tv, bool bound_span) {
  if (bound_span) {
    auto s = to_tstzspan(tv);
    return s.upper() - s.lower();
  }
  if (is_discrete(tv)) return Interval{};
  Interval total{};
  for (const auto* seq : sequences_of(tv)) total = total + (seq->end_time() - seq->start_time());
  return total;
}

template <class B>
std::optional<B> value_at_timestamp(const Temporal<B>& tv, Timestamp t) {
  if (const auto* inst = std::get_if<TInstant<B>>(&tv.rep())) {
    if (inst->t == t) return inst->value;
    return std::nullopt;
  }
  for (const auto* seq : sequences_of(tv)) {
    if (seq->interp() == Interp::discrete) {
      const auto& in = seq->instants();
      auto it = std::lower_bound(in.begin(), in.end(), t,
                                 [](const TInstant<B>& i, Timestamp x) { return i.t < x; });
      if (it != in.end() && it->t == t) return it->value;
      return std::nullopt;
    }
    if (seq->time_span().contains(t)) return sample(*seq, t);
    if (t < seq->start_time()) break;
  }
  return std::nullopt;
}

// Restrictions

template <class B>
std::optional<Temporal<B>> at_time(const Temporal<B>& tv, const Span<Timestamp>& s) {
  if (const auto* inst = std::get_if<TInstant<B>>(&tv.rep())) {
    if (s.contains(inst->t)) return tv;
    return std::nullopt;
  }
  if (const auto* seq = std::get_if<TSequence<B>>(&tv.rep())) {
    if (auto c = clip(*seq, s)) return Temporal<B>(std::move(*c), tv.srid());
    return std::nullopt;
  }
  std::vector<TSequence<B>> pieces;
  for (const auto* seq : sequences_of(tv))
    if (auto c = clip(*seq, s)) pieces.push_back(std::move(*c));
  if (pieces.empty()) return std::nullopt;
  return Temporal<B>(TSequenceSet<B>(std::move(pieces)), tv.srid());
}

template <class B>
std::optional<Temporal<B>> at_time(const Temporal<B>& tv, const SpanSet<Timestamp>& ss) {
  if (const auto* inst = std::get_if<TInstant<B>>(&tv.rep())) {
    if (ss.contains(inst->t)) return tv;
    return std::nullopt;
  }
  if (is_discrete(tv)) {
    std::vector<TInstant<B>> kept;
    for (const auto& inst : tv.instants())
      if (ss.contains(inst.t)) kept.push_back(inst);
    if (kept.empty()) return std::nullopt;
    return Temporal<B>(TSequence<B>(std::move(kept), Interp::discrete), tv.srid());
  }
  std::vector<TSequence<B>> pieces;
  for (const auto* seq : sequences_of(tv)) {
    for (const auto& s : ss.spans())
      if (auto c = clip(*seq, s)) pieces.push_back(std::move(*c));
  }
  if (pieces.empty()) return std::nullopt;
  return Temporal<B>(TSequenceSet<B>(std::move(pieces)), tv.srid());
}

template <class B>
std::optional<Temporal<B>> at_values(const Temporal<B>& tv, const B& v) {
  if (const auto* inst = std::get_if<TInstant<B>>(&tv.rep())) {
    if (matches(inst->value, v)) return Temporal<B>(TInstant<B>{v, inst->t}, tv.srid());
    return std::nullopt;
  }
  if (is_discrete(tv)) {
    std::vector<TInstant<B>> kept;
    for (const auto& inst : tv.instants())
      if (matches(inst.value, v)) kept.push_back({v, inst.t});
    if (kept.empty()) return std::nullopt;
    return Temporal<B>(TSequence<B>(std::move(kept), Interp::discrete), tv.srid());
  }
  std::vector<TSequence<B>> pieces;
  for (const auto* seq : sequences_of(tv)) value_pieces(*seq, v, pieces);
  if (pieces.empty()) return std::nullopt;
  return Temporal<B>(TSequenceSet<B>(std::move(pieces)), tv.srid());
}

std::optional<SpanSet<Timestamp>> when_true(const TBool& tv) {
  std::vector<Span<Timestamp>> spans;
  if (is_discrete(tv)) {
    for (const auto& inst : tv.instants())
      if (inst.value) spans.push_back(Span<Timestamp>::singleton(inst.t));
  } else {
    for (const auto* seq : sequences_of(tv)) {
      const auto& in = seq->instants();
      if (in.size() == 1) {
        if (in[0].value) spans.push_back(Span<Timestamp>::singleton(in[0].t));
        continue;
      }
      for (std::size_t i = 0; i + 1 < in.size(); ++i) {
        if (in[i].value)
          spans.emplace_back(in[i].t, in[i + 1].t, i == 0 ? seq->lower_inc() : true, false);
      }
      if (seq->upper_inc() && in.back().value) spans.push_back(Span<Timestamp>::singleton(in.back().t));
    }
  }
  if (spans.empty()) return std::nullopt;
  return SpanSet<Timestamp>(std::move(spans));
}

// Synchronization

namespace detail {

template <class B>
std::vector<SyncedPiece<B>> synchronize_pieces(const Temporal<B>& a, const Temporal<B>& b) {
  std::vector<SyncedPiece<B>> out;
  if (is_discrete(a) || is_discrete(b)) {
    std::vector<Timestamp> times;
    for (const auto& i : a.instants()) times.push_back(i.t);
    for (const auto& i : b.instants()) times.push_back(i.t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    SyncedPiece<B> piece{{}, {}, {}, Interp::discrete, Interp::discrete, true, true};
    for (Timestamp t : times) {
      auto va = value_at_timestamp(a, t);
      auto vb = value_at_timestamp(b, t);
      if (!va || !vb) continue;
      piece.times.push_back(t);
      piece.a.push_back(*va);
      piece.b.push_back(*vb);
    }
    if (!piece.times.empty()) out.push_back(std::move(piece));
    return out;
  }

  auto common = intersection(time_domain(a), time_domain(b));
  if (!common) return out;
  auto covering = [](const Temporal<B>& tv, const Span<Timestamp>& s) -> std::optional<TSequence<B>> {
    for (const auto* seq : sequences_of(tv)) {
      auto c = clip(*seq, s);
      if (c && c->time_span() == s) return c;
    }
    return std::nullopt;
  };
  for (const auto& s : common->spans()) {
    auto pa = covering(a, s);
    auto pb = covering(b, s);
    if (!pa || !pb) throw Error("internal: common time span not covered by a single sequence");
    std::vector<Timestamp> times;
    for (const auto& i : pa->instants()) times.push_back(i.t);
    for (const auto& i : pb->instants()) times.push_back(i.t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    SyncedPiece<B> piece{times, {}, {}, pa->interp(), pb->interp(), s.lower_inc(), s.upper_inc()};
    piece.a.reserve(times.size());
    piece.b.reserve(times.size());
    for (Timestamp t : times) {
      piece.a.push_back(sample(*pa, t));
      piece.b.push_back(sample(*pb, t));
    }
    out.push_back(std::move(piece));
  }
  return out;
}

}  // namespace detail

template <class B>
std::optional<std::pair<Temporal<B>, Temporal<B>>> synchronize(const Temporal<B>& a,
                                                              const Temporal<B>& b) {
  auto pieces = detail::synchronize_pieces(a, b);
  if (pieces.empty()) return std::nullopt;
  auto build = [&](bool left) {
    std::vector<TSequence<B>> seqs;
    for (const auto& p : pieces) {
      std::vector<TInstant<B>> inst;
      for (std::size_t i = 0; i < p.times.size(); ++i)
        inst.push_back({left ? p.a[i] : p.b[i], p.times[i]});
      seqs.emplace_back(std::move(inst), left ? p.interp_a : p.interp_b, p.lower_inc, p.upper_inc);
    }
    const Srid& srid = left ? a.srid() : b.srid();
    if (seqs.size() == 1) return Temporal<B>(std::move(seqs.front()), srid);
    return Temporal<B>(TSequenceSet<B>(std::move(seqs)), srid);
  };
  return std::make_pair(build(true), build(false));
}

#define MOBKIT_INSTANTIATE_TEMPORAL(B)                                                            \
  template class TSequence<B>;                                                                    \
  template class TSequenceSet<B>;                                                                 \
  template class Temporal<B>;                                                                     \
  template Span<Timestamp> to_tstzspan<B>(const Temporal<B>&);                                    \
  template Timestamp start_timestamp<B>(const Temporal<B>&);                                      \
  template Timestamp end_timestamp<B>(const Temporal<B>&);                                        \
  template SpanSet<Timestamp> time_domain<B>(const Temporal<B>&);                                 \
  template Interval duration<B>(const Temporal<B>&, bool);                                        \
  template std::optional<B> value_at_timestamp<B>(const Temporal<B>&, Timestamp);                 \
  template std::optional<Temporal<B>> at_time<B>(const Temporal<B>&, const Span<Timestamp>&);     \
  template std::optional<Temporal<B>> at_time<B>(const Temporal<B>&, const SpanSet<Timestamp>&);  \
  template std::optional<Temporal<B>> at_values<B>(const Temporal<B>&, const B&);                 \
  template std::optional<std::pair<Temporal<B>, Temporal<B>>> synchronize<B>(const Temporal<B>&,  \
                                                                            const Temporal<B>&); \
  template std::vector<detail::SyncedPiece<B>> detail::synchronize_pieces<B>(const Temporal<B>&, \
                                                                            const Temporal<B>&);

MOBKIT_INSTANTIATE_TEMPORAL(bool)
MOBKIT_INSTANTIATE_TEMPORAL(std::int32_t)
MOBKIT_INSTANTIATE_TEMPORAL(double)
MOBKIT_INSTANTIATE_TEMPORAL(std::string)
MOBKIT_INSTANTIATE_TEMPORAL(Point)

#undef MOBKIT_INSTANTIATE_TEMPORAL

}  // namespace mobkit
