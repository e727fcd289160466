#include "flashtb/journey.h"

#include <algorithm>
#include <sstream>

namespace flashtb {

journey make_journey(timetable const& tt, stop_idx const from,
                     stop_idx const to, std::vector<leg> legs,
                     stime const walk_departure) {
  journey j;
  j.from_ = from;
  j.to_ = to;
  if (legs.empty()) {
    j.departure_ = walk_departure;
    j.arrival_ = walk_departure + tt.transfer_time(from, to);
  } else {
    auto const& first = legs.front();
    auto const& last = legs.back();
    j.departure_ = tt.dep(first.trip_, first.enter_) -
                   tt.transfer_time(from, tt.stop(first.trip_, first.enter_));
    j.arrival_ = tt.arr(last.trip_, last.exit_) +
                 tt.transfer_time(tt.stop(last.trip_, last.exit_), to);
  }
  j.legs_ = std::move(legs);
  return j;
}

std::vector<stop_idx> stop_sequence(timetable const& tt, journey const& j) {
  std::vector<stop_idx> seq{j.from_};
  auto const add = [&](stop_idx const s) {
    if (seq.back() != s) {
      seq.push_back(s);
    }
  };
  for (auto const& l : j.legs_) {
    add(tt.stop(l.trip_, l.enter_));
    add(tt.stop(l.trip_, l.exit_));
  }
  add(j.to_);
  return seq;
}

std::optional<std::string> check_journey(timetable const& tt,
                                         journey const& j) {
  if (j.from_ >= tt.stop_ids_.size_key() || j.to_ >= tt.stop_ids_.size_key()) {
    return "unknown stop";
  }
  for (auto k = 0U; k != j.legs_.size(); ++k) {
    auto const& l = j.legs_[k];
    if (l.trip_ >= tt.trips_.size_key()) {
      return "unknown trip";
    }
    if (!(l.enter_ < l.exit_) || l.exit_ >= tt.size(l.trip_)) {
      return "invalid segment indices in leg " + std::to_string(k);
    }
    if (k != 0U) {
      auto const& prev = j.legs_[k - 1U];
      auto const fp = tt.transfer_time(tt.stop(prev.trip_, prev.exit_),
                                       tt.stop(l.trip_, l.enter_));
      if (fp == kInfinity) {
        return "missing footpath before leg " + std::to_string(k);
      }
      if (tt.arr(prev.trip_, prev.exit_) + fp > tt.dep(l.trip_, l.enter_)) {
        return "infeasible transfer before leg " + std::to_string(k);
      }
    }
  }
  if (j.legs_.empty()) {
    if (tt.transfer_time(j.from_, j.to_) == kInfinity) {
      return "no walking connection";
    }
  } else {
    auto const& first = j.legs_.front();
    auto const& last = j.legs_.back();
    if (tt.transfer_time(j.from_, tt.stop(first.trip_, first.enter_)) ==
            kInfinity ||
        tt.transfer_time(tt.stop(last.trip_, last.exit_), j.to_) ==
            kInfinity) {
      return "missing initial or final footpath";
    }
  }
  auto const expected =
      make_journey(tt, j.from_, j.to_, j.legs_, j.departure_);
  if (expected.departure_ != j.departure_ || expected.arrival_ != j.arrival_) {
    return "times inconsistent with legs";
  }
  auto seq = stop_sequence(tt, j);
  std::sort(begin(seq), end(seq));
  if (std::adjacent_find(begin(seq), end(seq)) != end(seq)) {
    return "stop visited twice";
  }
  return std::nullopt;
}

std::string to_string(timetable const& tt, journey const& j) {
  std::stringstream ss;
  ss << tt.stop_ids_[j.from_] << "@" << j.departure_;
  for (auto const& l : j.legs_) {
    ss << " " << tt.trips_[l.trip_].id_ << "[" << l.enter_ << "," << l.exit_
       << "]";
  }
  ss << " " << tt.stop_ids_[j.to_] << "@" << j.arrival_;
  return ss.str();
}

pareto_front make_front(std::vector<cost> costs) {
  std::sort(begin(costs), end(costs), [](auto const& a, auto const& b) {
    return std::tie(a.trips_, a.arrival_) < std::tie(b.trips_, b.arrival_);
  });
  pareto_front f;
  for (auto const& c : costs) {
    if (f.empty() || c.arrival_ < f.back().arrival_) {
      f.push_back(c);
    }
  }
  return f;
}

pareto_front front_from_rounds(std::vector<stime> const& arrival_by_round) {
  pareto_front f;
  auto best = kInfinity;
  for (auto n = 0U; n != arrival_by_round.size(); ++n) {
    if (arrival_by_round[n] < best) {
      best = arrival_by_round[n];
      f.push_back({best, n});
    }
  }
  return f;
}

profile reduce_profile(profile p) {
  std::sort(begin(p), end(p));
  p.erase(std::unique(begin(p), end(p)), end(p));
  profile out;
  for (auto const& e : p) {
    auto const dominated = std::any_of(begin(p), end(p), [&](auto const& o) {
      return o != e && o.departure_ >= e.departure_ &&
             o.arrival_ <= e.arrival_ && o.trips_ <= e.trips_;
    });
    if (!dominated) {
      out.push_back(e);
    }
  }
  return out;
}

tiebreak_seq tiebreak_global(timetable const& tt, journey const& j) {
  // Local sequences of the prefixes ending at each stop of S(J) after the
  // first, in journey order.
  std::vector<tiebreak_seq> locals;
  auto last = j.from_;
  auto const id_e = [&](trip_idx const t, std::uint32_t const i) {
    return static_cast<std::int64_t>(tt.order_.event_rank_[tt.event(t, i)]);
  };
  for (auto k = 0U; k != j.legs_.size(); ++k) {
    auto const& l = j.legs_[k];
    auto const in = tt.stop(l.trip_, l.enter_);
    if (in != last) {
      if (k == 0U) {
        locals.push_back({tt.dep(l.trip_, l.enter_)});
      } else {
        auto const& prev = j.legs_[k - 1U];
        locals.push_back(
            {tt.arr(prev.trip_, prev.exit_) + tt.transfer_time(last, in),
             kPlusInf, id_e(prev.trip_, prev.exit_)});
      }
    }
    auto const out = tt.stop(l.trip_, l.exit_);
    locals.push_back(
        {tt.arr(l.trip_, l.exit_), id_e(l.trip_, l.enter_), kPlusInf});
    last = out;
  }
  if (j.to_ != last) {
    if (j.legs_.empty()) {
      locals.push_back({j.arrival_});
    } else {
      auto const& prev = j.legs_.back();
      locals.push_back({j.arrival_, kPlusInf, id_e(prev.trip_, prev.exit_)});
    }
  }
  tiebreak_seq x;
  for (auto it = locals.rbegin(); it != locals.rend(); ++it) {
    x.insert(end(x), begin(*it), end(*it));
  }
  return x;
}

std::strong_ordering compare_tiebreak(tiebreak_seq const& a,
                                      tiebreak_seq const& b) {
  auto const n = std::max(a.size(), b.size());
  for (auto i = 0U; i != n; ++i) {
    auto const x = i < a.size() ? a[i] : kMinusInf;
    auto const y = i < b.size() ? b[i] : kMinusInf;
    if (x != y) {
      return x <=> y;
    }
  }
  return std::strong_ordering::equal;
}

}  // namespace flashtb
