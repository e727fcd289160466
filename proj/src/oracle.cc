#include "flashtb/oracle.h"

#include <algorithm>
#include <set>

namespace flashtb {

struct oracle::target_table {
  // exit_[n][e]: earliest arrival at the target after riding to event e and
  // leaving the vehicle there, using at most n trips in total counting the
  // current one. board_[n][e]: same, when boarding at e.
  std::vector<std::vector<stime>> exit_;
  std::vector<std::vector<stime>> board_;
  // Suffix minima of board_[n] over by_dep_[q].
  std::vector<vector_map<stop_idx, std::vector<stime>>> suffix_;
  vector_map<stop_idx, stime> walk_;
};

oracle::oracle(timetable const& tt, std::uint32_t const max_trips,
               std::size_t const budget)
    : tt_{tt}, max_trips_{max_trips}, budget_{budget} {
  tables_.resize(tt.n_stops());
  by_dep_.resize(tt.n_stops());
  for (auto e = event_idx{0U}; e != tt.events_.size_key(); ++e) {
    auto const& ev = tt.events_[e];
    if (ev.pos_ + 1U < tt.size(ev.trip_)) {
      by_dep_[ev.stop_].push_back(e);
    }
  }
  for (auto& v : by_dep_) {
    std::sort(begin(v), end(v), [&](auto const a, auto const b) {
      return std::make_pair(tt.events_[a].dep_, a) <
             std::make_pair(tt.events_[b].dep_, b);
    });
  }
}

oracle::~oracle() = default;
oracle::oracle(oracle&&) noexcept = default;

oracle::target_table const& oracle::table(stop_idx const t) {
  auto& slot = tables_[to_idx(t)];
  if (slot) {
    return *slot;
  }
  slot = std::make_unique<target_table>();
  auto& tab = *slot;
  auto const n_events = tt_.n_events();

  tab.walk_.assign(tt_.n_stops(), kInfinity);
  for (auto const& e : tt_.footpaths_.in(t)) {
    tab.walk_[e.to_] = e.duration_;
  }

  auto const first_at_or_after = [&](stop_idx const q, stime const time) {
    auto const& v = by_dep_[q];
    return static_cast<std::size_t>(
        std::lower_bound(begin(v), end(v), time,
                         [&](event_idx const e, stime const x) {
                           return tt_.events_[e].dep_ < x;
                         }) -
        begin(v));
  };

  tab.exit_.assign(max_trips_ + 1U, std::vector<stime>(n_events, kInfinity));
  tab.board_.assign(max_trips_ + 1U, std::vector<stime>(n_events, kInfinity));
  tab.suffix_.resize(max_trips_ + 1U);
  for (auto& s : tab.suffix_) {
    s.resize(tt_.n_stops());
    for (auto q = stop_idx{0U}; q != tt_.stop_ids_.size_key(); ++q) {
      s[q].assign(by_dep_[q].size() + 1U, kInfinity);
    }
  }

  for (auto n = 1U; n <= max_trips_; ++n) {
    auto& ex = tab.exit_[n];
    for (auto e = event_idx{0U}; e != tt_.events_.size_key(); ++e) {
      auto const& ev = tt_.events_[e];
      if (ev.pos_ == 0U) {
        continue;
      }
      auto best = tab.walk_[ev.stop_] == kInfinity
                      ? kInfinity
                      : ev.arr_ + tab.walk_[ev.stop_];
      if (n > 1U) {
        for (auto const& f : tt_.footpaths_.out(ev.stop_)) {
          auto const k = first_at_or_after(f.to_, ev.arr_ + f.duration_);
          best = std::min(best, tab.suffix_[n - 1U][f.to_][k]);
        }
      }
      ex[to_idx(e)] = best;
    }

    auto& bd = tab.board_[n];
    for (auto const& tr : tt_.trips_) {
      auto best = kInfinity;
      for (auto i = tr.size_; i-- > 0U;) {
        auto const e = to_idx(tr.first_) + i;
        bd[e] = best;
        best = std::min(best, ex[e]);
      }
    }

    for (auto q = stop_idx{0U}; q != tt_.stop_ids_.size_key(); ++q) {
      auto const& v = by_dep_[q];
      auto& s = tab.suffix_[n][q];
      for (auto k = v.size(); k-- > 0U;) {
        s[k] = std::min(s[k + 1U], bd[to_idx(v[k])]);
      }
    }
  }
  return tab;
}

std::vector<stime> oracle::arrival_by_round(stop_idx const s,
                                            stop_idx const t,
                                            stime const dep) {
  auto const& tab = table(t);
  std::vector<stime> r(max_trips_ + 1U, kInfinity);
  auto const walk = tt_.transfer_time(s, t);
  r[0] = walk == kInfinity ? kInfinity : dep + walk;
  for (auto n = 1U; n <= max_trips_; ++n) {
    r[n] = r[n - 1U];
    for (auto const& f : tt_.footpaths_.out(s)) {
      auto const& v = by_dep_[f.to_];
      auto const k = static_cast<std::size_t>(
          std::lower_bound(begin(v), end(v), dep + f.duration_,
                           [&](event_idx const e, stime const x) {
                             return tt_.events_[e].dep_ < x;
                           }) -
          begin(v));
      r[n] = std::min(r[n], tab.suffix_[n][f.to_][k]);
    }
  }
  return r;
}

pareto_front oracle::pareto(stop_idx const s, stop_idx const t,
                            stime const dep) {
  return front_from_rounds(arrival_by_round(s, t, dep));
}

std::vector<journey> oracle::enumerate(stop_idx const s, stop_idx const t,
                                       stime const dep, cost const& c) {
  std::vector<journey> out;
  if (c.trips_ == 0U) {
    out.push_back(make_journey(tt_, s, t, {}, dep));
    return out;
  }
  auto const& tab = table(t);
  auto const n = c.trips_;
  auto const a = c.arrival_;
  std::vector<bool> visited(tt_.n_stops(), false);
  std::vector<leg> legs;
  std::size_t steps = 0U;

  auto const board = [&](auto&& self, stop_idx const x, stime const time,
                         std::uint32_t const used) -> void {
    auto const m = n - used;
    for (auto const& f : tt_.footpaths_.out(x)) {
      auto const q = f.to_;
      if (q != x && visited[to_idx(q)]) {
        continue;
      }
      auto const& v = by_dep_[q];
      auto it = std::lower_bound(begin(v), end(v), time + f.duration_,
                                 [&](event_idx const e, stime const y) {
                                   return tt_.events_[e].dep_ < y;
                                 });
      auto const mark = q != x;
      visited[to_idx(q)] = true;
      for (; it != end(v); ++it) {
        if (++steps > budget_) {
          throw oracle_budget_exceeded{"oracle enumeration budget exceeded"};
        }
        if (tab.board_[m][to_idx(*it)] > a) {
          continue;
        }
        auto const& ev = tt_.events_[*it];
        for (auto j = ev.pos_ + 1U; j < tt_.size(ev.trip_); ++j) {
          auto const e = tt_.event(ev.trip_, j);
          if (tab.exit_[m][to_idx(e)] > a) {
            continue;
          }
          auto const y = tt_.events_[e].stop_;
          if (visited[to_idx(y)]) {
            continue;
          }
          visited[to_idx(y)] = true;
          legs.push_back({ev.trip_, ev.pos_, static_cast<std::uint16_t>(j)});
          if (m == 1U) {
            auto const w = tab.walk_[y];
            if (w != kInfinity && tt_.events_[e].arr_ + w == a &&
                (y == t || !visited[to_idx(t)])) {
              out.push_back(make_journey(tt_, s, t, legs));
            }
          } else {
            self(self, y, tt_.events_[e].arr_, used + 1U);
          }
          legs.pop_back();
          visited[to_idx(y)] = false;
        }
      }
      if (mark) {
        visited[to_idx(q)] = false;
      }
    }
  };
  visited[to_idx(s)] = true;
  board(board, s, dep, 0U);
  return out;
}

std::vector<journey> oracle::representatives(stop_idx const s,
                                             stop_idx const t,
                                             stime const dep) {
  std::vector<journey> out;
  for (auto const& c : pareto(s, t, dep)) {
    auto js = enumerate(s, t, dep, c);
    out.insert(end(out), begin(js), end(js));
  }
  return out;
}

std::vector<journey> oracle::canonical(stop_idx const s, stop_idx const t,
                                       stime const dep) {
  std::vector<journey> out;
  for (auto const& c : pareto(s, t, dep)) {
    auto js = enumerate(s, t, dep, c);
    if (js.empty()) {
      continue;
    }
    auto best = 0U;
    auto best_x = tiebreak_global(tt_, js[0]);
    for (auto i = 1U; i < js.size(); ++i) {
      auto x = tiebreak_global(tt_, js[i]);
      if (compare_tiebreak(x, best_x) < 0) {
        best = i;
        best_x = std::move(x);
      }
    }
    out.push_back(std::move(js[best]));
  }
  return out;
}

profile oracle::profile_query(stop_idx const s, stop_idx const t,
                              stime const from, stime const to) {
  profile p;
  for (auto const dep : possible_departures(tt_, s, from, to)) {
    for (auto const& c : pareto(s, t, dep)) {
      p.push_back({dep, c.arrival_, c.trips_});
    }
  }
  return p;
}

std::vector<journey> oracle::canonical_from(stop_idx const s) {
  std::set<journey> out;
  for (auto const dep : possible_departures(tt_, s)) {
    for (auto t = stop_idx{0U}; t != tt_.stop_ids_.size_key(); ++t) {
      if (t == s) {
        continue;
      }
      for (auto& j : canonical(s, t, dep)) {
        if (!j.legs_.empty()) {
          out.insert(std::move(j));
        }
      }
    }
  }
  return {begin(out), end(out)};
}

std::vector<std::vector<std::pair<event_idx, event_idx>>> oracle_flags(
    timetable const& tt, std::vector<std::uint32_t> const& cell_of_stop,
    std::uint32_t const n_cells, std::uint32_t const max_trips) {
  std::vector<std::set<std::pair<event_idx, event_idx>>> flags(n_cells);
  oracle o{tt, max_trips};
  for (auto s = stop_idx{0U}; s != tt.stop_ids_.size_key(); ++s) {
    for (auto const& j : o.canonical_from(s)) {
      auto& cell = flags[cell_of_stop[to_idx(j.to_)]];
      for (auto k = 1U; k < j.legs_.size(); ++k) {
        auto const& a = j.legs_[k - 1U];
        auto const& b = j.legs_[k];
        cell.emplace(tt.event(a.trip_, a.exit_), tt.event(b.trip_, b.enter_));
      }
    }
  }
  std::vector<std::vector<std::pair<event_idx, event_idx>>> out;
  for (auto const& f : flags) {
    out.emplace_back(begin(f), end(f));
  }
  return out;
}

}  // namespace flashtb
