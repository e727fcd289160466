#include "flashtb/timetable.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>

namespace flashtb {

stime footpath_set::duration(stop_idx from, stop_idx to) const {
  auto const row = out(from);
  auto const it = std::lower_bound(
      row.begin(), row.end(), to,
      [](edge const& e, stop_idx const s) { return e.to_ < s; });
  return (it != row.end() && it->to_ == to) ? it->duration_ : kInfinity;
}

std::size_t footpath_set::n_non_empty() const {
  return out_.size() - n_stops();
}

footpath_set footpath_set::from_edges(std::size_t const n_stops,
                                      std::vector<raw_footpath> edges) {
  for (auto i = 0U; i != n_stops; ++i) {
    edges.push_back({i, i, 0});
  }
  std::sort(begin(edges), end(edges), [](auto const& a, auto const& b) {
    return std::tie(a.from_, a.to_, a.duration_) <
           std::tie(b.from_, b.to_, b.duration_);
  });
  // keep the minimum duration per pair
  edges.erase(std::unique(begin(edges), end(edges),
                          [](auto const& a, auto const& b) {
                            return a.from_ == b.from_ && a.to_ == b.to_;
                          }),
              end(edges));
  for (auto& e : edges) {
    if (e.from_ == e.to_) {
      e.duration_ = 0;
    }
  }

  footpath_set fp;
  auto const build = [&](auto const key, auto const other,
                         std::vector<std::uint32_t>& offsets,
                         std::vector<edge>& out) {
    offsets.assign(n_stops + 1U, 0U);
    for (auto const& e : edges) {
      ++offsets[key(e) + 1U];
    }
    std::partial_sum(begin(offsets), end(offsets), begin(offsets));
    out.resize(edges.size());
    auto pos = offsets;
    auto sorted = edges;
    std::stable_sort(begin(sorted), end(sorted),
                     [&](auto const& a, auto const& b) {
                       return std::make_pair(key(a), other(a)) <
                              std::make_pair(key(b), other(b));
                     });
    for (auto const& e : sorted) {
      out[pos[key(e)]++] = edge{stop_idx{other(e)}, e.duration_};
    }
  };
  build([](raw_footpath const& e) { return e.from_; },
        [](raw_footpath const& e) { return e.to_; }, fp.out_offsets_, fp.out_);
  build([](raw_footpath const& e) { return e.to_; },
        [](raw_footpath const& e) { return e.from_; }, fp.in_offsets_, fp.in_);
  return fp;
}

trip_idx timetable::earliest_trip(line_idx const l, std::uint32_t const pos,
                                  stime const earliest) const {
  auto const& ln = lines_[l];
  auto lo = to_idx(ln.first_trip_);
  auto hi = lo + ln.n_trips_;
  while (lo < hi) {
    auto const mid = lo + (hi - lo) / 2U;
    if (dep(trip_idx{mid}, pos) < earliest) {
      lo = mid + 1U;
    } else {
      hi = mid;
    }
  }
  return lo == to_idx(ln.first_trip_) + ln.n_trips_ ? trip_idx::invalid()
                                                    : trip_idx{lo};
}

stop_idx timetable::find_stop(std::string_view const external_id) const {
  auto const it = std::lower_bound(begin(stop_ids_), end(stop_ids_),
                                   external_id, [](auto const& a, auto const& b) {
                                     return std::string_view{a} < b;
                                   });
  if (it == end(stop_ids_) || *it != external_id) {
    return stop_idx::invalid();
  }
  return stop_idx{static_cast<std::uint32_t>(it - begin(stop_ids_))};
}

bool precedes_strictly(raw_trip const& a, raw_trip const& b) {
  if (a.events_.size() != b.events_.size()) {
    return false;
  }
  for (auto i = 0U; i != a.events_.size(); ++i) {
    if (a.events_[i].stop_ != b.events_[i].stop_ ||
        !(a.events_[i].arr_ < b.events_[i].arr_) ||
        !(a.events_[i].dep_ < b.events_[i].dep_)) {
      return false;
    }
  }
  return true;
}

std::vector<std::vector<std::uint32_t>> build_lines(
    std::vector<raw_trip> const& trips) {
  std::map<std::vector<std::uint32_t>, std::vector<std::uint32_t>> buckets;
  for (auto i = 0U; i != trips.size(); ++i) {
    std::vector<std::uint32_t> seq;
    for (auto const& e : trips[i].events_) {
      seq.push_back(e.stop_);
    }
    buckets[seq].push_back(i);
  }

  std::vector<std::vector<std::uint32_t>> lines;
  for (auto& [seq, bucket] : buckets) {
    std::sort(begin(bucket), end(bucket), [&](auto const a, auto const b) {
      auto const& x = trips[a].events_.front();
      auto const& y = trips[b].events_.front();
      return std::tie(x.arr_, x.dep_, trips[a].id_) <
             std::tie(y.arr_, y.dep_, trips[b].id_);
    });
    auto const first_line = lines.size();
    for (auto const t : bucket) {
      auto placed = false;
      for (auto l = first_line; l != lines.size(); ++l) {
        if (precedes_strictly(trips[lines[l].back()], trips[t])) {
          lines[l].push_back(t);
          placed = true;
          break;
        }
      }
      if (!placed) {
        lines.push_back({t});
      }
    }
  }
  return lines;
}

footpath_set close_footpaths(std::size_t const n_stops,
                             std::vector<raw_footpath> const& footpaths,
                             closure_options const& opt) {
  std::vector<std::uint32_t> parent(n_stops);
  std::iota(begin(parent), end(parent), 0U);
  auto const find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      x = parent[x] = parent[parent[x]];
    }
    return x;
  };
  std::vector<std::vector<std::pair<std::uint32_t, stime>>> adj(n_stops);
  for (auto const& f : footpaths) {
    if (f.from_ >= n_stops || f.to_ >= n_stops) {
      throw validation_error{"footpath references unknown stop"};
    }
    if (f.from_ == f.to_) {
      continue;
    }
    if (f.duration_ <= 0) {
      throw validation_error{"footpath with non-positive duration"};
    }
    adj[f.from_].emplace_back(f.to_, f.duration_);
    parent[find(f.from_)] = find(f.to_);
  }
  std::vector<std::size_t> comp_size(n_stops, 0U);
  for (auto i = 0U; i != n_stops; ++i) {
    if (++comp_size[find(i)] > opt.max_component_size_) {
      throw validation_error{"footpath component exceeds size limit of " +
                             std::to_string(opt.max_component_size_)};
    }
  }

  std::vector<raw_footpath> closed;
  std::vector<stime> dist(n_stops, kInfinity);
  std::vector<std::uint32_t> touched;
  using entry = std::pair<stime, std::uint32_t>;
  for (auto s = 0U; s != n_stops; ++s) {
    if (adj[s].empty()) {
      continue;
    }
    std::priority_queue<entry, std::vector<entry>, std::greater<>> pq;
    dist[s] = 0;
    touched.push_back(s);
    pq.emplace(0, s);
    while (!pq.empty()) {
      auto const [d, u] = pq.top();
      pq.pop();
      if (d != dist[u]) {
        continue;
      }
      for (auto const& [v, w] : adj[u]) {
        if (d + w < dist[v]) {
          if (dist[v] == kInfinity) {
            touched.push_back(v);
          }
          dist[v] = d + w;
          pq.emplace(dist[v], v);
        }
      }
    }
    for (auto const v : touched) {
      if (v != s) {
        closed.push_back({s, v, dist[v]});
      }
      dist[v] = kInfinity;
    }
    touched.clear();
  }
  return footpath_set::from_edges(n_stops, std::move(closed));
}

namespace {

struct line_key {
  std::vector<std::string_view> stops_;
  stime first_dep_;
  std::string_view first_id_;

  auto operator<=>(line_key const&) const = default;
};

}  // namespace

orderings assign_orderings(timetable const& tt) {
  orderings o;

  std::vector<std::uint32_t> stops(tt.n_stops());
  std::iota(begin(stops), end(stops), 0U);
  std::sort(begin(stops), end(stops), [&](auto const a, auto const b) {
    return tt.stop_ids_[stop_idx{a}] < tt.stop_ids_[stop_idx{b}];
  });
  o.stop_rank_.resize(tt.n_stops());
  for (auto r = 0U; r != stops.size(); ++r) {
    o.stop_rank_[stop_idx{stops[r]}] = r;
  }

  std::vector<line_key> keys;
  for (auto const& l : tt.lines_) {
    line_key k;
    for (auto const s : l.stops_) {
      k.stops_.emplace_back(tt.stop_ids_[s]);
    }
    k.first_dep_ = tt.dep(l.first_trip_, 0U);
    k.first_id_ = tt.trips_[l.first_trip_].id_;
    keys.push_back(std::move(k));
  }
  std::vector<std::uint32_t> lines(tt.n_lines());
  std::iota(begin(lines), end(lines), 0U);
  std::sort(begin(lines), end(lines),
            [&](auto const a, auto const b) { return keys[a] < keys[b]; });
  o.line_rank_.resize(tt.n_lines());
  for (auto r = 0U; r != lines.size(); ++r) {
    o.line_rank_[line_idx{lines[r]}] = r;
  }

  std::vector<std::uint32_t> events(tt.n_events());
  std::iota(begin(events), end(events), 0U);
  auto const key = [&](std::uint32_t const e) {
    auto const& ev = tt.events_[event_idx{e}];
    return std::make_tuple(o.line_rank_[tt.line_of(ev.trip_)],
                           tt.arr(ev.trip_, 0U), ev.pos_);
  };
  std::sort(begin(events), end(events),
            [&](auto const a, auto const b) { return key(a) < key(b); });
  o.event_rank_.resize(tt.n_events());
  for (auto r = 0U; r != events.size(); ++r) {
    o.event_rank_[event_idx{events[r]}] = r;
  }
  return o;
}

timetable build_timetable(raw_timetable const& raw,
                          closure_options const& opt) {
  timetable tt;

  std::vector<std::uint32_t> stop_perm(raw.stops_.size());
  std::iota(begin(stop_perm), end(stop_perm), 0U);
  std::sort(begin(stop_perm), end(stop_perm), [&](auto const a, auto const b) {
    return raw.stops_[a] < raw.stops_[b];
  });
  std::vector<std::uint32_t> stop_map(raw.stops_.size());
  for (auto i = 0U; i != stop_perm.size(); ++i) {
    if (i != 0U && raw.stops_[stop_perm[i]] == raw.stops_[stop_perm[i - 1]]) {
      throw validation_error{"duplicate stop id " + raw.stops_[stop_perm[i]]};
    }
    stop_map[stop_perm[i]] = i;
    tt.stop_ids_.push_back(raw.stops_[stop_perm[i]]);
  }

  auto trips = raw.trips_;
  for (auto& t : trips) {
    if (t.events_.size() < 2U) {
      throw validation_error{"trip with <2 events: " + t.id_};
    }
    if (t.events_.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw validation_error{"trip too long: " + t.id_};
    }
    for (auto& e : t.events_) {
      if (e.stop_ >= stop_map.size()) {
        throw validation_error{"trip " + t.id_ + " references unknown stop"};
      }
      e.stop_ = stop_map[e.stop_];
    }
  }

  auto lines = build_lines(trips);
  using key_t = std::tuple<std::vector<std::string_view>, stime,
                           std::string_view>;
  std::vector<key_t> keys;
  for (auto const& l : lines) {
    std::vector<std::string_view> seq;
    for (auto const& e : trips[l.front()].events_) {
      seq.emplace_back(tt.stop_ids_[stop_idx{e.stop_}]);
    }
    keys.emplace_back(std::move(seq), trips[l.front()].events_.front().dep_,
                      trips[l.front()].id_);
  }
  std::vector<std::uint32_t> line_order(lines.size());
  std::iota(begin(line_order), end(line_order), 0U);
  std::sort(begin(line_order), end(line_order),
            [&](auto const a, auto const b) { return keys[a] < keys[b]; });

  for (auto const li : line_order) {
    auto const l = line_idx{static_cast<std::uint32_t>(tt.lines_.size())};
    auto& ln = tt.lines_.emplace_back();
    ln.first_trip_ = tt.trips_.size_key();
    ln.n_trips_ = static_cast<std::uint32_t>(lines[li].size());
    for (auto const& e : trips[lines[li].front()].events_) {
      ln.stops_.emplace_back(e.stop_);
    }
    for (auto const ti : lines[li]) {
      auto const t = tt.trips_.size_key();
      auto const& rt = trips[ti];
      tt.trips_.push_back(trip{tt.events_.size_key(),
                               static_cast<std::uint16_t>(rt.events_.size()),
                               l, rt.id_});
      for (auto i = 0U; i != rt.events_.size(); ++i) {
        auto const& e = rt.events_[i];
        tt.events_.push_back(stop_event{stop_idx{e.stop_}, e.arr_, e.dep_, t,
                                        static_cast<std::uint16_t>(i)});
      }
    }
  }

  tt.stop_lines_.resize(tt.n_stops());
  for (auto l = line_idx{0U}; l != tt.lines_.size_key(); ++l) {
    auto const& stops = tt.lines_[l].stops_;
    for (auto i = 0U; i != stops.size(); ++i) {
      tt.stop_lines_[stops[i]].push_back({l, static_cast<std::uint16_t>(i)});
    }
  }

  auto footpaths = raw.footpaths_;
  for (auto& f : footpaths) {
    if (f.from_ >= stop_map.size() || f.to_ >= stop_map.size()) {
      throw validation_error{"footpath references unknown stop"};
    }
    f.from_ = stop_map[f.from_];
    f.to_ = stop_map[f.to_];
  }
  tt.footpaths_ = close_footpaths(tt.n_stops(), footpaths, opt);
  tt.order_ = assign_orderings(tt);
  return tt;
}

std::vector<std::string> validate_timetable(timetable const& tt) {
  std::vector<std::string> report;
  auto const name = [&](stop_idx const s) {
    return s < tt.stop_ids_.size_key() ? tt.stop_ids_[s]
                                       : "#" + std::to_string(to_idx(s));
  };

  for (auto i = 1U; i < tt.n_stops(); ++i) {
    if (!(tt.stop_ids_[stop_idx{i - 1U}] < tt.stop_ids_[stop_idx{i}])) {
      report.push_back("stop ids not unique/sorted at " +
                       tt.stop_ids_[stop_idx{i}]);
    }
  }

  for (auto t = trip_idx{0U}; t != tt.trips_.size_key(); ++t) {
    auto const& tr = tt.trips_[t];
    if (tr.size_ < 2U) {
      report.push_back("trip with <2 events: " + tr.id_);
      continue;
    }
    if (to_idx(tr.first_) + tr.size_ > tt.n_events()) {
      report.push_back("trip events out of range: " + tr.id_);
      continue;
    }
    for (auto i = 0U; i != tr.size_; ++i) {
      auto const& e = tt.ev(t, i);
      if (e.trip_ != t || e.pos_ != i) {
        report.push_back("event back-reference broken in trip " + tr.id_);
      }
      if (e.dep_ < e.arr_) {
        report.push_back("departure before arrival in trip " + tr.id_ +
                         " at index " + std::to_string(i));
      }
      if (e.arr_ < 0 || e.dep_ >= kHorizon) {
        report.push_back("time outside horizon in trip " + tr.id_);
      }
      if (i != 0U && e.arr_ < tt.dep(t, i - 1U)) {
        report.push_back("non-monotone trip times in trip " + tr.id_ +
                         " at index " + std::to_string(i));
      }
      if (e.stop_ >= tt.stop_ids_.size_key()) {
        report.push_back("unknown stop in trip " + tr.id_);
      }
    }
  }

  for (auto l = line_idx{0U}; l != tt.lines_.size_key(); ++l) {
    auto const& ln = tt.lines_[l];
    for (auto t = ln.first_trip_; t != ln.first_trip_ + ln.n_trips_; ++t) {
      if (tt.trips_[t].line_ != l || tt.size(t) != ln.stops_.size()) {
        report.push_back("trip " + tt.trips_[t].id_ + " inconsistent with line");
        continue;
      }
      for (auto i = 0U; i != tt.size(t); ++i) {
        if (tt.stop(t, i) != ln.stops_[i]) {
          report.push_back("trip " + tt.trips_[t].id_ +
                           " does not follow line stop sequence");
        }
      }
      if (t == ln.first_trip_) {
        continue;
      }
      for (auto i = 0U; i != tt.size(t); ++i) {
        if (!(tt.arr(t - 1U, i) < tt.arr(t, i)) ||
            !(tt.dep(t - 1U, i) < tt.dep(t, i))) {
          report.push_back("overtaking in line " + std::to_string(to_idx(l)) +
                           " between trips " + tt.trips_[t - 1U].id_ +
                           " and " + tt.trips_[t].id_);
          break;
        }
      }
    }
  }

  auto const& fp = tt.footpaths_;
  if (fp.n_stops() != tt.n_stops()) {
    report.push_back("footpath table size mismatch");
    return report;
  }
  for (auto p = stop_idx{0U}; p != tt.stop_ids_.size_key(); ++p) {
    if (fp.duration(p, p) != 0) {
      report.push_back("missing empty footpath at " + name(p));
    }
    for (auto const& pq : fp.out(p)) {
      if (pq.to_ != p && pq.duration_ <= 0) {
        report.push_back("non-positive footpath at (" + name(p) + "," +
                         name(pq.to_) + ")");
      }
      for (auto const& qr : fp.out(pq.to_)) {
        if (qr.to_ == p || pq.to_ == p || qr.to_ == pq.to_) {
          continue;
        }
        auto const direct = fp.duration(p, qr.to_);
        if (direct == kInfinity) {
          report.push_back("closure violated at (" + name(p) + "," +
                           name(qr.to_) + ")");
        } else if (direct > pq.duration_ + qr.duration_) {
          report.push_back("triangle inequality violated at (" + name(p) +
                           "," + name(pq.to_) + "," + name(qr.to_) + ")");
        }
      }
    }
  }
  return report;
}

namespace {

template <typename Fn>
void for_each_departure(timetable const& tt, stop_idx const s,
                        bool const only_source, Fn&& fn) {
  for (auto const& f : tt.footpaths_.out(s)) {
    if (only_source && f.to_ != s) {
      continue;
    }
    for (auto const& v : tt.stop_lines_[f.to_]) {
      auto const& ln = tt.lines_[v.line_];
      if (v.pos_ + 1U >= ln.stops_.size()) {
        continue;
      }
      for (auto t = ln.first_trip_; t != ln.first_trip_ + ln.n_trips_; ++t) {
        fn(tt.dep(t, v.pos_) - f.duration_);
      }
    }
  }
}

std::vector<stime> sorted_desc(std::vector<stime> v) {
  std::sort(begin(v), end(v), std::greater<>{});
  v.erase(std::unique(begin(v), end(v)), end(v));
  return v;
}

}  // namespace

std::vector<stime> possible_departures(timetable const& tt, stop_idx const s,
                                       stime const from, stime const to) {
  std::vector<stime> out;
  for_each_departure(tt, s, false, [&](stime const t) {
    if (t >= from && t <= to) {
      out.push_back(t);
    }
  });
  return sorted_desc(std::move(out));
}

std::vector<stime> candidate_departures(timetable const& tt,
                                        stop_idx const s) {
  std::vector<stime> out;
  for_each_departure(tt, s, true, [&](stime const t) { out.push_back(t); });
  return sorted_desc(std::move(out));
}

}  // namespace flashtb
