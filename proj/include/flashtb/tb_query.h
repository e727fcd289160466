#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <vector>

#include "flashtb/journey.h"
#include "flashtb/timetable.h"
#include "flashtb/transfers.h"

namespace flashtb {

constexpr std::uint32_t kDefaultMaxRounds = 15U;

// Transfer filter that admits every transfer.
struct all_transfers {
  bool operator()(std::uint32_t) const { return true; }
};

struct tb_options {
  std::uint32_t max_rounds_{kDefaultMaxRounds};
  bool target_pruning_{true};
  bool line_pruning_{true};
  // Lazy reset of reached indices via 16-bit per-trip timestamps.
  bool timestamps_{false};
  // Record the position of every scanned transfer.
  bool log_transfers_{false};
};

struct tb_stats {
  std::uint64_t scanned_segments_{};
  std::uint64_t scanned_transfers_{};
  std::uint32_t rounds_{};
  std::int64_t query_ns_{};
  std::int64_t unpack_ns_{};
};

struct tb_result {
  pareto_front front_;
  // One journey per front entry, same order.
  std::vector<journey> journeys_;
};

namespace detail {

struct segment {
  trip_idx trip_;
  std::uint16_t from_{};
  std::uint16_t to_{};
  // Offset of the preceding segment in the previous round's queue.
  std::uint32_t parent_{};
  std::uint16_t parent_exit_{};
};

constexpr auto kNoParent = std::numeric_limits<std::uint32_t>::max();

struct arrival_ref {
  std::uint32_t offset_{kNoParent};
  std::uint16_t exit_{};
};

inline std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Walks the parent chain back from a segment exited at `exit` in round n.
inline std::vector<leg> unpack_legs(
    std::vector<std::vector<segment>> const& queues, std::uint32_t n,
    std::uint32_t offset, std::uint16_t exit) {
  std::vector<leg> legs;
  while (offset != kNoParent) {
    auto const& seg = queues.at(n).at(offset);
    legs.push_back({seg.trip_, static_cast<std::uint16_t>(seg.from_ - 1U),
                    exit});
    offset = seg.parent_;
    exit = seg.parent_exit_;
    --n;
  }
  std::reverse(begin(legs), end(legs));
  return legs;
}

}  // namespace detail

// One-to-one TB for a fixed departure time.
template <typename Filter = all_transfers>
class tb_engine {
public:
  tb_engine(timetable const& tt, transfer_set const& ts, tb_options opt = {})
      : tt_{tt},
        ts_{ts},
        opt_{opt},
        reached_(tt.n_trips()),
        stamp_(tt.n_trips(), 0U),
        to_target_(tt.n_stops(), kInfinity),
        queues_(opt.max_rounds_ + 2U),
        best_(opt.max_rounds_ + 1U) {}

  tb_result query(stop_idx const s, stop_idx const t, stime const dep,
                  Filter const& filter = {}) {
    auto const start = detail::now_ns();
    stats_ = {};
    log_.clear();
    begin_query();
    for (auto const& e : tt_.footpaths_.in(t)) {
      to_target_[to_idx(e.to_)] = e.duration_;
    }
    for (auto& q : queues_) {
      q.clear();
    }

    auto const max = opt_.max_rounds_;
    std::vector<stime> arr(max + 1U, kInfinity);
    auto tau_min = to_target_[to_idx(s)] == kInfinity
                       ? kInfinity
                       : dep + to_target_[to_idx(s)];
    arr[0] = tau_min;

    if (max != 0U) {
      for (auto const& f : tt_.footpaths_.out(s)) {
        for (auto const& v : tt_.stop_lines_[f.to_]) {
          if (v.pos_ + 1U >= tt_.lines_[v.line_].stops_.size()) {
            continue;
          }
          auto const trip = tt_.earliest_trip(v.line_, v.pos_, dep + f.duration_);
          if (trip.valid()) {
            enqueue(trip, v.pos_ + 1U, 1U, {});
          }
        }
      }
    }

    for (auto n = 1U; n <= max; ++n) {
      auto const& q = queues_[n];
      if (q.empty()) {
        for (auto m = n; m <= max; ++m) {
          arr[m] = tau_min;
        }
        break;
      }
      stats_.rounds_ = n;
      stats_.scanned_segments_ += q.size();
      for (auto k = 0U; k != q.size(); ++k) {
        auto const& seg = q[k];
        for (auto i = seg.from_; i <= seg.to_; ++i) {
          auto const a = tt_.arr(seg.trip_, i);
          if (opt_.target_pruning_ && a >= tau_min) {
            break;
          }
          auto const w = to_target_[to_idx(tt_.stop(seg.trip_, i))];
          if (w != kInfinity && a + w < tau_min) {
            tau_min = a + w;
            best_[n] = {k, i};
          }
        }
      }
      arr[n] = tau_min;
      if (n == max) {
        break;
      }
      for (auto k = 0U; k != q.size(); ++k) {
        auto const seg = q[k];
        for (auto i = seg.from_; i <= seg.to_; ++i) {
          if (opt_.target_pruning_ && tt_.arr(seg.trip_, i) >= tau_min) {
            break;
          }
          auto const e = tt_.event(seg.trip_, i);
          for (auto pos = ts_.begin_of(e); pos != ts_.end_of(e); ++pos) {
            if (!filter(pos)) {
              continue;
            }
            ++stats_.scanned_transfers_;
            if (opt_.log_transfers_) {
              log_.push_back(pos);
            }
            auto const& target = tt_.events_[ts_.targets_[pos].to_];
            enqueue(target.trip_, target.pos_ + 1U, n + 1U, {k, i});
          }
        }
      }
    }

    tb_result res;
    res.front_ = front_from_rounds(arr);
    stats_.query_ns_ = detail::now_ns() - start;

    auto const unpack_start = detail::now_ns();
    for (auto const& c : res.front_) {
      if (c.trips_ == 0U) {
        res.journeys_.push_back(make_journey(tt_, s, t, {}, dep));
      } else {
        auto const& b = best_[c.trips_];
        res.journeys_.push_back(make_journey(
            tt_, s, t,
            detail::unpack_legs(queues_, c.trips_, b.offset_, b.exit_)));
      }
    }
    stats_.unpack_ns_ = detail::now_ns() - unpack_start;

    for (auto const& e : tt_.footpaths_.in(t)) {
      to_target_[to_idx(e.to_)] = kInfinity;
    }
    return res;
  }

  tb_stats const& stats() const { return stats_; }
  std::vector<std::uint32_t> const& scanned_log() const { return log_; }
  std::uint64_t physical_resets() const { return physical_resets_; }

private:
  void begin_query() {
    if (opt_.timestamps_) {
      if (++counter_ == 0U) {
        std::fill(begin(stamp_), end(stamp_), std::uint16_t{0U});
        counter_ = 1U;
        ++physical_resets_;
      }
    } else {
      for (auto t = trip_idx{0U}; t != tt_.trips_.size_key(); ++t) {
        reached_[to_idx(t)] = tt_.size(t);
      }
    }
  }

  std::uint16_t& reached(trip_idx const t) {
    auto& r = reached_[to_idx(t)];
    if (opt_.timestamps_ && stamp_[to_idx(t)] != counter_) {
      stamp_[to_idx(t)] = counter_;
      r = tt_.size(t);
    }
    return r;
  }

  void enqueue(trip_idx const t, std::uint32_t const j, std::uint32_t const n,
               detail::arrival_ref const parent) {
    auto& r = reached(t);
    if (r <= j) {
      return;
    }
    queues_[n].push_back({t, static_cast<std::uint16_t>(j),
                          static_cast<std::uint16_t>(r - 1U), parent.offset_,
                          parent.exit_});
    if (!opt_.line_pruning_) {
      r = static_cast<std::uint16_t>(j);
      return;
    }
    for (auto u = t; u != tt_.line_end(t); ++u) {
      auto& ru = reached(u);
      if (ru <= j) {
        break;
      }
      ru = static_cast<std::uint16_t>(j);
    }
  }

  timetable const& tt_;
  transfer_set const& ts_;
  tb_options opt_;
  std::vector<std::uint16_t> reached_;
  std::vector<std::uint16_t> stamp_;
  std::uint16_t counter_{0U};
  std::uint64_t physical_resets_{0U};
  std::vector<stime> to_target_;
  std::vector<std::vector<detail::segment>> queues_;
  std::vector<detail::arrival_ref> best_;
  tb_stats stats_;
  std::vector<std::uint32_t> log_;
};

struct arrival_trace_entry {
  stime run_{};
  std::uint32_t round_{};
  stop_idx stop_;
  stime arrival_{};
  bool accepted_{};

  bool operator==(arrival_trace_entry const&) const = default;
};

// Round-based TB with per-round reached indices R_n and arrival labels that
// survive between runs. A single run answers a one-to-all (local pruning) or
// one-to-one (target pruning) query for a fixed departure time; consecutive
// runs with descending departure times form a Profile-TB search.
template <typename Filter = all_transfers>
class profile_engine {
public:
  // With a valid target the engine works one-to-one and only maintains
  // labels for the target.
  profile_engine(timetable const& tt, transfer_set const& ts,
                 stop_idx const target = stop_idx::invalid(),
                 tb_options opt = {})
      : tt_{tt},
        ts_{ts},
        opt_{opt},
        target_{target},
        reached_(opt.max_rounds_ + 1U,
                 std::vector<std::uint16_t>(tt.n_trips())),
        arr_(opt.max_rounds_ + 1U,
             std::vector<stime>(target.valid() ? 1U : tt.n_stops())),
        parent_(opt.max_rounds_ + 1U,
                std::vector<detail::arrival_ref>(
                    target.valid() ? 1U : tt.n_stops())),
        is_dirty_(opt.max_rounds_ + 1U,
                  std::vector<bool>(target.valid() ? 1U : tt.n_stops())),
        to_target_(tt.n_stops(), kInfinity),
        queues_(opt.max_rounds_ + 2U) {
    if (target.valid()) {
      for (auto const& e : tt.footpaths_.in(target)) {
        to_target_[to_idx(e.to_)] = e.duration_;
      }
    }
    reset();
  }

  void reset() {
    for (auto& r : reached_) {
      for (auto t = trip_idx{0U}; t != tt_.trips_.size_key(); ++t) {
        r[to_idx(t)] = tt_.size(t);
      }
    }
    for (auto& a : arr_) {
      std::fill(begin(a), end(a), kInfinity);
    }
  }

  // One run. Returns the profile entries (departure `dep`) whose arrival
  // improved on everything found by this and earlier runs, with their stop.
  std::vector<std::pair<stop_idx, profile_entry>> run(
      stop_idx const s, stime const dep, Filter const& filter = {}) {
    auto const start = detail::now_ns();
    for (auto& q : queues_) {
      q.clear();
    }
    dep_ = dep;
    source_ = s;
    auto const max = opt_.max_rounds_;

    for (auto const& f : tt_.footpaths_.out(s)) {
      if (one_to_one()) {
        if (f.to_ == target_) {
          improve(0U, 0U, dep + f.duration_, {});
        }
      } else {
        improve(to_idx(f.to_), 0U, dep + f.duration_, {});
      }
    }
    if (max != 0U) {
      for (auto const& f : tt_.footpaths_.out(s)) {
        for (auto const& v : tt_.stop_lines_[f.to_]) {
          if (v.pos_ + 1U >= tt_.lines_[v.line_].stops_.size()) {
            continue;
          }
          auto const trip =
              tt_.earliest_trip(v.line_, v.pos_, dep + f.duration_);
          if (trip.valid()) {
            enqueue(trip, v.pos_ + 1U, 1U, {});
          }
        }
      }
    }

    for (auto n = 1U; n <= max && !queues_[n].empty(); ++n) {
      auto const& q = queues_[n];
      stats_.rounds_ = std::max(stats_.rounds_, n);
      stats_.scanned_segments_ += q.size();
      for (auto k = 0U; k != q.size(); ++k) {
        auto const& seg = q[k];
        for (auto i = seg.from_; i <= seg.to_; ++i) {
          auto const a = tt_.arr(seg.trip_, i);
          auto const p = tt_.stop(seg.trip_, i);
          if (one_to_one()) {
            if (opt_.target_pruning_ && a >= arr_[n][0]) {
              break;
            }
            auto const w = to_target_[to_idx(p)];
            if (w != kInfinity) {
              improve(0U, n, a + w, {k, i});
            }
          } else {
            for (auto const& f : tt_.footpaths_.out(p)) {
              improve(to_idx(f.to_), n, a + f.duration_, {k, i});
            }
          }
        }
      }
      if (n == max) {
        break;
      }
      for (auto k = 0U; k != q.size(); ++k) {
        auto const seg = q[k];
        for (auto i = seg.from_; i <= seg.to_; ++i) {
          auto const a = tt_.arr(seg.trip_, i);
          if (one_to_one()) {
            if (opt_.target_pruning_ && a >= arr_[n][0]) {
              break;
            }
          } else if (a > arr_[n][to_idx(tt_.stop(seg.trip_, i))]) {
            continue;
          }
          auto const e = tt_.event(seg.trip_, i);
          for (auto pos = ts_.begin_of(e); pos != ts_.end_of(e); ++pos) {
            if (!filter(pos)) {
              continue;
            }
            ++stats_.scanned_transfers_;
            auto const& target = tt_.events_[ts_.targets_[pos].to_];
            enqueue(target.trip_, target.pos_ + 1U, n + 1U, {k, i});
          }
        }
      }
    }

    std::vector<std::pair<stop_idx, profile_entry>> out;
    for (auto const& [p, n] : dirty_) {
      is_dirty_[n][p] = false;
      if (n == 0U || arr_[n][p] < arr_[n - 1U][p]) {
        out.emplace_back(one_to_one() ? target_ : stop_idx{p},
                         profile_entry{dep, arr_[n][p], n});
      }
    }
    dirty_.clear();
    stats_.query_ns_ += detail::now_ns() - start;
    return out;
  }

  // Arrival label of stop p (or of the target in one-to-one mode) with at
  // most n trips.
  stime arrival(stop_idx const p, std::uint32_t const n) const {
    return arr_[n][one_to_one() ? 0U : to_idx(p)];
  }

  // Journey realising arrival(p, n), valid after a run that set it.
  journey unpack(stop_idx const p, std::uint32_t const n) const {
    if (n == 0U) {
      return make_journey(tt_, source_, p, {}, dep_);
    }
    auto const& ref = parent_[n][one_to_one() ? 0U : to_idx(p)];
    return make_journey(tt_, source_, p,
                        detail::unpack_legs(queues_, n, ref.offset_, ref.exit_));
  }

  tb_stats const& stats() const { return stats_; }
  void clear_stats() { stats_ = {}; }

  std::vector<arrival_trace_entry> const& trace() const { return trace_; }
  void enable_trace(bool const on) { tracing_ = on; }

private:
  bool one_to_one() const { return target_.valid(); }

  void improve(std::uint32_t const p, std::uint32_t const n, stime const a,
               detail::arrival_ref const ref) {
    auto const accepted = a < arr_[n][p];
    if (tracing_) {
      trace_.push_back({dep_, n,
                        one_to_one() ? target_ : stop_idx{p}, a, accepted});
    }
    if (!accepted) {
      return;
    }
    for (auto m = n; m != arr_.size() && a < arr_[m][p]; ++m) {
      arr_[m][p] = a;
    }
    parent_[n][p] = ref;
    if (!is_dirty_[n][p]) {
      is_dirty_[n][p] = true;
      dirty_.emplace_back(p, n);
    }
  }

  void enqueue(trip_idx const t, std::uint32_t const j, std::uint32_t const n,
               detail::arrival_ref const parent) {
    auto const r = reached_[n][to_idx(t)];
    if (r <= j) {
      return;
    }
    queues_[n].push_back({t, static_cast<std::uint16_t>(j),
                          static_cast<std::uint16_t>(r - 1U), parent.offset_,
                          parent.exit_});
    auto const last = opt_.line_pruning_ ? tt_.line_end(t) : t + 1U;
    for (auto u = t; u != last; ++u) {
      if (reached_[n][to_idx(u)] <= j) {
        break;
      }
      for (auto m = n; m != reached_.size(); ++m) {
        auto& rm = reached_[m][to_idx(u)];
        if (rm <= j) {
          break;
        }
        rm = static_cast<std::uint16_t>(j);
      }
    }
  }

  timetable const& tt_;
  transfer_set const& ts_;
  tb_options opt_;
  stop_idx target_;
  stop_idx source_;
  stime dep_{};
  std::vector<std::vector<std::uint16_t>> reached_;
  std::vector<std::vector<stime>> arr_;
  std::vector<std::vector<detail::arrival_ref>> parent_;
  std::vector<std::vector<bool>> is_dirty_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dirty_;
  std::vector<stime> to_target_;
  std::vector<std::vector<detail::segment>> queues_;
  tb_stats stats_;
  bool tracing_{false};
  std::vector<arrival_trace_entry> trace_;
};

// Convenience wrappers over all transfers.
tb_result tb_query(timetable const&, transfer_set const&, stop_idx s,
                   stop_idx t, stime dep, tb_options const& = {});

// Arrival labels arr[n][p] for n = 0..max_rounds after a single run.
struct one_to_all_result {
  pareto_front front(stop_idx const p) const;
  std::vector<std::vector<stime>> arrival_;
};

one_to_all_result one_to_all_query(timetable const&, transfer_set const&,
                                   stop_idx s, stime dep,
                                   tb_options const& = {});

// Profile over all possible departures in [from, to]. With an invalid target
// the result holds entries for every stop, keyed by stop index.
profile profile_query_tb(timetable const&, transfer_set const&, stop_idx s,
                         stop_idx t, stime from, stime to,
                         tb_options const& = {});
std::vector<profile> profile_query_tb_all(timetable const&,
                                          transfer_set const&, stop_idx s,
                                          stime from, stime to,
                                          tb_options const& = {});

}  // namespace flashtb
