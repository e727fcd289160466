#include "flashtb/canonical_profile.h"

#include <algorithm>
#include <atomic>
#include <thread>

namespace flashtb {

canonical_profile::canonical_profile(timetable const& tt,
                                     split_transfer_set const& ts,
                                     canonical_options opt)
    : tt_{tt}, ts_{ts}, opt_{opt} {
  auto const rounds = opt.max_rounds_ + 1U;
  arr_.assign(rounds, std::vector<stime>(tt.n_stops()));
  dep_label_.assign(rounds, std::vector<stime>(tt.n_stops()));
  stop_parent_.assign(rounds, std::vector<stop_parent>(tt.n_stops()));
  trip_parent_.assign(rounds, std::vector<stop_idx>(tt.n_trips()));
  reached_.assign(rounds, std::vector<std::uint16_t>(tt.n_trips()));
  reached_run_.resize(tt.n_trips());
  queues_.resize(opt.max_rounds_ + 2U);
  is_dirty_.assign(rounds, std::vector<bool>(tt.n_stops(), false));
  best_x_.assign(rounds, std::vector<tiebreak_seq>(tt.n_stops()));
}

void canonical_profile::reset_source() {
  for (auto n = 0U; n != arr_.size(); ++n) {
    std::fill(begin(arr_[n]), end(arr_[n]), kInfinity);
    std::fill(begin(dep_label_[n]), end(dep_label_[n]), kInfinity);
    std::fill(begin(stop_parent_[n]), end(stop_parent_[n]), stop_parent{});
    std::fill(begin(trip_parent_[n]), end(trip_parent_[n]),
              stop_idx::invalid());
    for (auto t = trip_idx{0U}; t != tt_.trips_.size_key(); ++t) {
      reached_[n][to_idx(t)] = tt_.size(t);
    }
    for (auto& x : best_x_[n]) {
      x.clear();
    }
  }
}

void canonical_profile::run_source(stop_idx const s, sink_t const& sink) {
  source_ = s;
  reset_source();
  for (auto const dep : possible_departures(tt_, s)) {
    run(dep, sink);
  }
}

std::vector<canonical_emit> canonical_profile::run_source(stop_idx const s) {
  std::vector<canonical_emit> out;
  run_source(s, [&](canonical_emit const& e) { out.push_back(e); });
  return out;
}

void canonical_profile::run(stime const dep, sink_t const& sink) {
  dep_ = dep;
  for (auto t = trip_idx{0U}; t != tt_.trips_.size_key(); ++t) {
    reached_run_[to_idx(t)] = tt_.size(t);
  }
  for (auto& q : queues_) {
    q.clear();
  }

  for (auto const& f : tt_.footpaths_.out(source_)) {
    add_arrival(f.to_, 0U, dep + f.duration_, trip_idx::invalid(), 0U);
  }
  if (opt_.max_rounds_ != 0U) {
    for (auto const& f : tt_.footpaths_.out(source_)) {
      for (auto const& v : tt_.stop_lines_[f.to_]) {
        if (v.pos_ + 1U >= tt_.lines_[v.line_].stops_.size()) {
          continue;
        }
        auto const t = tt_.earliest_trip(v.line_, v.pos_, dep + f.duration_);
        if (t.valid()) {
          enqueue(t, v.pos_ + 1U, 1U, source_);
        }
      }
    }
  }
  for (auto n = 1U; n <= opt_.max_rounds_ && !queues_[n].empty(); ++n) {
    scan(n);
  }

  for (auto const& [p, n, before] : dirty_) {
    is_dirty_[n][p] = false;
    if (n == 0U) {
      continue;
    }
    auto const a = arr_[n][p];
    auto& best = best_x_[n][p];
    if (dep_label_[n][p] != dep || !(a < arr_[n - 1U][p])) {
      if (a < before) {
        best.clear();
      }
      continue;
    }
    auto j = unpack(stop_idx{p}, n);
    auto x = tiebreak_global(tt_, j);
    // A tie with a journey from a later run only counts if it breaks in our
    // favour: the later journey is feasible for this departure as well.
    if (a == before && !best.empty() && compare_tiebreak(x, best) >= 0) {
      continue;
    }
    best = std::move(x);
    sink({stop_idx{p}, n, std::move(j)});
  }
  dirty_.clear();
}

void canonical_profile::scan(std::uint32_t const n) {
  auto& q = queues_[n];
  auto const& rank = tt_.order_.event_rank_;
  std::stable_sort(begin(q), end(q), [&](segment const& a, segment const& b) {
    return rank[tt_.event(a.trip_, a.from_)] < rank[tt_.event(b.trip_, b.from_)];
  });
  if (opt_.trace_) {
    auto& qt = queue_trace_.emplace_back();
    qt.run_ = dep_;
    qt.round_ = n;
    for (auto const& seg : q) {
      qt.segments_.emplace_back(seg.trip_, seg.from_, seg.to_);
    }
  }

  for (auto const& seg : q) {
    for (auto i = seg.from_; i <= seg.to_; ++i) {
      add_arrival(tt_.stop(seg.trip_, i), n, tt_.arr(seg.trip_, i), seg.trip_,
                  i);
    }
  }
  for (auto const& seg : q) {
    for (auto i = seg.from_; i <= seg.to_; ++i) {
      auto const p = tt_.stop(seg.trip_, i);
      for (auto const& f : tt_.footpaths_.out(p)) {
        if (f.to_ != p) {
          add_arrival(f.to_, n, tt_.arr(seg.trip_, i) + f.duration_,
                      seg.trip_, i);
        }
      }
    }
  }
  if (n == opt_.max_rounds_) {
    return;
  }
  for (auto const& seg : q) {
    for (auto i = seg.from_; i <= seg.to_; ++i) {
      auto const p = tt_.stop(seg.trip_, i);
      if (tt_.arr(seg.trip_, i) > arr_[n][to_idx(p)]) {
        continue;
      }
      for (auto const& t : ts_.same_stop_.out(tt_.event(seg.trip_, i))) {
        auto const& target = tt_.events_[t.to_];
        enqueue(target.trip_, target.pos_ + 1U, n + 1U, p);
      }
    }
  }
  for (auto const& seg : q) {
    for (auto i = seg.from_; i <= seg.to_; ++i) {
      auto const p = tt_.stop(seg.trip_, i);
      if (tt_.arr(seg.trip_, i) > arr_[n][to_idx(p)]) {
        continue;
      }
      for (auto const& t : ts_.footpath_.out(tt_.event(seg.trip_, i))) {
        auto const& target = tt_.events_[t.to_];
        if (t.walk_arrival_ > arr_[n][to_idx(target.stop_)]) {
          continue;
        }
        enqueue(target.trip_, target.pos_ + 1U, n + 1U, p);
      }
    }
  }
}

arrival_result canonical_profile::add_arrival(stop_idx const p,
                                              std::uint32_t const n,
                                              stime const a, trip_idx const t,
                                              std::uint32_t const i) {
  auto const pi = to_idx(p);
  auto res = arrival_result::kAccepted;
  if (arr_[n][pi] == a && dep_label_[n][pi] == dep_) {
    res = arrival_result::kT1;
  } else if (arr_[n][pi] < a) {
    res = arrival_result::kT2a;
  } else if (n != 0U && arr_[n - 1U][pi] <= a) {
    res = arrival_result::kT2b;
  }
  if (opt_.trace_) {
    arrival_trace_.push_back({dep_, n, p, a, res});
  }
  if (res != arrival_result::kAccepted) {
    return res;
  }

  if (!is_dirty_[n][pi]) {
    is_dirty_[n][pi] = true;
    dirty_.emplace_back(pi, n, arr_[n][pi]);
  }
  // An equal arrival from a later run is replaced, so the departure label of
  // round n is always written.
  arr_[n][pi] = a;
  dep_label_[n][pi] = dep_;
  for (auto m = n + 1U; m != arr_.size() && a < arr_[m][pi]; ++m) {
    arr_[m][pi] = a;
    dep_label_[m][pi] = dep_;
  }
  if (t.valid()) {
    stop_parent_[n][pi] = {
        t, static_cast<std::uint16_t>(reached_run_[to_idx(t)] - 1U),
        static_cast<std::uint16_t>(i)};
  }
  return res;
}

enqueue_result canonical_profile::enqueue(trip_idx const t,
                                          std::uint32_t const j,
                                          std::uint32_t const n,
                                          stop_idx const p) {
  auto const ti = to_idx(t);
  auto res = enqueue_result::kAccepted;
  if (reached_run_[ti] <= j) {
    res = enqueue_result::kE1;
  } else if (reached_[n][ti] < j) {
    res = enqueue_result::kE2a;
  } else if (n > 1U && reached_[n - 1U][ti] <= j) {
    res = enqueue_result::kE2b;
  } else if (auto const pred = tt_.pred(t);
             pred.valid() && reached_[n][to_idx(pred)] <= j) {
    res = enqueue_result::kE2c;
  }
  if (opt_.trace_) {
    enqueue_trace_.push_back({dep_, n, t, j, res});
  }
  if (res != enqueue_result::kAccepted) {
    return res;
  }

  queues_[n].push_back({t, static_cast<std::uint16_t>(j),
                        static_cast<std::uint16_t>(reached_run_[ti] - 1U)});
  auto const jj = static_cast<std::uint16_t>(j);
  for (auto u = t; u != tt_.line_end(t); ++u) {
    auto const ui = to_idx(u);
    reached_run_[ui] = std::min(reached_run_[ui], jj);
    for (auto m = n; m != reached_.size(); ++m) {
      reached_[m][ui] = std::min(reached_[m][ui], jj);
    }
  }
  trip_parent_[n][ti] = p;
  return res;
}

journey canonical_profile::unpack(stop_idx const p,
                                  std::uint32_t const n) const {
  std::vector<leg> legs;
  auto q = p;
  for (auto m = n; m != 0U; --m) {
    auto const& sp = stop_parent_[m][to_idx(q)];
    if (!sp.trip_.valid()) {
      throw std::logic_error{"canonical unpack: missing stop parent"};
    }
    if (m != n && tt_.stop(sp.trip_, sp.exit_) != q) {
      throw std::logic_error{"canonical unpack: parent stop mismatch"};
    }
    legs.push_back({sp.trip_, sp.enter_, sp.exit_});
    q = trip_parent_[m][to_idx(sp.trip_)];
    if (!q.valid()) {
      throw std::logic_error{"canonical unpack: missing trip parent"};
    }
  }
  if (q != source_) {
    throw std::logic_error{"canonical unpack: chain does not reach source"};
  }
  std::reverse(begin(legs), end(legs));
  return make_journey(tt_, source_, p, std::move(legs));
}

std::vector<canonical_emit> canonical_journeys(timetable const& tt,
                                               split_transfer_set const& ts,
                                               canonical_options const& opt,
                                               unsigned const threads) {
  auto const n_threads = std::max(1U, threads);
  std::vector<std::vector<canonical_emit>> buffers(n_threads);
  std::atomic<std::uint32_t> next{0U};
  auto const work = [&](unsigned const w) {
    canonical_profile engine{tt, ts, opt};
    for (auto s = next.fetch_add(1U); s < tt.n_stops(); s = next.fetch_add(1U)) {
      engine.run_source(stop_idx{s}, [&](canonical_emit const& e) {
        buffers[w].push_back(e);
      });
    }
  };
  if (n_threads == 1U) {
    work(0U);
  } else {
    std::vector<std::thread> pool;
    for (auto w = 0U; w != n_threads; ++w) {
      pool.emplace_back(work, w);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  std::vector<canonical_emit> out;
  for (auto& b : buffers) {
    out.insert(end(out), std::make_move_iterator(begin(b)),
               std::make_move_iterator(end(b)));
  }
  std::sort(begin(out), end(out), [](auto const& a, auto const& b) {
    return std::tie(a.journey_, a.round_) < std::tie(b.journey_, b.round_);
  });
  return out;
}

}  // namespace flashtb
