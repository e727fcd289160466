#include <algorithm>
#include <atomic>
#include <thread>

#include "flashtb/transfers.h"

namespace flashtb {

namespace {

constexpr auto kRounds = 3U;  // rounds 0, 1, 2

enum class via : std::uint8_t { kNone, kTrip, kFootpath, kCopied };

struct label {
  stime arr_{kInfinity};
  stime dep_{kInfinity};
  via via_{via::kNone};
  bool empty_initial_{false};
  // Event at which the last trip was exited.
  event_idx exit_;
  // For round-2 trip arrivals: the transfer taken between the two trips.
  event_idx transfer_from_;
  event_idx transfer_to_;
};

struct ultra_search {
  explicit ultra_search(timetable const& tt)
      : tt_{tt},
        labels_(kRounds, std::vector<label>(tt.n_stops())),
        updated_(kRounds),
        is_updated_(kRounds, std::vector<bool>(tt.n_stops(), false)),
        line_start_(tt.n_lines(), kNoStart) {}

  void reset() {
    for (auto& round : labels_) {
      std::fill(begin(round), end(round), label{});
    }
  }

  bool add_arrival(std::uint32_t const k, stop_idx const p, stime const a,
                   label const& proto) {
    auto& l = labels_[k][to_idx(p)];
    if (l.arr_ == a && l.dep_ == dep_) {
      return false;
    }
    if (l.arr_ < a) {
      return false;
    }
    if (k != 0U && labels_[k - 1U][to_idx(p)].arr_ <= a) {
      return false;
    }
    if (!proto.empty_initial_ && l.arr_ <= a) {
      return false;
    }
    for (auto m = k; m != kRounds; ++m) {
      auto& lm = labels_[m][to_idx(p)];
      if (m != k && lm.arr_ <= a) {
        break;
      }
      lm = proto;
      lm.arr_ = a;
      lm.dep_ = dep_;
      if (m != k) {
        lm.via_ = via::kCopied;
      }
      mark(m, p);
    }
    return true;
  }

  void mark(std::uint32_t const k, stop_idx const p) {
    if (!is_updated_[k][to_idx(p)]) {
      is_updated_[k][to_idx(p)] = true;
      updated_[k].push_back(p);
    }
  }

  void run(stop_idx const s, stime const dep,
           std::vector<std::pair<event_idx, event_idx>>& out) {
    dep_ = dep;
    for (auto k = 0U; k != kRounds; ++k) {
      for (auto const p : updated_[k]) {
        is_updated_[k][to_idx(p)] = false;
      }
      updated_[k].clear();
    }

    for (auto const& f : tt_.footpaths_.out(s)) {
      label proto;
      proto.via_ = f.to_ == s ? via::kNone : via::kFootpath;
      proto.empty_initial_ = f.to_ == s;
      add_arrival(0U, f.to_, dep + f.duration_, proto);
    }

    for (auto k = 1U; k != kRounds; ++k) {
      scan_lines(k);
      relax_footpaths(k);
    }

    for (auto const p : updated_[2U]) {
      auto const& l = labels_[2U][to_idx(p)];
      if (l.via_ == via::kTrip && l.dep_ == dep && l.empty_initial_ &&
          l.transfer_from_.valid()) {
        out.emplace_back(l.transfer_from_, l.transfer_to_);
      }
    }
  }

  void scan_lines(std::uint32_t const k) {
    std::vector<line_idx> lines;
    for (auto const p : updated_[k - 1U]) {
      for (auto const& v : tt_.stop_lines_[p]) {
        auto& start = line_start_[to_idx(v.line_)];
        if (start == kNoStart) {
          lines.push_back(v.line_);
          start = v.pos_;
        } else {
          start = std::min<std::uint32_t>(start, v.pos_);
        }
      }
    }
    std::sort(begin(lines), end(lines), [&](auto const a, auto const b) {
      return tt_.order_.line_rank_[a] < tt_.order_.line_rank_[b];
    });

    auto const& prev = labels_[k - 1U];
    for (auto const l : lines) {
      auto const& ln = tt_.lines_[l];
      auto trip = trip_idx::invalid();
      auto enter = 0U;
      label boarding;
      for (auto pos = line_start_[to_idx(l)]; pos != ln.stops_.size(); ++pos) {
        auto const p = ln.stops_[pos];
        if (trip.valid()) {
          label proto;
          proto.via_ = via::kTrip;
          proto.empty_initial_ = boarding.empty_initial_;
          proto.exit_ = tt_.event(trip, pos);
          if (k == 2U) {
            proto.transfer_from_ = boarding.exit_;
            proto.transfer_to_ = tt_.event(trip, enter);
          }
          add_arrival(k, p, tt_.arr(trip, pos), proto);
        }
        if (pos + 1U == ln.stops_.size()) {
          continue;
        }
        auto const& b = prev[to_idx(p)];
        if (b.arr_ == kInfinity) {
          continue;
        }
        auto const candidate = tt_.earliest_trip(l, pos, b.arr_);
        if (candidate.valid() && (!trip.valid() || candidate < trip)) {
          trip = candidate;
          enter = pos;
          boarding = b;
        }
      }
      line_start_[to_idx(l)] = kNoStart;
    }
  }

  void relax_footpaths(std::uint32_t const k) {
    struct direct {
      stop_idx stop_;
      label label_;
    };
    std::vector<direct> sources;
    for (auto const p : updated_[k]) {
      auto const& l = labels_[k][to_idx(p)];
      if (l.via_ == via::kTrip && l.dep_ == dep_) {
        sources.push_back({p, l});
      }
    }
    std::sort(begin(sources), end(sources), [&](auto const& a, auto const& b) {
      return tt_.order_.event_rank_[a.label_.exit_] <
             tt_.order_.event_rank_[b.label_.exit_];
    });
    for (auto const& src : sources) {
      for (auto const& f : tt_.footpaths_.out(src.stop_)) {
        if (f.to_ == src.stop_) {
          continue;
        }
        label proto = src.label_;
        proto.via_ = via::kFootpath;
        add_arrival(k, f.to_, src.label_.arr_ + f.duration_, proto);
      }
    }
  }

  static constexpr auto kNoStart = std::numeric_limits<std::uint32_t>::max();

  timetable const& tt_;
  stime dep_{};
  std::vector<std::vector<label>> labels_;
  std::vector<std::vector<stop_idx>> updated_;
  std::vector<std::vector<bool>> is_updated_;
  std::vector<std::uint32_t> line_start_;
};

}  // namespace

transfer_set trans_ultra(timetable const& tt, trans_ultra_options const& opt) {
  auto const n_threads = std::max(1U, opt.threads_);
  std::vector<std::vector<std::pair<event_idx, event_idx>>> buffers(n_threads);
  std::atomic<std::uint32_t> next{0U};

  auto const work = [&](unsigned const w) {
    ultra_search search{tt};
    for (auto s = next.fetch_add(1U); s < tt.n_stops(); s = next.fetch_add(1U)) {
      search.reset();
      for (auto const dep : candidate_departures(tt, stop_idx{s})) {
        search.run(stop_idx{s}, dep, buffers[w]);
      }
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

  std::vector<std::pair<event_idx, event_idx>> all;
  for (auto& b : buffers) {
    all.insert(end(all), begin(b), end(b));
  }
  return transfer_set::from_pairs(tt, std::move(all));
}

}  // namespace flashtb
