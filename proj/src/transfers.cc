#include "flashtb/hash.h"
#include "flashtb/transfers.h"

#include <algorithm>

#include "binary_io.h"

namespace flashtb {

std::uint32_t transfer_set::find(event_idx const from,
                                 event_idx const to) const {
  for (auto k = begin_of(from); k != end_of(from); ++k) {
    if (targets_[k].to_ == to) {
      return k;
    }
  }
  return static_cast<std::uint32_t>(size());
}

std::vector<std::pair<event_idx, event_idx>> transfer_set::pairs() const {
  std::vector<std::pair<event_idx, event_idx>> res;
  for (auto e = 0U; e != n_events(); ++e) {
    for (auto const& t : out(event_idx{e})) {
      res.emplace_back(event_idx{e}, t.to_);
    }
  }
  return res;
}

event_idx transfer_set::source(std::uint32_t const pos) const {
  auto const it = std::upper_bound(begin(offsets_), end(offsets_), pos);
  return event_idx{static_cast<std::uint32_t>(it - begin(offsets_) - 1)};
}

transfer_set transfer_set::from_pairs(
    timetable const& tt, std::vector<std::pair<event_idx, event_idx>> pairs) {
  auto const& rank = tt.order_.event_rank_;
  std::sort(begin(pairs), end(pairs), [&](auto const& a, auto const& b) {
    return std::make_pair(a.first, rank[a.second]) <
           std::make_pair(b.first, rank[b.second]);
  });
  pairs.erase(std::unique(begin(pairs), end(pairs)), end(pairs));

  transfer_set ts;
  ts.offsets_.assign(tt.n_events() + 1U, 0U);
  for (auto const& [from, to] : pairs) {
    ++ts.offsets_[to_idx(from) + 1U];
  }
  for (auto i = 1U; i < ts.offsets_.size(); ++i) {
    ts.offsets_[i] += ts.offsets_[i - 1U];
  }
  for (auto const& [from, to] : pairs) {
    auto const& a = tt.events_[from];
    auto const& b = tt.events_[to];
    ts.targets_.push_back({to, a.arr_ + tt.transfer_time(a.stop_, b.stop_)});
  }
  return ts;
}

namespace {

// T_a[i] precedes-or-equals T_b[j] on the same line.
bool weakly_precedes(timetable const& tt, event_idx const a,
                     event_idx const b) {
  auto const& ea = tt.events_[a];
  auto const& eb = tt.events_[b];
  return tt.line_of(ea.trip_) == tt.line_of(eb.trip_) &&
         ea.trip_ <= eb.trip_ && ea.pos_ <= eb.pos_;
}

template <typename Pred>
transfer_set filter(timetable const& tt, transfer_set const& ts,
                    Pred&& keep) {
  std::vector<std::pair<event_idx, event_idx>> kept;
  for (auto e = event_idx{0U}; e != tt.events_.size_key(); ++e) {
    for (auto const& t : ts.out(e)) {
      if (keep(e, t.to_)) {
        kept.emplace_back(e, t.to_);
      }
    }
  }
  return transfer_set::from_pairs(tt, std::move(kept));
}

}  // namespace

transfer_set generate_transfers(timetable const& tt) {
  std::vector<std::pair<event_idx, event_idx>> pairs;
  for (auto e = event_idx{0U}; e != tt.events_.size_key(); ++e) {
    auto const& ea = tt.events_[e];
    if (ea.pos_ == 0U) {
      continue;
    }
    for (auto const& f : tt.footpaths_.out(ea.stop_)) {
      for (auto const& v : tt.stop_lines_[f.to_]) {
        if (v.pos_ + 1U >= tt.lines_[v.line_].stops_.size()) {
          continue;
        }
        auto const tb = tt.earliest_trip(v.line_, v.pos_, ea.arr_ + f.duration_);
        if (!tb.valid()) {
          continue;
        }
        auto const target = tt.event(tb, v.pos_);
        if (weakly_precedes(tt, e, target)) {
          continue;
        }
        pairs.emplace_back(e, target);
      }
    }
  }
  return transfer_set::from_pairs(tt, std::move(pairs));
}

transfer_set reduce_uturn(timetable const& tt, transfer_set const& ts) {
  return filter(tt, ts, [&](event_idx const from, event_idx const to) {
    auto const& a = tt.events_[from];
    auto const& b = tt.events_[to];
    if (a.pos_ == 0U || b.pos_ + 1U >= tt.size(b.trip_)) {
      return true;
    }
    auto const& prev = tt.ev(a.trip_, a.pos_ - 1U);
    auto const& next = tt.ev(b.trip_, b.pos_ + 1U);
    return !(prev.stop_ == next.stop_ && prev.arr_ <= next.arr_);
  });
}

transfer_set reduce_latest_exit(timetable const& tt, transfer_set const& ts) {
  // best[q]: earliest arrival at q over journeys that exit the current trip
  // after the event under consideration, take one more trip, and walk.
  std::vector<stime> best(tt.n_stops(), kInfinity);
  std::vector<std::uint32_t> touched;
  std::vector<std::pair<event_idx, event_idx>> kept;

  for (auto ta = trip_idx{0U}; ta != tt.trips_.size_key(); ++ta) {
    for (auto i = tt.size(ta); i-- > 1U;) {
      auto const e = tt.event(ta, i);
      for (auto const& t : ts.out(e)) {
        auto const& b = tt.events_[t.to_];
        auto useful = false;
        for (auto l = b.pos_ + 1U; l < tt.size(b.trip_); ++l) {
          auto const& el = tt.ev(b.trip_, l);
          if (el.arr_ < best[to_idx(el.stop_)]) {
            useful = true;
            break;
          }
        }
        if (useful) {
          kept.emplace_back(e, t.to_);
        }
      }
      for (auto const& t : ts.out(e)) {
        auto const& c = tt.events_[t.to_];
        for (auto l = c.pos_ + 1U; l < tt.size(c.trip_); ++l) {
          auto const& el = tt.ev(c.trip_, l);
          for (auto const& f : tt.footpaths_.out(el.stop_)) {
            auto& slot = best[to_idx(f.to_)];
            if (el.arr_ + f.duration_ < slot) {
              if (slot == kInfinity) {
                touched.push_back(to_idx(f.to_));
              }
              slot = el.arr_ + f.duration_;
            }
          }
        }
      }
    }
    for (auto const q : touched) {
      best[q] = kInfinity;
    }
    touched.clear();
  }
  return transfer_set::from_pairs(tt, std::move(kept));
}

transfer_set tb_transfers(timetable const& tt) {
  return reduce_latest_exit(tt, reduce_uturn(tt, generate_transfers(tt)));
}

split_transfer_set split_transfers(timetable const& tt,
                                   transfer_set const& ts) {
  split_transfer_set out;
  for (auto* part : {&out.same_stop_, &out.footpath_}) {
    part->offsets_.assign(ts.offsets_.size(), 0U);
  }
  for (auto e = event_idx{0U}; e != tt.events_.size_key(); ++e) {
    for (auto k = ts.begin_of(e); k != ts.end_of(e); ++k) {
      auto const& t = ts.targets_[k];
      auto& part = tt.events_[e].stop_ == tt.events_[t.to_].stop_
                       ? out.same_stop_
                       : out.footpath_;
      part.targets_.push_back(t);
      part.ids_.push_back(ts.id(k));
      ++part.offsets_[to_idx(e) + 1U];
    }
  }
  for (auto* part : {&out.same_stop_, &out.footpath_}) {
    for (auto i = 1U; i < part->offsets_.size(); ++i) {
      part->offsets_[i] += part->offsets_[i - 1U];
    }
  }
  return out;
}

namespace {

constexpr std::uint16_t kTransferVersion = 1U;

}  // namespace

std::vector<std::uint8_t> serialize(transfer_set const& ts,
                                    std::uint64_t const timetable_hash) {
  detail::writer w;
  w.put_magic("FTTS");
  w.put(kTransferVersion);
  w.put(timetable_hash);
  w.put(static_cast<std::uint32_t>(ts.n_events()));
  w.put(static_cast<std::uint32_t>(ts.size()));
  for (auto e = 0U; e != ts.n_events(); ++e) {
    for (auto const& t : ts.out(event_idx{e})) {
      w.put(e);
      w.put(to_idx(t.to_));
      w.put(t.walk_arrival_);
    }
  }
  return std::move(w.buf_);
}

transfer_set deserialize_transfers(timetable const& tt,
                                   std::span<std::uint8_t const> data,
                                   std::uint64_t const expected_hash) {
  detail::reader r{data, "transfers"};
  r.expect_magic("FTTS");
  if (auto const v = r.get<std::uint16_t>(); v != kTransferVersion) {
    throw format_error{"transfers: unsupported version " + std::to_string(v)};
  }
  if (r.get<std::uint64_t>() != expected_hash) {
    throw validation_error{"transfers: timetable hash mismatch"};
  }
  if (r.get<std::uint32_t>() != tt.n_events()) {
    throw validation_error{"transfers: event count mismatch"};
  }
  auto const n = r.get_count(12U);
  std::vector<std::pair<event_idx, event_idx>> pairs;
  std::vector<stime> walk;
  for (auto i = 0U; i != n; ++i) {
    auto const from = r.get<std::uint32_t>();
    auto const to = r.get<std::uint32_t>();
    walk.push_back(r.get<std::int32_t>());
    if (from >= tt.n_events() || to >= tt.n_events()) {
      throw format_error{"transfers: event out of range"};
    }
    pairs.emplace_back(event_idx{from}, event_idx{to});
  }
  r.expect_end();
  auto ts = transfer_set::from_pairs(tt, pairs);
  if (ts.pairs() != pairs) {
    throw format_error{"transfers: entries not in canonical order"};
  }
  for (auto i = 0U; i != n; ++i) {
    if (ts.targets_[i].walk_arrival_ != walk[i]) {
      throw format_error{"transfers: walk arrival mismatch"};
    }
    if (walk[i] > tt.events_[pairs[i].second].dep_) {
      throw validation_error{"transfers: infeasible transfer"};
    }
  }
  return ts;
}

void write_transfers(transfer_set const& ts, std::uint64_t const hash,
                     std::filesystem::path const& p) {
  detail::write_file(p, serialize(ts, hash));
}

transfer_set read_transfers(timetable const& tt,
                            std::filesystem::path const& p,
                            std::uint64_t const expected_hash) {
  return deserialize_transfers(tt, detail::read_file(p), expected_hash);
}

std::uint64_t content_hash(transfer_set const& ts) {
  return fnv1a(serialize(ts, 0U));
}

}  // namespace flashtb
