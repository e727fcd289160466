#pragma once

#include "flashtb/flags.h"
#include "flashtb/partition.h"
#include "flashtb/tb_query.h"

namespace flashtb {

// Throws validation_error if the flag store was not built for these
// artifacts (shape and partition hash; the transfer-set hash is only checked
// when `check_transfers_hash` is set since it requires a full encoding).
void check_flag_artifacts(timetable const&, transfer_set const&,
                          flag_metadata const&, std::uint32_t k,
                          std::uint32_t n_transfers, partition const&,
                          bool check_transfers_hash = false);

// TB restricted to transfers flagged for the target's cell.
template <typename Store>
class flash_engine {
public:
  using row = typename Store::row;

  flash_engine(timetable const& tt, transfer_set const& ts, Store const& flags,
               partition const& part, tb_options opt = {})
      : tt_{tt},
        ts_{ts},
        flags_{flags},
        part_{part},
        opt_{opt},
        engine_{tt, ts, opt} {
    check_flag_artifacts(tt, ts, flags.meta_, flags.k_, flags.n_transfers_,
                         part);
  }

  tb_result query(stop_idx const s, stop_idx const t, stime const dep) {
    return engine_.query(s, t, dep, flags_.cell_row(part_.cell(t)));
  }

  // Reduced profile over all possible departures in [from, to].
  profile profile_query(stop_idx const s, stop_idx const t, stime const from,
                        stime const to) {
    profile_engine<row> engine{tt_, ts_, t, opt_};
    auto const filter = flags_.cell_row(part_.cell(t));
    profile out;
    for (auto const dep : possible_departures(tt_, s, from, to)) {
      for (auto const& [stop, entry] : engine.run(s, dep, filter)) {
        out.push_back(entry);
      }
    }
    profile_stats_ = engine.stats();
    return reduce_profile(std::move(out));
  }

  tb_stats const& stats() const { return engine_.stats(); }
  tb_stats const& profile_stats() const { return profile_stats_; }
  std::vector<std::uint32_t> const& scanned_log() const {
    return engine_.scanned_log();
  }
  std::uint64_t physical_resets() const { return engine_.physical_resets(); }

private:
  timetable const& tt_;
  transfer_set const& ts_;
  Store const& flags_;
  partition const& part_;
  tb_options opt_;
  tb_engine<row> engine_;
  tb_stats profile_stats_;
};

template <typename Store>
tb_result flash_query(timetable const& tt, transfer_set const& ts,
                      Store const& flags, partition const& part,
                      stop_idx const s, stop_idx const t, stime const dep,
                      tb_options const& opt = {}) {
  return flash_engine<Store>{tt, ts, flags, part, opt}.query(s, t, dep);
}

template <typename Store>
profile flash_profile_query(timetable const& tt, transfer_set const& ts,
                            Store const& flags, partition const& part,
                            stop_idx const s, stop_idx const t,
                            stime const from, stime const to,
                            tb_options const& opt = {}) {
  return flash_engine<Store>{tt, ts, flags, part, opt}.profile_query(s, t, from,
                                                                     to);
}

}  // namespace flashtb
