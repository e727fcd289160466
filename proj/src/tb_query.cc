#include "flashtb/tb_query.h"

namespace flashtb {

tb_result tb_query(timetable const& tt, transfer_set const& ts,
                   stop_idx const s, stop_idx const t, stime const dep,
                   tb_options const& opt) {
  tb_engine<> engine{tt, ts, opt};
  return engine.query(s, t, dep);
}

pareto_front one_to_all_result::front(stop_idx const p) const {
  std::vector<stime> by_round;
  for (auto const& round : arrival_) {
    by_round.push_back(round[to_idx(p)]);
  }
  return front_from_rounds(by_round);
}

one_to_all_result one_to_all_query(timetable const& tt,
                                   transfer_set const& ts, stop_idx const s,
                                   stime const dep, tb_options const& opt) {
  profile_engine<> engine{tt, ts, stop_idx::invalid(), opt};
  engine.run(s, dep);
  one_to_all_result res;
  res.arrival_.resize(opt.max_rounds_ + 1U);
  for (auto n = 0U; n <= opt.max_rounds_; ++n) {
    for (auto p = stop_idx{0U}; p != tt.stop_ids_.size_key(); ++p) {
      res.arrival_[n].push_back(engine.arrival(p, n));
    }
  }
  return res;
}

profile profile_query_tb(timetable const& tt, transfer_set const& ts,
                         stop_idx const s, stop_idx const t, stime const from,
                         stime const to, tb_options const& opt) {
  profile_engine<> engine{tt, ts, t, opt};
  profile out;
  for (auto const dep : possible_departures(tt, s, from, to)) {
    for (auto const& [stop, entry] : engine.run(s, dep)) {
      out.push_back(entry);
    }
  }
  return reduce_profile(std::move(out));
}

std::vector<profile> profile_query_tb_all(timetable const& tt,
                                          transfer_set const& ts,
                                          stop_idx const s, stime const from,
                                          stime const to,
                                          tb_options const& opt) {
  profile_engine<> engine{tt, ts, stop_idx::invalid(), opt};
  std::vector<profile> out(tt.n_stops());
  for (auto const dep : possible_departures(tt, s, from, to)) {
    for (auto const& [stop, entry] : engine.run(s, dep)) {
      out[to_idx(stop)].push_back(entry);
    }
  }
  for (auto& p : out) {
    p = reduce_profile(std::move(p));
  }
  return out;
}

}  // namespace flashtb
