#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "flashtb/journey.h"
#include "flashtb/timetable.h"

namespace flashtb {

struct oracle_budget_exceeded : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exhaustive reference. Arrival values are computed by a backward dynamic
// program per target over all feasible event pairs; journeys are enumerated
// depth-first with exact pruning against those values.
class oracle {
public:
  oracle(timetable const&, std::uint32_t max_trips,
         std::size_t budget = 20'000'000U);
  ~oracle();
  oracle(oracle&&) noexcept;

  std::uint32_t max_trips() const { return max_trips_; }

  // Minimum arrival at t for departure `dep` from s with at most n trips,
  // for n = 0..max_trips.
  std::vector<stime> arrival_by_round(stop_idx s, stop_idx t, stime dep);

  pareto_front pareto(stop_idx s, stop_idx t, stime dep);

  // Every loop-free journey realising a front entry.
  std::vector<journey> representatives(stop_idx s, stop_idx t, stime dep);

  // One journey per front entry: the one with minimal tiebreaking sequence.
  std::vector<journey> canonical(stop_idx s, stop_idx t, stime dep);

  // Fronts for every possible departure time in [from, to], tagged with the
  // departure time (not reduced).
  profile profile_query(stop_idx s, stop_idx t, stime from, stime to);

  // Union of canonical journeys over all possible departure times and all
  // targets. Walk-only journeys are excluded.
  std::vector<journey> canonical_from(stop_idx s);

private:
  struct target_table;
  target_table const& table(stop_idx t);

  std::vector<journey> enumerate(stop_idx s, stop_idx t, stime dep,
                                 cost const&);

  timetable const& tt_;
  std::uint32_t max_trips_;
  std::size_t budget_;
  std::vector<std::unique_ptr<target_table>> tables_;
  // Events per stop sorted by departure time.
  vector_map<stop_idx, std::vector<event_idx>> by_dep_;
};

// Transfers (from event, to event) that occur in some canonical journey for
// any query towards a stop of the given cell, per cell. Cells are 0-based.
std::vector<std::vector<std::pair<event_idx, event_idx>>> oracle_flags(
    timetable const&, std::vector<std::uint32_t> const& cell_of_stop,
    std::uint32_t n_cells, std::uint32_t max_trips);

}  // namespace flashtb
