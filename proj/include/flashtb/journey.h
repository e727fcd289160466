#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flashtb/timetable.h"

namespace flashtb {

struct leg {
  trip_idx trip_;
  std::uint16_t enter_{};
  std::uint16_t exit_{};

  bool operator==(leg const&) const = default;
  auto operator<=>(leg const&) const = default;
};

// Initial footpath, trip segments, final footpath. Footpaths between legs are
// implied by the stops of the exit and entry events.
struct journey {
  std::size_t n_trips() const { return legs_.size(); }

  bool operator==(journey const&) const = default;
  auto operator<=>(journey const&) const = default;

  stop_idx from_;
  stop_idx to_;
  stime departure_{};
  stime arrival_{};
  std::vector<leg> legs_;
};

// Fills departure and arrival from the legs. For walk-only journeys the
// departure is `walk_departure`.
journey make_journey(timetable const&, stop_idx from, stop_idx to,
                     std::vector<leg> legs, stime walk_departure = 0);

// Stop sequence with stops joined by empty footpaths merged.
std::vector<stop_idx> stop_sequence(timetable const&, journey const&);

// Empty if feasible, otherwise the first violated condition.
std::optional<std::string> check_journey(timetable const&, journey const&);

std::string to_string(timetable const&, journey const&);

struct cost {
  stime arrival_{};
  std::uint32_t trips_{};

  bool operator==(cost const&) const = default;
  auto operator<=>(cost const&) const = default;
};

// Sorted by trips ascending, arrivals strictly decreasing.
using pareto_front = std::vector<cost>;

// Reduces arbitrary cost vectors to their Pareto front.
pareto_front make_front(std::vector<cost>);

// Front from per-round arrival times: entry n kept iff arr[n] < arr[n-1].
pareto_front front_from_rounds(std::vector<stime> const& arrival_by_round);

struct profile_entry {
  stime departure_{};
  stime arrival_{};
  std::uint32_t trips_{};

  bool operator==(profile_entry const&) const = default;
  auto operator<=>(profile_entry const&) const = default;
};

using profile = std::vector<profile_entry>;

// Pareto set under (later departure, earlier arrival, fewer trips), sorted.
profile reduce_profile(profile);

// Tiebreaking sequence values. Shorter sequences compare as if padded with
// kMinusInf.
using tiebreak_seq = std::vector<std::int64_t>;
constexpr std::int64_t kPlusInf = std::numeric_limits<std::int64_t>::max();
constexpr std::int64_t kMinusInf = std::numeric_limits<std::int64_t>::min();

tiebreak_seq tiebreak_global(timetable const&, journey const&);
std::strong_ordering compare_tiebreak(tiebreak_seq const&,
                                      tiebreak_seq const&);

}  // namespace flashtb
