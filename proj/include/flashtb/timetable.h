#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "flashtb/types.h"

namespace flashtb {

// Entities as read from an input source, before line grouping, footpath
// closure or canonical renumbering. Stops and trips are sorted by external id.
struct raw_event {
  std::uint32_t stop_{};
  stime arr_{};
  stime dep_{};
};

struct raw_trip {
  std::string id_;
  std::vector<raw_event> events_;
};

struct raw_footpath {
  std::uint32_t from_{};
  std::uint32_t to_{};
  stime duration_{};
};

struct raw_timetable {
  std::vector<std::string> stops_;
  std::vector<raw_trip> trips_;
  std::vector<raw_footpath> footpaths_;
};

struct stop_event {
  stop_idx stop_;
  stime arr_{};
  stime dep_{};
  trip_idx trip_;
  std::uint16_t pos_{};
};

struct trip {
  event_idx first_;
  std::uint16_t size_{};
  line_idx line_;
  std::string id_;
};

// Trips of a line occupy the contiguous range [first_trip_, first_trip_ +
// n_trips_) in precedence order.
struct line {
  std::vector<stop_idx> stops_;
  trip_idx first_trip_;
  std::uint32_t n_trips_{};
};

struct line_visit {
  line_idx line_;
  std::uint16_t pos_{};
};

// Directed footpaths in CSR form. Every stop has its empty footpath (p,p,0).
// Rows are sorted by target stop.
struct footpath_set {
  struct edge {
    stop_idx to_;
    stime duration_;
  };

  std::span<edge const> out(stop_idx p) const {
    return {out_.data() + out_offsets_[to_idx(p)],
            out_.data() + out_offsets_[to_idx(p) + 1]};
  }
  std::span<edge const> in(stop_idx p) const {
    return {in_.data() + in_offsets_[to_idx(p)],
            in_.data() + in_offsets_[to_idx(p) + 1]};
  }

  // kInfinity if there is no footpath.
  stime duration(stop_idx from, stop_idx to) const;

  std::size_t n_stops() const {
    return out_offsets_.empty() ? 0U : out_offsets_.size() - 1U;
  }
  // Number of footpaths excluding the empty ones.
  std::size_t n_non_empty() const;

  static footpath_set from_edges(std::size_t n_stops,
                                 std::vector<raw_footpath> edges);

  bool operator==(footpath_set const&) const = default;

  std::vector<std::uint32_t> out_offsets_;
  std::vector<edge> out_;
  std::vector<std::uint32_t> in_offsets_;
  std::vector<edge> in_;
};

inline bool operator==(footpath_set::edge const& a,
                       footpath_set::edge const& b) {
  return a.to_ == b.to_ && a.duration_ == b.duration_;
}

// Ranks used by canonical tiebreaking.
struct orderings {
  vector_map<line_idx, std::uint32_t> line_rank_;
  vector_map<stop_idx, std::uint32_t> stop_rank_;
  vector_map<event_idx, std::uint32_t> event_rank_;

  bool operator==(orderings const&) const = default;
};

struct timetable {
  std::size_t n_stops() const { return stop_ids_.size(); }
  std::size_t n_events() const { return events_.size(); }
  std::size_t n_trips() const { return trips_.size(); }
  std::size_t n_lines() const { return lines_.size(); }

  event_idx event(trip_idx t, std::uint32_t pos) const {
    return trips_[t].first_ + pos;
  }
  stop_event const& ev(trip_idx t, std::uint32_t pos) const {
    return events_[event(t, pos)];
  }
  stime arr(trip_idx t, std::uint32_t pos) const { return ev(t, pos).arr_; }
  stime dep(trip_idx t, std::uint32_t pos) const { return ev(t, pos).dep_; }
  stop_idx stop(trip_idx t, std::uint32_t pos) const {
    return ev(t, pos).stop_;
  }
  std::uint16_t size(trip_idx t) const { return trips_[t].size_; }
  line_idx line_of(trip_idx t) const { return trips_[t].line_; }

  trip_idx line_end(trip_idx t) const {
    auto const& l = lines_[trips_[t].line_];
    return l.first_trip_ + l.n_trips_;
  }
  // Predecessor under precedence, invalid for the first trip of a line.
  trip_idx pred(trip_idx t) const {
    return lines_[trips_[t].line_].first_trip_ == t ? trip_idx::invalid()
                                                    : t - 1U;
  }

  // Earliest trip of the line that departs at position pos no earlier than
  // `earliest`; invalid if none.
  trip_idx earliest_trip(line_idx l, std::uint32_t pos, stime earliest) const;

  stime transfer_time(stop_idx from, stop_idx to) const {
    return footpaths_.duration(from, to);
  }

  stop_idx find_stop(std::string_view external_id) const;

  vector_map<stop_idx, std::string> stop_ids_;
  vector_map<event_idx, stop_event> events_;
  vector_map<trip_idx, trip> trips_;
  vector_map<line_idx, line> lines_;
  vector_map<stop_idx, std::vector<line_visit>> stop_lines_;
  footpath_set footpaths_;
  orderings order_;
};

// GTFS subset: stops.txt, trips.txt, stop_times.txt, transfers.txt.
raw_timetable parse_gtfs(std::filesystem::path const& dir);

// Greedy grouping of trips into non-overtaking lines. Returns, per line, the
// indices into `trips` in precedence order.
std::vector<std::vector<std::uint32_t>> build_lines(
    std::vector<raw_trip> const& trips);

// True iff b may follow a on the same line without overtaking.
bool precedes_strictly(raw_trip const& a, raw_trip const& b);

struct closure_options {
  std::size_t max_component_size_{1000U};
};

// Min-plus transitive closure with empty footpaths added.
footpath_set close_footpaths(std::size_t n_stops,
                             std::vector<raw_footpath> const& footpaths,
                             closure_options const& = {});

orderings assign_orderings(timetable const&);

// Groups lines, closes footpaths and renumbers entities so that all indices
// coincide with their canonical ranks.
timetable build_timetable(raw_timetable const&, closure_options const& = {});

// One message per invariant violation; empty if the timetable is valid.
std::vector<std::string> validate_timetable(timetable const&);

// Native binary container ("FTTB").
std::vector<std::uint8_t> serialize(timetable const&);
timetable deserialize_timetable(std::span<std::uint8_t const>);
void write_timetable(timetable const&, std::filesystem::path const&);
timetable read_timetable(std::filesystem::path const&);

// FNV-1a over the native encoding.
std::uint64_t content_hash(timetable const&);

// Loads either a GTFS directory or a native file.
timetable load_timetable(std::filesystem::path const&);

// Departure times at s for which some trip can be boarded exactly on time
// after the initial footpath, within [from, to], in descending order.
std::vector<stime> possible_departures(timetable const&, stop_idx s,
                                       stime from = -kInfinity,
                                       stime to = kInfinity);

// Departure times at which a trip leaves s itself (no initial footpath),
// descending.
std::vector<stime> candidate_departures(timetable const&, stop_idx s);

}  // namespace flashtb
