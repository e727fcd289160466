#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "flashtb/journey.h"
#include "flashtb/tb_query.h"
#include "flashtb/timetable.h"
#include "flashtb/transfers.h"

namespace flashtb {

struct canonical_options {
  std::uint32_t max_rounds_{kDefaultMaxRounds};
  bool trace_{false};
};

struct canonical_emit {
  stop_idx target_;
  std::uint32_t round_{};
  journey journey_;

  bool operator==(canonical_emit const&) const = default;
};

enum class arrival_result : std::uint8_t { kAccepted, kT1, kT2a, kT2b };
enum class enqueue_result : std::uint8_t { kAccepted, kE1, kE2a, kE2b, kE2c };

struct add_arrival_trace {
  stime run_{};
  std::uint32_t round_{};
  stop_idx stop_;
  stime arrival_{};
  arrival_result result_{};
};

struct enqueue_trace {
  stime run_{};
  std::uint32_t round_{};
  trip_idx trip_;
  std::uint32_t index_{};
  enqueue_result result_{};
};

struct queue_trace {
  stime run_{};
  std::uint32_t round_{};
  // (trip, first index, last index) in scan order.
  std::vector<std::tuple<trip_idx, std::uint32_t, std::uint32_t>> segments_;
};

// Canonical one-to-all Profile-TB over a canonicity-preserving transfer set.
// Every run unpacks the journeys whose labels it set.
class canonical_profile {
public:
  using sink_t = std::function<void(canonical_emit const&)>;

  canonical_profile(timetable const&, split_transfer_set const&,
                    canonical_options = {});

  // All runs from s, in descending order of departure time.
  void run_source(stop_idx s, sink_t const&);
  std::vector<canonical_emit> run_source(stop_idx s);

  std::vector<add_arrival_trace> const& arrival_trace() const {
    return arrival_trace_;
  }
  std::vector<enqueue_trace> const& enqueue_log() const { return enqueue_trace_; }
  std::vector<queue_trace> const& queue_log() const { return queue_trace_; }

private:
  struct segment {
    trip_idx trip_;
    std::uint16_t from_{};
    std::uint16_t to_{};
  };
  struct stop_parent {
    trip_idx trip_;
    std::uint16_t enter_{};
    std::uint16_t exit_{};
  };

  void reset_source();
  void run(stime dep, sink_t const&);
  void scan(std::uint32_t n);
  arrival_result add_arrival(stop_idx, std::uint32_t n, stime arr, trip_idx,
                             std::uint32_t i);
  enqueue_result enqueue(trip_idx, std::uint32_t j, std::uint32_t n, stop_idx);
  journey unpack(stop_idx, std::uint32_t n) const;

  timetable const& tt_;
  split_transfer_set const& ts_;
  canonical_options opt_;

  stop_idx source_;
  stime dep_{};
  std::vector<std::vector<stime>> arr_;
  std::vector<std::vector<stime>> dep_label_;
  std::vector<std::vector<stop_parent>> stop_parent_;
  std::vector<std::vector<stop_idx>> trip_parent_;
  std::vector<std::vector<std::uint16_t>> reached_;
  std::vector<std::uint16_t> reached_run_;
  std::vector<std::vector<segment>> queues_;

  // Pairs (p, n) set in the current run, with the label before the run.
  std::vector<std::vector<bool>> is_dirty_;
  std::vector<std::tuple<std::uint32_t, std::uint32_t, stime>> dirty_;
  // Smallest tiebreaking sequence emitted for the current label value.
  std::vector<std::vector<tiebreak_seq>> best_x_;

  std::vector<add_arrival_trace> arrival_trace_;
  std::vector<enqueue_trace> enqueue_trace_;
  std::vector<queue_trace> queue_trace_;
};

// Emitted journeys of all sources, in parallel.
std::vector<canonical_emit> canonical_journeys(timetable const&,
                                               split_transfer_set const&,
                                               canonical_options const& = {},
                                               unsigned threads = 1U);

}  // namespace flashtb
