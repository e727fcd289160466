#include <algorithm>
#include <set>

#include "gtest/gtest.h"

#include "flashtb/canonical_profile.h"
#include "flashtb/oracle.h"
#include "flashtb/random_network.h"
#include "test_util.h"

using namespace flashtb;
using namespace flashtb::test;

namespace {

std::vector<std::string> trip_names(timetable const& tt, journey const& j) {
  std::vector<std::string> out;
  for (auto const& l : j.legs_) {
    out.push_back(tt.trips_[l.trip_].id_);
  }
  return out;
}

}  // namespace

TEST(canonical_profile, fig2) {
  auto const tt = load_fixture("fig2-net");
  auto const split = split_transfers(tt, trans_ultra(tt));
  canonical_profile cp{tt, split, {.max_rounds_ = 8U, .trace_ = true}};
  auto const s = stop(tt, "S");
  auto const t = stop(tt, "T");
  auto const out = cp.run_source(s);

  std::vector<canonical_emit> to_t;
  std::copy_if(begin(out), end(out), std::back_inserter(to_t),
               [&](auto const& e) { return e.target_ == t; });
  ASSERT_EQ(to_t.size(), 2U);
  EXPECT_EQ(to_t[0].journey_.departure_, 5);
  EXPECT_EQ(trip_names(tt, to_t[0].journey_),
            (std::vector<std::string>{"T_a", "T_c"}));
  EXPECT_EQ(to_t[1].journey_.departure_, 0);
  EXPECT_EQ(to_t[1].round_, 2U);
  auto const b = trip_by_id(tt, "T_b");
  auto const d = trip_by_id(tt, "T_d");
  EXPECT_EQ(to_t[1].journey_.legs_, (std::vector<leg>{{b, 0, 1}, {d, 0, 1}}));

  // Run 0 accepts (T, 2, 20) although run 5 stored the same arrival.
  auto const& trace = cp.arrival_trace();
  auto const it = std::find_if(begin(trace), end(trace), [&](auto const& e) {
    return e.run_ == 0 && e.stop_ == t && e.round_ == 2U;
  });
  ASSERT_NE(it, end(trace));
  EXPECT_EQ(it->arrival_, 20);
  EXPECT_EQ(it->result_, arrival_result::kAccepted);

  // Round 1 of run 0 holds only T_b: T_a is covered by its predecessor.
  auto const q = std::find_if(begin(cp.queue_log()), end(cp.queue_log()),
                              [](auto const& x) {
                                return x.run_ == 0 && x.round_ == 1U;
                              });
  ASSERT_NE(q, end(cp.queue_log()));
  ASSERT_EQ(q->segments_.size(), 1U);
  EXPECT_EQ(std::get<0>(q->segments_[0]), b);
  EXPECT_EQ(std::get<1>(q->segments_[0]), 1U);
}

TEST(canonical_profile, fig1) {
  auto const tt = load_fixture("fig1-net");
  auto const split = split_transfers(tt, trans_ultra(tt));
  canonical_profile cp{tt, split};
  auto const out = cp.run_source(stop(tt, "A"));
  auto const it = std::find_if(begin(out), end(out), [&](auto const& e) {
    return e.target_ == stop(tt, "F");
  });
  ASSERT_NE(it, end(out));
  EXPECT_EQ(it->journey_.departure_, 0);
  EXPECT_EQ(it->journey_.legs_,
            (std::vector<leg>{{trip_by_id(tt, "T_a"), 0, 1},
                              {trip_by_id(tt, "T_b"), 0, 1}}));
}

TEST(canonical_profile, source_without_departures) {
  auto const tt = load_fixture("fig2-net");
  auto const split = split_transfers(tt, trans_ultra(tt));
  canonical_profile cp{tt, split};
  EXPECT_TRUE(cp.run_source(stop(tt, "T")).empty());
}

TEST(canonical_profile, conditions_and_scan_order) {
  std::set<arrival_result> arrivals;
  std::set<enqueue_result> enqueues;
  for (auto seed = 1U; seed != 11U; ++seed) {
    auto const tt = build_timetable(random_network(seed));
    auto const split = split_transfers(tt, trans_ultra(tt));
    canonical_profile cp{tt, split, {.max_rounds_ = 8U, .trace_ = true}};
    for (auto s = stop_idx{0U}; s != tt.stop_ids_.size_key(); ++s) {
      cp.run_source(s);
    }
    for (auto const& a : cp.arrival_trace()) {
      arrivals.insert(a.result_);
    }
    for (auto const& e : cp.enqueue_log()) {
      enqueues.insert(e.result_);
    }
    for (auto const& q : cp.queue_log()) {
      for (auto i = 1U; i < q.segments_.size(); ++i) {
        auto const rank = [&](auto const& seg) {
          return tt.order_.event_rank_[tt.event(std::get<0>(seg), std::get<1>(seg))];
        };
        EXPECT_LT(rank(q.segments_[i - 1U]), rank(q.segments_[i]));
      }
    }
  }
  EXPECT_EQ(arrivals.size(), 4U);
  // E2b and E2c only trigger on exact ties already covered by propagation.
  EXPECT_TRUE(enqueues.contains(enqueue_result::kAccepted));
  EXPECT_TRUE(enqueues.contains(enqueue_result::kE1));
  EXPECT_TRUE(enqueues.contains(enqueue_result::kE2a));
}

TEST(canonical_profile, equals_oracle_canonical) {
  for (auto seed = 1U; seed != 11U; ++seed) {
    auto const tt = build_timetable(random_network(seed));
    auto const split = split_transfers(tt, trans_ultra(tt));
    oracle o{tt, 8U};
    canonical_profile cp{tt, split, {.max_rounds_ = 8U}};
    for (auto s = stop_idx{0U}; s != tt.stop_ids_.size_key(); ++s) {
      std::set<journey> got;
      std::vector<profile> by_target(tt.n_stops());
      for (auto const& e : cp.run_source(s)) {
        EXPECT_FALSE(check_journey(tt, e.journey_).has_value());
        EXPECT_EQ(e.journey_.to_, e.target_);
        EXPECT_EQ(e.journey_.n_trips(), e.round_);
        got.insert(e.journey_);
        by_target[to_idx(e.target_)].push_back(
            {e.journey_.departure_, e.journey_.arrival_, e.round_});
      }
      auto const ref = o.canonical_from(s);
      EXPECT_EQ(got, std::set<journey>(begin(ref), end(ref))) << "seed " << seed;

      // Emitted cost vectors plus walking cover the full-range profiles.
      for (auto t = stop_idx{0U}; t != tt.stop_ids_.size_key(); ++t) {
        auto const full = o.profile_query(s, t, -kInfinity, kInfinity);
        auto mine = by_target[to_idx(t)];
        for (auto const& e : full) {
          if (e.trips_ == 0U) {
            mine.push_back(e);
          }
        }
        EXPECT_EQ(reduce_profile(mine), reduce_profile(full));
      }
    }
    EXPECT_EQ(canonical_journeys(tt, split, {.max_rounds_ = 8U}, 3U),
              canonical_journeys(tt, split, {.max_rounds_ = 8U}, 1U));
  }
}
