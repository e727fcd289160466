#include "gtest/gtest.h"

#include "flashtb/hash.h"
#include "flashtb/oracle.h"
#include "flashtb/random_network.h"
#include "flashtb/tb_query.h"
#include "flashtb/transfers.h"
#include "test_util.h"

using namespace flashtb;
using namespace flashtb::test;

using names_t = std::set<std::string>;

namespace {

raw_timetable uturn_network() {
  raw_timetable raw;
  raw.stops_ = {"A", "B", "X", "Y"};
  raw.trips_ = {{"T_a", {{2, 0, 0}, {0, 60, 60}, {1, 120, 120}}},
                {"T_b", {{1, 180, 180}, {0, 240, 240}, {3, 300, 300}}}};
  return raw;
}

}  // namespace

TEST(transfers, generate_fixtures) {
  auto const fig1 = load_fixture("fig1-net");
  EXPECT_EQ(names(fig1, generate_transfers(fig1)),
            (names_t{"T_a[1]>T_b[0]", "T_a[2]>T_b[0]"}));
  auto const fig2 = load_fixture("fig2-net");
  EXPECT_EQ(names(fig2, generate_transfers(fig2)),
            (names_t{"T_a[1]>T_c[0]", "T_b[1]>T_c[0]", "T_b[1]>T_d[0]"}));
}

TEST(transfers, single_line_has_none) {
  raw_timetable raw;
  raw.stops_ = {"A", "B", "C"};
  for (auto i = 0; i != 4; ++i) {
    auto const t0 = i * 600;
    raw.trips_.push_back({"t" + std::to_string(i),
                          {{0, t0, t0}, {1, t0 + 60, t0 + 60}, {2, t0 + 120, t0 + 120}}});
  }
  auto const tt = build_timetable(raw);
  EXPECT_EQ(generate_transfers(tt).size(), 0U);
}

TEST(transfers, generated_constraints) {
  for (auto seed = 1U; seed != 11U; ++seed) {
    auto const tt = build_timetable(random_network(seed));
    auto const ts = generate_transfers(tt);
    for (auto e = event_idx{0U}; e != tt.events_.size_key(); ++e) {
      auto const& from = tt.events_[e];
      stime prev_rank = -1;
      for (auto const& t : ts.out(e)) {
        auto const& to = tt.events_[t.to_];
        EXPECT_GT(from.pos_, 0U);
        EXPECT_LT(to.pos_ + 1U, tt.size(to.trip_));
        EXPECT_EQ(t.walk_arrival_,
                  from.arr_ + tt.transfer_time(from.stop_, to.stop_));
        EXPECT_LE(t.walk_arrival_, to.dep_);
        EXPECT_FALSE(tt.line_of(from.trip_) == tt.line_of(to.trip_) &&
                     to.trip_ >= from.trip_ && to.pos_ >= from.pos_);
        auto const rank = static_cast<stime>(tt.order_.event_rank_[t.to_]);
        EXPECT_LT(prev_rank, rank);
        prev_rank = rank;
      }
    }
  }
}

TEST(transfers, uturn) {
  auto const tt = build_timetable(uturn_network());
  auto const gen = generate_transfers(tt);
  EXPECT_EQ(names(tt, gen), (names_t{"T_a[1]>T_b[1]", "T_a[2]>T_b[0]"}));
  auto const reduced = reduce_uturn(tt, gen);
  EXPECT_EQ(names(tt, reduced), (names_t{"T_a[1]>T_b[1]"}));

  oracle o{tt, 8U};
  for (auto s = stop_idx{0U}; s != tt.stop_ids_.size_key(); ++s) {
    for (auto const dep : possible_departures(tt, s)) {
      for (auto t = stop_idx{0U}; t != tt.stop_ids_.size_key(); ++t) {
        EXPECT_EQ(tb_query(tt, reduced, s, t, dep).front_, o.pareto(s, t, dep));
      }
    }
  }

  auto const fig1 = load_fixture("fig1-net");
  auto const g1 = generate_transfers(fig1);
  EXPECT_EQ(reduce_uturn(fig1, g1), g1);
}

TEST(transfers, latest_exit) {
  auto const fig1 = load_fixture("fig1-net");
  EXPECT_EQ(names(fig1, tb_transfers(fig1)), (names_t{"T_a[2]>T_b[0]"}));
  auto const fig2 = load_fixture("fig2-net");
  auto const g2 = reduce_uturn(fig2, generate_transfers(fig2));
  EXPECT_EQ(reduce_latest_exit(fig2, g2), g2);

  for (auto const* name : {"fig1-net", "fig2-net", "fig3-net"}) {
    auto const tt = load_fixture(name);
    auto const ts = tb_transfers(tt);
    oracle o{tt, 8U};
    for (auto s = stop_idx{0U}; s != tt.stop_ids_.size_key(); ++s) {
      for (auto const dep : possible_departures(tt, s)) {
        for (auto t = stop_idx{0U}; t != tt.stop_ids_.size_key(); ++t) {
          EXPECT_EQ(tb_query(tt, ts, s, t, dep).front_, o.pareto(s, t, dep))
              << name;
        }
      }
    }
  }
}

TEST(transfers, trans_ultra_fixtures) {
  auto const fig1 = load_fixture("fig1-net");
  EXPECT_EQ(names(fig1, trans_ultra(fig1)), (names_t{"T_a[1]>T_b[0]"}));
  auto const fig2 = load_fixture("fig2-net");
  EXPECT_EQ(names(fig2, trans_ultra(fig2)),
            (names_t{"T_a[1]>T_c[0]", "T_b[1]>T_d[0]"}));
}

TEST(transfers, trans_ultra_random) {
  for (auto seed = 1U; seed != 11U; ++seed) {
    auto const tt = build_timetable(random_network(seed));
    auto const ultra = trans_ultra(tt);
    auto const gen = generate_transfers(tt);
    for (auto const& [a, b] : ultra.pairs()) {
      EXPECT_TRUE(gen.contains(a, b));
    }
    EXPECT_EQ(trans_ultra(tt, {.threads_ = 3U}), ultra);

    oracle o{tt, 8U};
    auto const opt = tb_options{.max_rounds_ = 8U};
    for (auto s = stop_idx{0U}; s != tt.stop_ids_.size_key(); ++s) {
      for (auto const dep : possible_departures(tt, s)) {
        auto const all = one_to_all_query(tt, ultra, s, dep, opt);
        for (auto t = stop_idx{0U}; t != tt.stop_ids_.size_key(); ++t) {
          EXPECT_EQ(all.front(t), o.pareto(s, t, dep));
        }
      }
    }
  }
}

TEST(transfers, split) {
  auto const fig1 = load_fixture("fig1-net");
  auto const split = split_transfers(fig1, trans_ultra(fig1));
  EXPECT_EQ(split.same_stop_.size(), 0U);
  EXPECT_EQ(names(fig1, split.footpath_), (names_t{"T_a[1]>T_b[0]"}));

  for (auto seed = 1U; seed != 6U; ++seed) {
    auto const tt = build_timetable(random_network(seed));
    auto const ts = generate_transfers(tt);
    auto const sp = split_transfers(tt, ts);
    EXPECT_EQ(sp.same_stop_.size() + sp.footpath_.size(), ts.size());
    for (auto e = event_idx{0U}; e != tt.events_.size_key(); ++e) {
      for (auto k = sp.same_stop_.begin_of(e); k != sp.same_stop_.end_of(e); ++k) {
        auto const to = sp.same_stop_.targets_[k].to_;
        EXPECT_EQ(tt.events_[e].stop_, tt.events_[to].stop_);
        EXPECT_EQ(ts.find(e, to), to_idx(sp.same_stop_.id(k)));
      }
      for (auto k = sp.footpath_.begin_of(e); k != sp.footpath_.end_of(e); ++k) {
        auto const to = sp.footpath_.targets_[k].to_;
        EXPECT_NE(tt.events_[e].stop_, tt.events_[to].stop_);
        EXPECT_EQ(ts.find(e, to), to_idx(sp.footpath_.id(k)));
      }
    }
  }
}

TEST(transfers, serialization) {
  auto const tt = build_timetable(random_network(4));
  auto const ts = trans_ultra(tt);
  auto const h = content_hash(tt);
  auto const bytes = serialize(ts, h);
  EXPECT_EQ(deserialize_transfers(tt, bytes, h), ts);
  EXPECT_THROW(deserialize_transfers(tt, bytes, h + 1U), validation_error);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(deserialize_transfers(tt, truncated, h), format_error);

  temp_dir d;
  write_transfers(ts, h, d.path_ / "ts.ftts");
  EXPECT_EQ(read_transfers(tt, d.path_ / "ts.ftts", h), ts);
}
