#include <algorithm>
#include <fstream>
#include <map>
#include <random>

#include "gtest/gtest.h"

#include "flashtb/random_network.h"
#include "flashtb/timetable.h"
#include "test_util.h"

using namespace flashtb;
using namespace flashtb::test;

namespace {

void write(std::filesystem::path const& p, std::string const& s) {
  std::ofstream{p} << s;
}

// Minimal GTFS directory with the given stop_times body.
std::filesystem::path gtfs_dir(temp_dir const& d, std::string const& times) {
  write(d.path_ / "stops.txt", "stop_id,stop_name\nA,A\nB,B\nC,C\n");
  write(d.path_ / "trips.txt", "route_id,service_id,trip_id\nr,s,t1\n");
  write(d.path_ / "stop_times.txt",
        "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n" + times);
  write(d.path_ / "transfers.txt",
        "from_stop_id,to_stop_id,transfer_type,min_transfer_time\n");
  return d.path_;
}

// Minimum number of non-overtaking chains via bipartite matching over the
// (transitive) precedence relation.
std::size_t min_chain_cover(std::vector<raw_trip> const& trips) {
  auto const n = trips.size();
  std::vector<int> match(n, -1);
  auto const try_kuhn = [&](auto&& self, std::size_t const a,
                            std::vector<bool>& seen) -> bool {
    for (auto b = 0U; b != n; ++b) {
      if (seen[b] || !precedes_strictly(trips[a], trips[b])) {
        continue;
      }
      seen[b] = true;
      if (match[b] == -1 || self(self, static_cast<std::size_t>(match[b]), seen)) {
        match[b] = static_cast<int>(a);
        return true;
      }
    }
    return false;
  };
  auto matched = 0U;
  for (auto a = 0U; a != n; ++a) {
    std::vector<bool> seen(n, false);
    matched += try_kuhn(try_kuhn, a, seen) ? 1U : 0U;
  }
  return n - matched;
}

}  // namespace

TEST(timetable, fig1_entities) {
  auto const raw = parse_gtfs(data_dir() / "fig1-net");
  EXPECT_EQ(raw.stops_.size(), 6U);
  EXPECT_EQ(raw.trips_.size(), 2U);
  EXPECT_EQ(raw.footpaths_.size(), 2U);

  temp_dir d;
  auto const tt = build_timetable(raw);
  write_timetable(tt, d.path_ / "fig1.fttb");
  auto const native = load_timetable(d.path_ / "fig1.fttb");
  EXPECT_EQ(native.n_stops(), 6U);
  EXPECT_EQ(native.n_trips(), 2U);
  EXPECT_EQ(serialize(native), serialize(tt));
  EXPECT_TRUE(validate_timetable(tt).empty());
}

TEST(timetable, empty_stop_times_rejected) {
  temp_dir d;
  try {
    parse_gtfs(gtfs_dir(d, ""));
    FAIL() << "expected an error";
  } catch (std::exception const& e) {
    EXPECT_NE(std::string{e.what()}.find("trip with <2 events"),
              std::string::npos);
  }
}

TEST(timetable, malformed_row_reports_row) {
  temp_dir d;
  try {
    parse_gtfs(gtfs_dir(d, "t1,00:00:00,00:00:00,A,1\nt1,xx,00:01:00,B,2\n"));
    FAIL() << "expected an error";
  } catch (parse_error const& e) {
    EXPECT_EQ(e.row_, 3U);
  }
}

TEST(timetable, dangling_reference) {
  temp_dir d;
  EXPECT_THROW(
      parse_gtfs(gtfs_dir(d, "t1,00:00:00,00:00:00,A,1\nt1,00:01:00,00:01:00,Z,2\n")),
      validation_error);
}

TEST(timetable, fig2_line_grouping) {
  auto const tt = load_fixture("fig2-net");
  auto const a = trip_by_id(tt, "T_a");
  auto const b = trip_by_id(tt, "T_b");
  EXPECT_EQ(tt.line_of(a), tt.line_of(b));
  EXPECT_EQ(tt.pred(a), b);
  EXPECT_FALSE(tt.pred(b).valid());
  EXPECT_NE(tt.line_of(trip_by_id(tt, "T_c")), tt.line_of(trip_by_id(tt, "T_d")));
}

TEST(timetable, identical_trips_split) {
  raw_trip t1{"x", {{0, 0, 0}, {1, 60, 60}}};
  raw_trip t2{"y", {{0, 0, 0}, {1, 60, 60}}};
  EXPECT_EQ(build_lines({t1, t2}).size(), 2U);
}

TEST(timetable, greedy_lines_are_minimal) {
  std::mt19937_64 rng{42};
  for (auto round = 0; round != 20; ++round) {
    std::vector<raw_trip> trips;
    std::vector<std::vector<std::uint32_t>> seqs{{0, 1, 2}, {2, 3}, {1, 4, 5, 6}};
    for (auto i = 0U; i != 20U; ++i) {
      auto const& seq = seqs[rng() % seqs.size()];
      raw_trip t{"t" + std::to_string(i), {}};
      stime time = static_cast<stime>(60 * (rng() % 30));
      for (auto const s : seq) {
        t.events_.push_back({s, time, time});
        time += static_cast<stime>(60 * (1 + rng() % 4));
      }
      trips.push_back(t);
    }
    auto const lines = build_lines(trips);
    std::map<std::vector<std::uint32_t>, std::vector<raw_trip>> by_seq;
    for (auto const& t : trips) {
      std::vector<std::uint32_t> seq;
      for (auto const& e : t.events_) {
        seq.push_back(e.stop_);
      }
      by_seq[seq].push_back(t);
    }
    auto expected = std::size_t{0U};
    for (auto const& [seq, group] : by_seq) {
      expected += min_chain_cover(group);
    }
    EXPECT_EQ(lines.size(), expected);
    for (auto const& line : lines) {
      for (auto i = 1U; i < line.size(); ++i) {
        EXPECT_TRUE(precedes_strictly(trips[line[i - 1U]], trips[line[i]]));
      }
    }
  }
}

TEST(timetable, closure_examples) {
  // A B C D E F = 0..5
  auto const fp = close_footpaths(6U, {{1, 2, 5}, {2, 4, 2}});
  EXPECT_EQ(fp.duration(stop_idx{1}, stop_idx{4}), 7);
  EXPECT_EQ(fp.n_non_empty(), 3U);

  auto const sym = close_footpaths(2U, {{0, 1, 3}, {1, 0, 3}});
  EXPECT_EQ(sym.duration(stop_idx{0}, stop_idx{0}), 0);
  EXPECT_EQ(sym.n_non_empty(), 2U);
}

TEST(timetable, closure_equals_shortest_paths) {
  std::mt19937_64 rng{7};
  for (auto round = 0; round != 20; ++round) {
    constexpr auto n = 10U;
    std::vector<raw_footpath> edges;
    for (auto i = 0U; i != 14U; ++i) {
      auto const a = static_cast<std::uint32_t>(rng() % n);
      auto const b = static_cast<std::uint32_t>(rng() % n);
      if (a != b) {
        edges.push_back({a, b, static_cast<stime>(1 + rng() % 300)});
      }
    }
    std::vector<std::vector<stime>> d(n, std::vector<stime>(n, kInfinity));
    for (auto i = 0U; i != n; ++i) {
      d[i][i] = 0;
    }
    for (auto const& e : edges) {
      d[e.from_][e.to_] = std::min(d[e.from_][e.to_], e.duration_);
    }
    for (auto k = 0U; k != n; ++k) {
      for (auto i = 0U; i != n; ++i) {
        for (auto j = 0U; j != n; ++j) {
          if (d[i][k] != kInfinity && d[k][j] != kInfinity) {
            d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
          }
        }
      }
    }
    auto const fp = close_footpaths(n, edges);
    for (auto i = 0U; i != n; ++i) {
      for (auto j = 0U; j != n; ++j) {
        EXPECT_EQ(fp.duration(stop_idx{i}, stop_idx{j}), d[i][j]);
      }
    }
    // Idempotent.
    std::vector<raw_footpath> closed;
    for (auto i = 0U; i != n; ++i) {
      for (auto const& e : fp.out(stop_idx{i})) {
        closed.push_back({i, to_idx(e.to_), e.duration_});
      }
    }
    EXPECT_EQ(close_footpaths(n, closed), fp);
  }
}

TEST(timetable, closure_component_limit) {
  EXPECT_THROW(close_footpaths(3U, {{0, 1, 1}, {1, 2, 1}}, {.max_component_size_ = 2U}),
               validation_error);
}

TEST(timetable, orderings) {
  auto const tt = load_fixture("fig2-net");
  auto const& o = tt.order_;
  EXPECT_LT(o.line_rank_[tt.line_of(trip_by_id(tt, "T_d"))],
            o.line_rank_[tt.line_of(trip_by_id(tt, "T_c"))]);

  auto const rt = build_timetable(random_network(3));
  // id_E agrees with (line rank, first arrival, index).
  for (auto a = event_idx{0U}; a != rt.events_.size_key(); ++a) {
    for (auto b = event_idx{0U}; b != rt.events_.size_key(); ++b) {
      auto const key = [&](event_idx const e) {
        auto const& ev = rt.events_[e];
        return std::tuple{rt.order_.line_rank_[rt.line_of(ev.trip_)],
                          rt.arr(ev.trip_, 0U), ev.pos_};
      };
      EXPECT_EQ(rt.order_.event_rank_[a] < rt.order_.event_rank_[b],
                key(a) < key(b));
    }
  }
  EXPECT_EQ(assign_orderings(rt), rt.order_);
  EXPECT_EQ(build_timetable(random_network(3)).order_, rt.order_);
}

TEST(timetable, validation_reports_tampering) {
  auto tt = load_fixture("fig1-net");
  auto const b = stop(tt, "B");
  auto const e = stop(tt, "E");
  std::vector<raw_footpath> edges;
  for (auto p = stop_idx{0U}; p != tt.stop_ids_.size_key(); ++p) {
    for (auto const& f : tt.footpaths_.out(p)) {
      if (f.to_ != p && !(p == b && f.to_ == e)) {
        edges.push_back({to_idx(p), to_idx(f.to_), f.duration_});
      }
    }
  }
  auto broken = tt;
  broken.footpaths_ = footpath_set::from_edges(tt.n_stops(), edges);
  auto const report = validate_timetable(broken);
  ASSERT_FALSE(report.empty());
  EXPECT_NE(std::find(begin(report), end(report), "closure violated at (B,E)"),
            end(report));

  auto times = tt;
  auto const ta = trip_by_id(times, "T_a");
  times.events_[times.event(ta, 2U)].arr_ = times.dep(ta, 1U) - 1;
  auto const r2 = validate_timetable(times);
  EXPECT_TRUE(std::any_of(begin(r2), end(r2), [](auto const& m) {
    return m.find("non-monotone trip times") != std::string::npos;
  }));
}

TEST(timetable, native_roundtrip_and_errors) {
  auto const tt = build_timetable(random_network(11));
  auto const bytes = serialize(tt);
  auto const back = deserialize_timetable(bytes);
  EXPECT_EQ(serialize(back), bytes);
  EXPECT_TRUE(validate_timetable(back).empty());

  auto truncated = bytes;
  truncated.resize(bytes.size() / 2U);
  EXPECT_THROW(deserialize_timetable(truncated), format_error);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_timetable(bad_magic), format_error);
}

TEST(timetable, possible_departures_descending) {
  auto const tt = load_fixture("fig2-net");
  auto const deps = possible_departures(tt, stop(tt, "S"));
  EXPECT_EQ(deps, (std::vector<stime>{5, 0}));
  EXPECT_TRUE(possible_departures(tt, stop(tt, "S"), 1, 4).empty());
}
