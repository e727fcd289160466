// Prints one PASS/FAIL/SKIP line per acceptance criterion. Exit code 1 if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "flashtb/canonical_profile.h"
#include "flashtb/flags.h"
#include "flashtb/flash_query.h"
#include "flashtb/oracle.h"
#include "flashtb/partition.h"
#include "flashtb/random_network.h"
#include "flashtb/tb_query.h"
#include "flashtb/transfers.h"
#include "test_util.h"

using namespace flashtb;
using namespace flashtb::test;

namespace {

struct skipped {
  std::string why_;
};

// Empty string = pass.
using outcome = std::variant<std::string, skipped>;

int n_failed = 0;

void criterion(char const* name, std::function<outcome()> const& fn) {
  auto const start = std::chrono::steady_clock::now();
  outcome res;
  try {
    res = fn();
  } catch (std::exception const& e) {
    res = std::string{"exception: "} + e.what();
  }
  auto const secs = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  if (auto const* s = std::get_if<skipped>(&res)) {
    std::printf("SKIP  %-28s %s\n", name, s->why_.c_str());
  } else if (auto const& msg = std::get<std::string>(res); msg.empty()) {
    std::printf("PASS  %-28s (%.2f s)\n", name, secs);
  } else {
    ++n_failed;
    std::printf("FAIL  %-28s (%.2f s) %s\n", name, secs, msg.c_str());
  }
  std::fflush(stdout);
}

// Collects the first few mismatches.
struct errors {
  template <typename... Args>
  void add(Args const&... args) {
    if (++n_ <= 3U) {
      std::ostringstream out;
      (out << ... << args);
      msg_ += (msg_.empty() ? "" : "; ") + out.str();
    }
  }
  std::string str() const {
    return n_ == 0U ? std::string{}
                    : std::to_string(n_) + " mismatches: " + msg_;
  }
  std::size_t n_{0U};
  std::string msg_;
};

std::vector<std::string> trip_names(timetable const& tt, journey const& j) {
  std::vector<std::string> out;
  for (auto const& l : j.legs_) {
    out.push_back(tt.trips_[l.trip_].id_);
  }
  return out;
}

std::vector<std::uint32_t> k_values(std::size_t const n) {
  std::vector<std::uint32_t> ks;
  for (auto const k : {1U, 2U, 4U, static_cast<std::uint32_t>(n)}) {
    if (k <= n && std::find(begin(ks), end(ks), k) == end(ks)) {
      ks.push_back(k);
    }
  }
  return ks;
}

unsigned threads() { return std::max(1U, std::thread::hardware_concurrency()); }

// Every partition built in this run, for the balance check.
struct built_partition {
  partition p_;
  double eps_;
};
std::vector<built_partition> all_partitions;

partition make_partition(timetable const& tt, std::uint32_t const k,
                         double const eps = 0.05, std::uint64_t const seed = 0U) {
  auto p = partition_stops(build_layout_graph(tt), k, eps, seed);
  all_partitions.push_back({p, eps});
  return p;
}

outcome fig1() {
  auto const tt = load_fixture("fig1-net");
  auto const a = stop(tt, "A");
  auto const f = stop(tt, "F");
  errors err;
  auto const reduced = one_to_all_query(tt, tb_transfers(tt), a, 0);
  if (!reduced.front(f).empty()) {
    err.add("latest-exit set reaches F");
  }
  auto const ultra = one_to_all_query(tt, trans_ultra(tt), a, 0);
  if (ultra.front(f) != pareto_front{{35, 2U}}) {
    err.add("Trans-ULTRA front to F is not {(35,2)}");
  }
  return err.str();
}

outcome fig2() {
  auto const tt = load_fixture("fig2-net");
  auto const s = stop(tt, "S");
  auto const t = stop(tt, "T");
  errors err;

  // Plain Profile-TB: the dep-0 arrival at T equals the dep-5 one and is
  // dropped.
  auto const generated = generate_transfers(tt);
  profile_engine<> plain{tt, generated};
  plain.enable_trace(true);
  auto emitted_to_t = 0U;
  for (auto const dep : possible_departures(tt, s, 0, 5)) {
    for (auto const& [p, e] : plain.run(s, dep)) {
      if (p == t && e.departure_ == 0) {
        err.add("plain profile emits the dep-0 journey");
      }
      emitted_to_t += p == t ? 1U : 0U;
    }
  }
  auto run0_rejected = false;
  for (auto const& e : plain.trace()) {
    if (e.run_ == 0 && e.stop_ == t && e.round_ == 2U) {
      if (e.accepted_) {
        err.add("plain run 0 accepts (T,2)");
      }
      run0_rejected = true;
    }
  }
  if (!run0_rejected || emitted_to_t != 1U) {
    err.add("plain trace: no rejected run-0 arrival or ", emitted_to_t,
            " emissions");
  }

  // Canonical Profile-TB keeps it.
  auto const ts = trans_ultra(tt);
  auto const split = split_transfers(tt, ts);
  canonical_profile cp{tt, split, {.max_rounds_ = 8U, .trace_ = true}};
  auto found = false;
  for (auto const& e : cp.run_source(s)) {
    if (e.target_ == t && e.journey_.departure_ == 0) {
      found = trip_names(tt, e.journey_) ==
              std::vector<std::string>{"T_b", "T_d"};
    }
  }
  if (!found) {
    err.add("canonical profile misses T_b,T_d at dep 0");
  }
  auto const& trace = cp.arrival_trace();
  auto const it = std::find_if(begin(trace), end(trace), [&](auto const& e) {
    return e.run_ == 0 && e.stop_ == t && e.round_ == 2U;
  });
  if (it == end(trace) || it->arrival_ != 20 ||
      it->result_ != arrival_result::kAccepted) {
    err.add("canonical run 0 does not accept (T,2,20)");
  }

  for (auto const k : k_values(tt.n_stops())) {
    auto const p = make_partition(tt, k);
    auto const f = compute_flags(tt, ts, p);
    auto const res = flash_query(tt, ts, f, p, s, t, 0);
    if (res.front_ != pareto_front{{20, 2U}}) {
      err.add("flash k=", k, " front differs");
    }
  }
  return err.str();
}

outcome sweep() {
  errors err;
  auto const opt = tb_options{.max_rounds_ = 8U};
  std::uint64_t n_queries = 0U, n_reachable = 0U, n_multi = 0U;
  for (auto seed = 1U; seed <= 50U; ++seed) {
    auto const tt = build_timetable(random_network(seed));
    auto const ts = trans_ultra(tt, {.threads_ = threads()});
    oracle o{tt, 8U};
    tb_engine<> tb{tt, ts, opt};

    std::vector<partition> parts;
    std::vector<flag_store> flags;
    for (auto const k : k_values(tt.n_stops())) {
      parts.push_back(make_partition(tt, k, 0.05, seed));
      flags.push_back(compute_flags(tt, ts, parts.back(),
                                    {.max_rounds_ = 8U, .threads_ = threads()}));
    }
    std::vector<flash_engine<flag_store>> flash;
    for (auto i = 0U; i != parts.size(); ++i) {
      flash.emplace_back(tt, ts, flags[i], parts[i], opt);
    }

    for (auto s = stop_idx{0U}; s != tt.stop_ids_.size_key(); ++s) {
      for (auto const dep : possible_departures(tt, s)) {
        auto const all = one_to_all_query(tt, ts, s, dep, opt);
        for (auto t = stop_idx{0U}; t != tt.stop_ids_.size_key(); ++t) {
          auto const ref = o.pareto(s, t, dep);
          ++n_queries;
          n_reachable += ref.empty() ? 0U : 1U;
          n_multi += ref.size() > 1U ? 1U : 0U;
          if (tb.query(s, t, dep).front_ != ref) {
            err.add("seed ", seed, " tb ", to_idx(s), "->", to_idx(t), "@", dep);
          }
          if (all.front(t) != ref) {
            err.add("seed ", seed, " one-to-all ", to_idx(s), "->", to_idx(t));
          }
          for (auto i = 0U; i != flash.size(); ++i) {
            if (flash[i].query(s, t, dep).front_ != ref) {
              err.add("seed ", seed, " flash k=", parts[i].k_, " ", to_idx(s),
                      "->", to_idx(t), "@", dep);
            }
          }
        }
      }
      for (auto t = stop_idx{0U}; t != tt.stop_ids_.size_key(); ++t) {
        auto const ref =
            reduce_profile(o.profile_query(s, t, -kInfinity, kInfinity));
        for (auto i = 0U; i != flash.size(); ++i) {
          if (flash[i].profile_query(s, t, -kInfinity, kInfinity) != ref) {
            err.add("seed ", seed, " flash profile k=", parts[i].k_);
          }
        }
      }
    }
  }
  std::printf("      %llu queries, %llu reachable, %llu with several criteria\n",
              static_cast<unsigned long long>(n_queries),
              static_cast<unsigned long long>(n_reachable),
              static_cast<unsigned long long>(n_multi));
  return err.str();
}

outcome canonicity() {
  errors err;
  for (auto seed = 1U; seed <= 10U; ++seed) {
    auto const tt = build_timetable(random_network(seed));
    auto const split = split_transfers(tt, trans_ultra(tt));
    oracle o{tt, 8U};
    canonical_profile cp{tt, split, {.max_rounds_ = 8U}};
    for (auto s = stop_idx{0U}; s != tt.stop_ids_.size_key(); ++s) {
      std::set<journey> got;
      for (auto const& e : cp.run_source(s)) {
        got.insert(e.journey_);
      }
      auto const ref = o.canonical_from(s);
      if (got != std::set<journey>(begin(ref), end(ref))) {
        err.add("seed ", seed, " source ", tt.stop_ids_[s]);
      }
    }
  }
  return err.str();
}

outcome minimal_flags() {
  errors err;
  for (auto const* name : {"fig1-net", "fig2-net", "fig3-net"}) {
    auto const tt = load_fixture(name);
    auto const ts = trans_ultra(tt);
    auto const pairs = ts.pairs();
    for (auto const k : {1U, static_cast<std::uint32_t>(tt.n_stops())}) {
      auto const p = make_partition(tt, k);
      auto const f = compute_flags(tt, ts, p);
      auto const ref = oracle_flags(tt, p.cell_, p.k_, kDefaultMaxRounds);
      for (auto c = 0U; c != p.k_; ++c) {
        std::set<std::pair<event_idx, event_idx>> mine;
        for (auto i = 0U; i != ts.size(); ++i) {
          if (f.get(i, c)) {
            mine.insert(pairs[i]);
          }
        }
        if (mine != std::set<std::pair<event_idx, event_idx>>(begin(ref[c]),
                                                              end(ref[c]))) {
          err.add(name, " k=", k, " cell ", c);
        }
      }
    }
  }
  return err.str();
}

outcome trend() {
  auto const tt = build_timetable(grid_network(7U, 10U, 20U, 8U));
  auto const ts = trans_ultra(tt, {.threads_ = threads()});
  auto const n = static_cast<std::uint32_t>(tt.n_stops());
  std::mt19937_64 rng{2024U};
  std::vector<std::tuple<stop_idx, stop_idx, stime>> queries;
  for (auto q = 0U; q != 1000U; ++q) {
    auto const s = stop_idx{static_cast<std::uint32_t>(rng() % n)};
    auto const t = stop_idx{static_cast<std::uint32_t>(rng() % n)};
    queries.emplace_back(s, t, static_cast<stime>(rng() % (4U * 3600U)));
  }
  std::vector<double> mean;
  for (auto const k : {1U, 32U, n}) {
    auto const p = make_partition(tt, k);
    auto const f = compute_flags(tt, ts, p, {.threads_ = threads()});
    flash_engine<flag_store> e{tt, ts, f, p};
    std::uint64_t total = 0U;
    for (auto const& [s, t, dep] : queries) {
      e.query(s, t, dep);
      total += e.stats().scanned_segments_;
    }
    mean.push_back(static_cast<double>(total) / queries.size());
  }
  std::ostringstream msg;
  msg << "mean scanned trips k=1/32/" << n << ": " << mean[0] << "/" << mean[1]
      << "/" << mean[2];
  std::printf("      %s\n", msg.str().c_str());
  if (mean[1] <= 0.5 * mean[0] && mean[2] <= mean[1]) {
    return std::string{};
  }
  return msg.str();
}

outcome compression() {
  errors err;
  auto const check_net = [&](std::string const& label, timetable const& tt,
                             std::uint32_t const max_rounds) {
    auto const ts = trans_ultra(tt);
    auto const opt = tb_options{.max_rounds_ = max_rounds};
    for (auto const k : k_values(tt.n_stops())) {
      auto const p = make_partition(tt, k);
      auto const f = compute_flags(tt, ts, p, {.max_rounds_ = max_rounds});
      auto const c = compress_flags(f);
      if (decompress_flags(c) != f) {
        err.add(label, " k=", k, " roundtrip");
        continue;
      }
      flash_engine<flag_store> raw{tt, ts, f, p, opt};
      flash_engine<compressed_flag_store> comp{tt, ts, c, p, opt};
      for (auto s = stop_idx{0U}; s != tt.stop_ids_.size_key(); ++s) {
        for (auto t = stop_idx{0U}; t != tt.stop_ids_.size_key(); ++t) {
          for (auto const dep : possible_departures(tt, s)) {
            if (raw.query(s, t, dep).journeys_ !=
                comp.query(s, t, dep).journeys_) {
              err.add(label, " k=", k, " query");
            }
          }
          if (raw.profile_query(s, t, -kInfinity, kInfinity) !=
              comp.profile_query(s, t, -kInfinity, kInfinity)) {
            err.add(label, " k=", k, " profile");
          }
        }
      }
    }
  };
  for (auto const* name : {"fig1-net", "fig2-net", "fig3-net"}) {
    check_net(name, load_fixture(name), kDefaultMaxRounds);
  }
  for (auto seed = 1U; seed <= 20U; ++seed) {
    check_net("seed " + std::to_string(seed),
              build_timetable(random_network(seed)), 8U);
  }
  return err.str();
}

outcome timestamps() {
  auto const tt = load_fixture("fig2-net");
  auto const ts = trans_ultra(tt);
  auto const p = make_partition(tt, static_cast<std::uint32_t>(tt.n_stops()));
  auto const f = compute_flags(tt, ts, p);
  flash_engine<flag_store> lazy{tt, ts, f, p, {.timestamps_ = true}};
  std::mt19937_64 rng{70000U};
  auto const n = static_cast<std::uint32_t>(tt.n_stops());
  errors err;
  for (auto q = 0U; q != 70'000U; ++q) {
    auto const s = stop_idx{static_cast<std::uint32_t>(rng() % n)};
    auto const t = stop_idx{static_cast<std::uint32_t>(rng() % n)};
    auto const dep = static_cast<stime>(rng() % 30U);
    auto const a = lazy.query(s, t, dep);
    flash_engine<flag_store> fresh{tt, ts, f, p};
    if (fresh.query(s, t, dep).journeys_ != a.journeys_) {
      err.add("query ", q);
    }
  }
  if (lazy.physical_resets() == 0U) {
    err.add("the 16-bit counter never wrapped");
  }
  return err.str();
}

outcome balance() {
  errors err;
  for (auto seed = 1U; seed <= 20U; ++seed) {
    auto const tt = build_timetable(random_network(seed));
    for (auto k = 1U; k <= tt.n_stops(); ++k) {
      for (auto const eps : {0.0, 0.03, 0.05, 0.25}) {
        make_partition(tt, k, eps, seed);
      }
    }
  }
  for (auto const& [p, eps] : all_partitions) {
    auto const cap = max_cell_size(p.cell_.size(), p.k_, eps);
    for (auto const size : p.cell_sizes()) {
      if (size > cap) {
        err.add("k=", p.k_, " eps=", eps, " cell of ", size, " > ", cap);
      }
    }
  }
  std::printf("      %zu partitions checked\n", all_partitions.size());
  return err.str();
}

outcome feed() {
  auto const* path = std::getenv("FLASHTB_GTFS_FEED");
  if (path == nullptr || *path == '\0') {
    return skipped{"FLASHTB_GTFS_FEED not set"};
  }
  auto const tt = build_timetable(parse_gtfs(path));
  auto const generated = generate_transfers(tt);
  auto const ts = trans_ultra(tt, {.threads_ = threads()});
  std::printf("      %zu stops, %zu generated, %zu Trans-ULTRA transfers\n",
              tt.n_stops(), generated.size(), ts.size());
  errors err;
  if (ts.size() >= generated.size()) {
    err.add("no reduction");
  }
  auto const k = std::min<std::uint32_t>(32U, tt.n_stops());
  auto const p = make_partition(tt, k);
  auto const f = compute_flags(tt, ts, p, {.threads_ = threads()});
  flash_engine<flag_store> flash{tt, ts, f, p};
  tb_engine<> tb{tt, ts};
  std::mt19937_64 rng{1000U};
  auto const n = static_cast<std::uint32_t>(tt.n_stops());
  for (auto q = 0U; q != 1000U; ++q) {
    auto const s = stop_idx{static_cast<std::uint32_t>(rng() % n)};
    auto const t = stop_idx{static_cast<std::uint32_t>(rng() % n)};
    auto const deps = possible_departures(tt, s);
    auto const dep = deps.empty() ? stime{0} : deps[rng() % deps.size()];
    if (flash.query(s, t, dep).front_ != tb.query(s, t, dep).front_) {
      err.add("query ", q);
    }
  }
  return err.str();
}

}  // namespace

int main() {
  criterion("fig1 regression", fig1);
  criterion("fig2 regression", fig2);
  criterion("oracle sweep", sweep);
  criterion("canonicity", canonicity);
  criterion("minimal flags", minimal_flags);
  criterion("search-space trend", trend);
  criterion("compression", compression);
  criterion("timestamp overflow", timestamps);
  criterion("balance", balance);
  criterion("regional feed", feed);
  return n_failed == 0 ? 0 : 1;
}
