#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "flashtb/flash_query.h"
#include "flashtb/hash.h"
#include "flashtb/oracle.h"

using namespace flashtb;
using json = nlohmann::json;

namespace {

constexpr auto kToolVersion = "0.1.0";

enum exit_code { kOk = 0, kUsage = 1, kValidation = 2, kVerification = 3 };

// HH:MM[:SS] or plain seconds.
stime parse_time(std::string const& s) {
  unsigned h = 0U, m = 0U, sec = 0U;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%u:%u:%u%c", &h, &m, &sec, &tail) == 3 ||
      std::sscanf(s.c_str(), "%u:%u%c", &h, &m, &tail) == 2) {
    return static_cast<stime>(h * 3600U + m * 60U + sec);
  }
  std::size_t used = 0U;
  auto const v = std::stol(s, &used);
  if (used != s.size()) {
    throw std::invalid_argument{"bad time '" + s + "'"};
  }
  return static_cast<stime>(v);
}

std::string format_time(stime const t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", t / 3600, (t / 60) % 60,
                t % 60);
  return buf;
}

stop_idx stop_arg(timetable const& tt, std::string const& id) {
  auto const s = tt.find_stop(id);
  if (!s.valid()) {
    throw validation_error{"unknown stop '" + id + "'"};
  }
  return s;
}

void write_meta(std::filesystem::path const& artifact, json meta) {
  meta["tool_version"] = kToolVersion;
  auto const now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  meta["created"] = buf;
  std::ofstream out{artifact.string() + ".meta.json"};
  out << meta.dump(2) << '\n';
}

json leg_json(timetable const& tt, leg const& l) {
  return {{"trip", tt.trips_[l.trip_].id_},
          {"board", tt.stop_ids_[tt.stop(l.trip_, l.enter_)]},
          {"departure", format_time(tt.dep(l.trip_, l.enter_))},
          {"alight", tt.stop_ids_[tt.stop(l.trip_, l.exit_)]},
          {"arrival", format_time(tt.arr(l.trip_, l.exit_))}};
}

// Artifacts shared by query, bench and verify.
struct index {
  timetable tt_;
  std::uint64_t tt_hash_{};
  std::optional<transfer_set> ts_;
  std::optional<partition> part_;
  std::optional<any_flag_store> flags_;
};

struct index_paths {
  std::string timetable_, transfers_, partition_, flags_;
};

void add_index_options(CLI::App* cmd, index_paths& p, bool need_transfers) {
  cmd->add_option("--timetable", p.timetable_, "Native timetable or GTFS dir")
      ->required();
  auto* ts = cmd->add_option("--transfers", p.transfers_, "Transfer set");
  if (need_transfers) {
    ts->required();
  }
  cmd->add_option("--partition", p.partition_, "Partition file");
  cmd->add_option("--flags", p.flags_, "Flag store")->needs("--partition");
}

partition load_partition(timetable const& tt, std::uint64_t const tt_hash,
                         std::string const& path) {
  auto imported = import_partition(tt, path);
  if (imported.timetable_hash_.has_value() &&
      *imported.timetable_hash_ != tt_hash) {
    throw validation_error{path + ": partition was built for a different "
                                  "timetable"};
  }
  return std::move(imported.partition_);
}

index load_index(index_paths const& p) {
  index ix;
  ix.tt_ = load_timetable(p.timetable_);
  ix.tt_hash_ = content_hash(ix.tt_);
  if (!p.transfers_.empty()) {
    ix.ts_ = read_transfers(ix.tt_, p.transfers_, ix.tt_hash_);
  }
  if (!p.partition_.empty()) {
    ix.part_ = load_partition(ix.tt_, ix.tt_hash_, p.partition_);
  }
  if (!p.flags_.empty()) {
    if (!ix.ts_) {
      throw validation_error{"--flags requires --transfers"};
    }
    ix.flags_ = load_flags(p.flags_);
    auto const& m = metadata(*ix.flags_);
    if (m.timetable_hash_ != ix.tt_hash_) {
      throw validation_error{p.flags_ + ": flags were built for a different "
                                        "timetable"};
    }
    check_flag_artifacts(ix.tt_, *ix.ts_, m, n_cells(*ix.flags_),
                         n_flagged_transfers(*ix.flags_), *ix.part_, true);
  }
  return ix;
}

std::uint32_t rounds_for(index const& ix, std::optional<std::uint32_t> const r) {
  if (!ix.flags_) {
    return r.value_or(kDefaultMaxRounds);
  }
  auto const cap = metadata(*ix.flags_).max_rounds_;
  if (r.has_value() && *r > cap) {
    throw validation_error{"flags were computed for at most " +
                           std::to_string(cap) + " rounds"};
  }
  return r.value_or(cap);
}

// Runs f with a query engine matching the loaded artifacts. The engine has
// query(s, t, dep), profile_query(s, t, from, to) and stats().
template <typename F>
void with_engine(index const& ix, tb_options const& opt, F&& f) {
  if (!ix.flags_) {
    struct plain {
      tb_result query(stop_idx s, stop_idx t, stime dep) {
        return engine_.query(s, t, dep);
      }
      profile profile_query(stop_idx s, stop_idx t, stime from, stime to) {
        return profile_query_tb(tt_, ts_, s, t, from, to, opt_);
      }
      tb_stats const& stats() const { return engine_.stats(); }
      timetable const& tt_;
      transfer_set const& ts_;
      tb_options opt_;
      tb_engine<> engine_;
    } e{ix.tt_, *ix.ts_, opt, tb_engine<>{ix.tt_, *ix.ts_, opt}};
    f(e);
    return;
  }
  std::visit(
      [&](auto const& store) {
        using store_t = std::decay_t<decltype(store)>;
        flash_engine<store_t> e{ix.tt_, *ix.ts_, store, *ix.part_, opt};
        f(e);
      },
      *ix.flags_);
}

int cmd_import(std::string const& in, std::string const& out) {
  auto const tt = load_timetable(in);
  if (auto const errors = validate_timetable(tt); !errors.empty()) {
    for (auto const& e : errors) {
      std::cerr << "invalid timetable: " << e << '\n';
    }
    return kValidation;
  }
  write_timetable(tt, out);
  auto const h = content_hash(tt);
  write_meta(out, {{"kind", "timetable"},
                   {"hashes", {{"timetable", to_hex(h)}}},
                   {"stops", tt.n_stops()},
                   {"trips", tt.n_trips()},
                   {"lines", tt.n_lines()},
                   {"events", tt.n_events()}});
  std::cout << "stops " << tt.n_stops() << " trips " << tt.n_trips()
            << " lines " << tt.n_lines() << " footpaths "
            << tt.footpaths_.n_non_empty() << '\n';
  return kOk;
}

int cmd_transfers(std::string const& tt_path, std::string const& mode,
                  unsigned const threads, std::string const& out) {
  auto const tt = load_timetable(tt_path);
  auto const h = content_hash(tt);
  auto const ts = mode == "tb" ? tb_transfers(tt)
                               : trans_ultra(tt, {.threads_ = threads});
  write_transfers(ts, h, out);
  write_meta(out, {{"kind", "transfers"},
                   {"mode", mode},
                   {"hashes",
                    {{"timetable", to_hex(h)},
                     {"transfers", to_hex(content_hash(ts))}}},
                   {"transfers", ts.size()}});
  std::cout << "transfers " << ts.size() << '\n';
  return kOk;
}

int cmd_partition(std::string const& tt_path, std::uint32_t k,
                  double const eps, std::uint64_t const seed,
                  std::string const& out) {
  auto const tt = load_timetable(tt_path);
  auto const h = content_hash(tt);
  if (k == 0U) {
    k = static_cast<std::uint32_t>(tt.n_stops());
  }
  auto const g = build_layout_graph(tt);
  auto const p = partition_stops(g, k, eps, seed);
  export_partition(tt, p, out, h);
  write_meta(out, {{"kind", "partition"},
                   {"hashes",
                    {{"timetable", to_hex(h)}, {"partition", to_hex(p.hash())}}},
                   {"k", k},
                   {"eps", eps},
                   {"seed", seed},
                   {"cut_weight", cut_weight(g, p)}});
  std::cout << "k " << k << " cut " << cut_weight(g, p) << '\n';
  return kOk;
}

int cmd_flags(std::string const& tt_path, std::string const& ts_path,
              std::string const& part_path, std::uint32_t const max_rounds,
              bool const compressed, std::string const& pruned_out,
              unsigned const threads, std::string const& out) {
  auto const tt = load_timetable(tt_path);
  auto const h = content_hash(tt);
  auto ts = read_transfers(tt, ts_path, h);
  auto const part = load_partition(tt, h, part_path);
  auto flags = compute_flags(tt, ts, part,
                             {.max_rounds_ = max_rounds, .threads_ = threads});
  auto const n_before = ts.size();
  if (!pruned_out.empty()) {
    auto p = prune_unflagged(tt, ts, flags);
    ts = std::move(p.transfers_);
    flags = std::move(p.flags_);
    write_transfers(ts, h, pruned_out);
    write_meta(pruned_out, {{"kind", "transfers"},
                            {"mode", "pruned"},
                            {"hashes",
                             {{"timetable", to_hex(h)},
                              {"transfers", to_hex(content_hash(ts))}}},
                            {"transfers", ts.size()}});
  }
  auto const store = compressed ? any_flag_store{compress_flags(flags)}
                                : any_flag_store{flags};
  save_flags(store, out);
  auto const& m = flags.meta_;
  json meta = {{"kind", "flags"},
               {"mode", compressed ? "compressed" : "raw"},
               {"hashes",
                {{"timetable", to_hex(m.timetable_hash_)},
                 {"transfers", to_hex(m.transfers_hash_)},
                 {"partition", to_hex(m.partition_hash_)}}},
               {"k", part.k_},
               {"max_rounds", m.max_rounds_},
               {"flags_set", flags.count()},
               {"transfers", ts.size()}};
  if (compressed) {
    meta["patterns"] = std::get<compressed_flag_store>(store).n_patterns_;
  }
  write_meta(out, meta);
  std::cout << "transfers " << n_before << " kept " << ts.size()
            << " flags set " << flags.count() << '\n';
  return kOk;
}

int cmd_query(index const& ix, std::string const& from, std::string const& to,
              std::string const& dep, bool const profile_mode,
              std::string const& range, std::optional<std::uint32_t> rounds) {
  auto const s = stop_arg(ix.tt_, from);
  auto const t = stop_arg(ix.tt_, to);
  auto const opt = tb_options{.max_rounds_ = rounds_for(ix, rounds)};
  with_engine(ix, opt, [&](auto& engine) {
    if (profile_mode) {
      auto lo = stime{0}, hi = kHorizon;
      if (!range.empty()) {
        auto const colon = range.find(',');
        if (colon == std::string::npos) {
          throw std::invalid_argument{"--range expects FROM,TO"};
        }
        lo = parse_time(range.substr(0U, colon));
        hi = parse_time(range.substr(colon + 1U));
      }
      for (auto const& e : engine.profile_query(s, t, lo, hi)) {
        std::cout << json{{"from", from},
                          {"to", to},
                          {"departure", format_time(e.departure_)},
                          {"arrival", format_time(e.arrival_)},
                          {"trips", e.trips_}}
                         .dump()
                  << '\n';
      }
      return;
    }
    auto const res = engine.query(s, t, parse_time(dep));
    for (auto i = 0U; i != res.front_.size(); ++i) {
      auto const& j = res.journeys_[i];
      json legs = json::array();
      for (auto const& l : j.legs_) {
        legs.push_back(leg_json(ix.tt_, l));
      }
      std::cout << json{{"from", from},
                        {"to", to},
                        {"departure", format_time(parse_time(dep))},
                        {"arrival", format_time(res.front_[i].arrival_)},
                        {"trips", res.front_[i].trips_},
                        {"legs", legs}}
                       .dump()
                << '\n';
    }
  });
  return kOk;
}

int cmd_bench(index const& ix, std::uint32_t const n, std::uint64_t const seed,
              std::optional<std::uint32_t> rounds, std::string const& out) {
  auto const opt = tb_options{.max_rounds_ = rounds_for(ix, rounds),
                              .timestamps_ = true};
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
  }
  auto& os = out.empty() ? std::cout : file;
  os << "query,from,to,departure,front_size,scanned_trips,scanned_transfers,"
        "rounds,query_ns,unpack_ns\n";
  std::mt19937_64 rng{seed};
  auto const n_stops = ix.tt_.n_stops();
  with_engine(ix, opt, [&](auto& engine) {
    for (auto q = 0U; q != n; ++q) {
      auto const s = stop_idx{static_cast<std::uint32_t>(rng() % n_stops)};
      auto const t = stop_idx{static_cast<std::uint32_t>(rng() % n_stops)};
      auto const dep = static_cast<stime>(rng() % kDay);
      auto const res = engine.query(s, t, dep);
      auto const& st = engine.stats();
      os << q << ',' << ix.tt_.stop_ids_[s] << ',' << ix.tt_.stop_ids_[t] << ','
         << dep << ',' << res.front_.size() << ',' << st.scanned_segments_
         << ',' << st.scanned_transfers_ << ',' << st.rounds_ << ','
         << st.query_ns_ << ',' << st.unpack_ns_ << '\n';
    }
  });
  return kOk;
}

int cmd_verify(index const& ix, std::uint32_t const rounds,
               std::size_t const max_stops) {
  auto failures = 0U;
  auto const report = [&](std::string const& what, bool const ok,
                          std::string const& detail = {}) {
    std::cout << (ok ? "PASS " : "FAIL ") << what
              << (detail.empty() ? "" : " (" + detail + ")") << '\n';
    failures += ok ? 0U : 1U;
  };

  auto const errors = validate_timetable(ix.tt_);
  report("timetable invariants", errors.empty(),
         errors.empty() ? "" : errors.front());
  if (ix.tt_.n_stops() > max_stops) {
    std::cout << "SKIP oracle checks (" << ix.tt_.n_stops() << " stops > "
              << max_stops << ")\n";
    return failures == 0U ? kOk : kVerification;
  }
  if (!ix.ts_) {
    return failures == 0U ? kOk : kVerification;
  }

  oracle o{ix.tt_, rounds};
  auto const opt = tb_options{.max_rounds_ = rounds};
  auto mismatches = 0U, checked = 0U, profile_mismatches = 0U;
  with_engine(ix, opt, [&](auto& engine) {
    for (auto s = stop_idx{0U}; s != ix.tt_.stop_ids_.size_key(); ++s) {
      auto const deps = possible_departures(ix.tt_, s);
      for (auto t = stop_idx{0U}; t != ix.tt_.stop_ids_.size_key(); ++t) {
        for (auto const dep : deps) {
          ++checked;
          auto const res = engine.query(s, t, dep);
          auto ok = res.front_ == o.pareto(s, t, dep);
          for (auto const& j : res.journeys_) {
            ok = ok && !check_journey(ix.tt_, j).has_value();
          }
          mismatches += ok ? 0U : 1U;
        }
        auto const ref =
            reduce_profile(o.profile_query(s, t, -kInfinity, kInfinity));
        if (engine.profile_query(s, t, -kInfinity, kInfinity) != ref) {
          ++profile_mismatches;
        }
      }
    }
  });
  auto const what = std::string{ix.flags_ ? "flash" : "tb"};
  report(what + " fronts equal oracle", mismatches == 0U,
         std::to_string(mismatches) + " of " + std::to_string(checked) +
             " queries differ");
  report(what + " profiles equal oracle", profile_mismatches == 0U,
         std::to_string(profile_mismatches) + " pairs differ");

  if (ix.flags_) {
    auto const raw = std::visit(
        [](auto const& s) {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, flag_store>) {
            return s;
          } else {
            return decompress_flags(s);
          }
        },
        *ix.flags_);
    auto const minimal = oracle_flags(ix.tt_, ix.part_->cell_, ix.part_->k_,
                                      metadata(*ix.flags_).max_rounds_);
    auto missing = 0U;
    for (auto c = 0U; c != minimal.size(); ++c) {
      for (auto const& [a, b] : minimal[c]) {
        auto const pos = ix.ts_->find(a, b);
        missing += pos == ix.ts_->size() || !raw.get(pos, c) ? 1U : 0U;
      }
    }
    report("flags cover every canonical journey", missing == 0U,
           std::to_string(missing) + " transfer/cell pairs unflagged");
  }
  return failures == 0U ? kOk : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FLASH-TB public transit routing"};
  app.require_subcommand(1);
  unsigned threads = std::max(1U, std::thread::hardware_concurrency());
  app.add_option("--threads", threads, "Worker threads for preprocessing");

  std::string in, out, tt_path, ts_path, part_path, mode = "ultra";
  auto* import = app.add_subcommand("import", "Read GTFS, write native timetable");
  import->add_option("input", in, "GTFS directory or native file")->required();
  import->add_option("-o,--out", out)->required();

  auto* transfers = app.add_subcommand("transfers", "Compute a transfer set");
  transfers->add_option("--timetable", tt_path)->required();
  transfers->add_option("--mode", mode)
      ->check(CLI::IsMember({"tb", "ultra"}));
  transfers->add_option("-o,--out", out)->required();

  std::uint32_t k = 1U;
  double eps = kDefaultImbalance;
  std::uint64_t seed = 0U;
  auto* part = app.add_subcommand("partition", "Partition stops into cells");
  part->add_option("--timetable", tt_path)->required();
  part->add_option("--k", k, "Number of cells, 0 for one per stop")->required();
  part->add_option("--eps", eps)->check(CLI::NonNegativeNumber);
  part->add_option("--seed", seed);
  part->add_option("-o,--out", out)->required();

  std::uint32_t max_rounds = kDefaultMaxRounds;
  bool compressed = false;
  std::string pruned_out;
  auto* flags = app.add_subcommand("flags", "Compute transfer flags");
  flags->add_option("--timetable", tt_path)->required();
  flags->add_option("--transfers", ts_path)->required();
  flags->add_option("--partition", part_path)->required();
  flags->add_option("--max-rounds", max_rounds);
  flags->add_flag("--compressed", compressed);
  flags->add_option("--prune", pruned_out,
                    "Write the transfer set without unflagged transfers here");
  flags->add_option("-o,--out", out)->required();

  index_paths paths;
  std::string from, to, dep, range;
  bool profile_mode = false;
  std::optional<std::uint32_t> rounds;
  auto* query = app.add_subcommand("query", "Answer a query as JSON lines");
  add_index_options(query, paths, true);
  query->add_option("--from", from)->required();
  query->add_option("--to", to)->required();
  query->add_option("--dep", dep, "Departure, HH:MM[:SS] or seconds");
  query->add_flag("--profile", profile_mode);
  query->add_option("--range", range, "Profile range FROM,TO");
  query->add_option("--max-rounds", rounds);

  std::uint32_t n_queries = 1000U;
  auto* bench = app.add_subcommand("bench", "Replay a seeded random workload");
  add_index_options(bench, paths, true);
  bench->add_option("--queries", n_queries);
  bench->add_option("--seed", seed);
  bench->add_option("--max-rounds", rounds);
  bench->add_option("-o,--out", out, "CSV output, stdout by default");

  std::uint32_t verify_rounds = 8U;
  std::size_t max_stops = 60U;
  bool against_oracle = false;
  auto* verify = app.add_subcommand("verify", "Check artifacts against the oracle");
  add_index_options(verify, paths, false);
  verify->add_flag("--against-oracle", against_oracle);
  verify->add_option("--max-rounds", verify_rounds);
  verify->add_option("--max-stops", max_stops,
                     "Skip oracle checks above this many stops");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    auto const rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*import) {
      return cmd_import(in, out);
    }
    if (*transfers) {
      return cmd_transfers(tt_path, mode, threads, out);
    }
    if (*part) {
      return cmd_partition(tt_path, k, eps, seed, out);
    }
    if (*flags) {
      return cmd_flags(tt_path, ts_path, part_path, max_rounds, compressed,
                       pruned_out, threads, out);
    }
    if (*query) {
      if (!profile_mode && dep.empty()) {
        std::cerr << "query: --dep is required unless --profile is given\n";
        return kUsage;
      }
      return cmd_query(load_index(paths), from, to, dep, profile_mode, range,
                       rounds);
    }
    if (*bench) {
      return cmd_bench(load_index(paths), n_queries, seed, rounds, out);
    }
    if (*verify) {
      auto const ix = load_index(paths);
      if (ix.flags_ && metadata(*ix.flags_).max_rounds_ < verify_rounds) {
        verify_rounds = metadata(*ix.flags_).max_rounds_;
      }
      if (!against_oracle) {
        auto const errors = validate_timetable(ix.tt_);
        std::cout << (errors.empty() ? "PASS" : "FAIL")
                  << " timetable invariants\n";
        return errors.empty() ? kOk : kVerification;
      }
      return cmd_verify(ix, verify_rounds, max_stops);
    }
  } catch (std::invalid_argument const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kUsage;
}
