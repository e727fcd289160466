#include "flashtb/flags.h"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "binary_io.h"
#include "flashtb/canonical_profile.h"

namespace flashtb {

namespace {

std::size_t n_words(std::size_t const bits) { return (bits + 63U) / 64U; }

}  // namespace

flag_store::flag_store(std::uint32_t const k, std::uint32_t const n_transfers)
    : k_{k},
      n_transfers_{n_transfers},
      bits_(n_words(std::size_t{k} * n_transfers), 0U) {}

bool flag_store::any(std::uint32_t const t) const {
  for (auto c = 0U; c != k_; ++c) {
    if (get(t, c)) {
      return true;
    }
  }
  return false;
}

std::size_t flag_store::count() const {
  auto n = std::size_t{0U};
  for (auto const w : bits_) {
    n += static_cast<std::size_t>(__builtin_popcountll(w));
  }
  return n;
}

void flag_store::merge(flag_store const& o) {
  if (o.k_ != k_ || o.n_transfers_ != n_transfers_) {
    throw std::invalid_argument{"flag_store::merge: shape mismatch"};
  }
  for (auto i = 0U; i != bits_.size(); ++i) {
    bits_[i] |= o.bits_[i];
  }
}

compressed_flag_store compress_flags(flag_store const& s) {
  using pattern = std::vector<bool>;
  std::map<pattern, std::uint32_t> count;
  std::vector<pattern> of(s.n_transfers_);
  for (auto t = 0U; t != s.n_transfers_; ++t) {
    of[t].resize(s.k_);
    for (auto c = 0U; c != s.k_; ++c) {
      of[t][c] = s.get(t, c);
    }
    ++count[of[t]];
  }
  std::vector<std::pair<pattern, std::uint32_t>> table(begin(count),
                                                       end(count));
  // Most frequent first; equal counts keep the lexicographic order of the map.
  std::stable_sort(begin(table), end(table), [](auto const& a, auto const& b) {
    return a.second > b.second;
  });
  std::map<pattern, std::uint32_t> idx;
  for (auto i = 0U; i != table.size(); ++i) {
    idx[table[i].first] = i;
  }

  compressed_flag_store out;
  out.k_ = s.k_;
  out.n_transfers_ = s.n_transfers_;
  out.n_patterns_ = static_cast<std::uint32_t>(table.size());
  out.meta_ = s.meta_;
  out.width_ = out.n_patterns_ <= 0x100U ? 1U : out.n_patterns_ <= 0x10000U ? 2U : 4U;
  out.patterns_.assign(n_words(std::size_t{s.k_} * out.n_patterns_), 0U);
  for (auto p = 0U; p != table.size(); ++p) {
    out.counts_.push_back(table[p].second);
    for (auto c = 0U; c != s.k_; ++c) {
      if (table[p].first[c]) {
        detail::set_bit(out.patterns_, std::size_t{c} * out.n_patterns_ + p);
      }
    }
  }
  out.index_.reserve(std::size_t{out.width_} * s.n_transfers_);
  for (auto t = 0U; t != s.n_transfers_; ++t) {
    auto const v = idx[of[t]];
    for (auto b = 0U; b != out.width_; ++b) {
      out.index_.push_back(static_cast<std::uint8_t>(v >> (8U * b)));
    }
  }
  return out;
}

flag_store decompress_flags(compressed_flag_store const& s) {
  flag_store out{s.k_, s.n_transfers_};
  out.meta_ = s.meta_;
  for (auto t = 0U; t != s.n_transfers_; ++t) {
    for (auto c = 0U; c != s.k_; ++c) {
      if (s.get(t, c)) {
        out.set(t, c);
      }
    }
  }
  return out;
}

flag_store compute_flags(timetable const& tt, transfer_set const& ts,
                         partition const& part, flag_options const& opt) {
  if (part.cell_.size() != tt.n_stops()) {
    throw validation_error{"flags: partition does not cover the timetable"};
  }
  auto const split = split_transfers(tt, ts);
  auto const n_threads = std::max(1U, opt.threads_);
  auto const n = static_cast<std::uint32_t>(ts.size());
  std::vector<flag_store> buffers(n_threads, flag_store{part.k_, n});
  std::atomic<std::uint32_t> next{0U};

  auto const work = [&](unsigned const w) {
    canonical_profile engine{tt, split, {.max_rounds_ = opt.max_rounds_}};
    auto& flags = buffers[w];
    for (auto s = next.fetch_add(1U); s < tt.n_stops(); s = next.fetch_add(1U)) {
      engine.run_source(stop_idx{s}, [&](canonical_emit const& e) {
        auto const cell = part.cell(e.target_);
        auto const& legs = e.journey_.legs_;
        for (auto i = 1U; i < legs.size(); ++i) {
          auto const pos = ts.find(tt.event(legs[i - 1U].trip_, legs[i - 1U].exit_),
                                   tt.event(legs[i].trip_, legs[i].enter_));
          if (pos == ts.size()) {
            throw std::logic_error{"flags: journey uses an unknown transfer"};
          }
          flags.set(pos, cell);
        }
      });
    }
  };
  if (n_threads == 1U) {
    work(0U);
  } else {
    std::vector<std::thread> pool;
    for (auto w = 0U; w != n_threads; ++w) {
      pool.emplace_back(work, w);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  for (auto w = 1U; w < n_threads; ++w) {
    buffers[0].merge(buffers[w]);
  }
  auto out = std::move(buffers[0]);
  out.meta_ = {content_hash(tt), content_hash(ts), part.hash(), opt.max_rounds_};
  return out;
}

pruned prune_unflagged(timetable const& tt, transfer_set const& ts,
                       flag_store const& flags) {
  if (flags.n_transfers_ != ts.size()) {
    throw validation_error{"prune: flag store does not match transfer set"};
  }
  pruned out;
  std::vector<std::pair<event_idx, event_idx>> pairs;
  auto const all = ts.pairs();
  for (auto t = 0U; t != ts.size(); ++t) {
    if (flags.any(t)) {
      out.kept_.push_back(t);
      pairs.push_back(all[t]);
    }
  }
  out.transfers_ = transfer_set::from_pairs(tt, std::move(pairs));
  out.flags_ = flag_store{flags.k_, static_cast<std::uint32_t>(out.kept_.size())};
  for (auto i = 0U; i != out.kept_.size(); ++i) {
    for (auto c = 0U; c != flags.k_; ++c) {
      if (flags.get(out.kept_[i], c)) {
        out.flags_.set(i, c);
      }
    }
  }
  out.flags_.meta_ = flags.meta_;
  out.flags_.meta_.transfers_hash_ = content_hash(out.transfers_);
  return out;
}

namespace {

constexpr std::uint16_t kFlagVersion = 1U;
constexpr std::uint8_t kRaw = 0U;
constexpr std::uint8_t kCompressed = 1U;

void put_words(detail::writer& w, std::vector<std::uint64_t> const& v) {
  w.put(static_cast<std::uint32_t>(v.size()));
  for (auto const x : v) {
    w.put(x);
  }
}

std::vector<std::uint64_t> get_words(detail::reader& r, std::size_t const n) {
  if (r.get_count(8U) != n) {
    throw format_error{"flags: bit array size mismatch"};
  }
  std::vector<std::uint64_t> v(n);
  for (auto& x : v) {
    x = r.get<std::uint64_t>();
  }
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize(any_flag_store const& s) {
  detail::writer w;
  w.put_magic("FTFL");
  w.put(kFlagVersion);
  w.put(std::holds_alternative<flag_store>(s) ? kRaw : kCompressed);
  auto const& m = metadata(s);
  w.put(n_cells(s));
  w.put(n_flagged_transfers(s));
  w.put(m.timetable_hash_);
  w.put(m.transfers_hash_);
  w.put(m.partition_hash_);
  w.put(m.max_rounds_);
  if (auto const* raw = std::get_if<flag_store>(&s)) {
    put_words(w, raw->bits_);
  } else {
    auto const& c = std::get<compressed_flag_store>(s);
    w.put(static_cast<std::uint8_t>(c.width_));
    w.put(c.n_patterns_);
    for (auto const x : c.counts_) {
      w.put(x);
    }
    put_words(w, c.patterns_);
    w.buf_.insert(end(w.buf_), begin(c.index_), end(c.index_));
  }
  return std::move(w.buf_);
}

any_flag_store deserialize_flags(std::span<std::uint8_t const> data) {
  detail::reader r{data, "flags"};
  r.expect_magic("FTFL");
  if (auto const v = r.get<std::uint16_t>(); v != kFlagVersion) {
    throw format_error{"flags: unsupported version " + std::to_string(v)};
  }
  auto const mode = r.get<std::uint8_t>();
  auto const k = r.get<std::uint32_t>();
  auto const n = r.get<std::uint32_t>();
  flag_metadata m;
  m.timetable_hash_ = r.get<std::uint64_t>();
  m.transfers_hash_ = r.get<std::uint64_t>();
  m.partition_hash_ = r.get<std::uint64_t>();
  m.max_rounds_ = r.get<std::uint32_t>();
  if (mode == kRaw) {
    flag_store s{k, n};
    s.meta_ = m;
    s.bits_ = get_words(r, s.bits_.size());
    r.expect_end();
    return s;
  }
  if (mode != kCompressed) {
    throw format_error{"flags: unknown mode " + std::to_string(mode)};
  }
  compressed_flag_store c;
  c.k_ = k;
  c.n_transfers_ = n;
  c.meta_ = m;
  c.width_ = r.get<std::uint8_t>();
  if (c.width_ != 1U && c.width_ != 2U && c.width_ != 4U) {
    throw format_error{"flags: bad index width"};
  }
  c.n_patterns_ = static_cast<std::uint32_t>(r.get_count(4U));
  for (auto p = 0U; p != c.n_patterns_; ++p) {
    c.counts_.push_back(r.get<std::uint32_t>());
  }
  c.patterns_ = get_words(r, n_words(std::size_t{k} * c.n_patterns_));
  auto const index_bytes = std::size_t{c.width_} * n;
  if (r.remaining() != index_bytes) {
    throw format_error{"flags: index size mismatch"};
  }
  c.index_.assign(data.begin() + static_cast<std::ptrdiff_t>(r.pos_), data.end());
  for (auto t = 0U; t != n; ++t) {
    if (c.pattern_of(t) >= c.n_patterns_) {
      throw format_error{"flags: pattern index out of range"};
    }
  }
  return c;
}

void save_flags(any_flag_store const& s, std::filesystem::path const& p) {
  detail::write_file(p, serialize(s));
}

any_flag_store load_flags(std::filesystem::path const& p) {
  return deserialize_flags(detail::read_file(p));
}

}  // namespace flashtb
