#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "flashtb/partition.h"
#include "flashtb/tb_query.h"
#include "flashtb/timetable.h"
#include "flashtb/transfers.h"

namespace flashtb {

// Identifies the artifacts a flag store was computed from.
struct flag_metadata {
  std::uint64_t timetable_hash_{};
  std::uint64_t transfers_hash_{};
  std::uint64_t partition_hash_{};
  std::uint32_t max_rounds_{};

  bool operator==(flag_metadata const&) const = default;
};

namespace detail {

inline bool test_bit(std::vector<std::uint64_t> const& words,
                     std::size_t const i) {
  return ((words[i / 64U] >> (i % 64U)) & 1U) != 0U;
}

inline void set_bit(std::vector<std::uint64_t>& words, std::size_t const i) {
  words[i / 64U] |= std::uint64_t{1U} << (i % 64U);
}

}  // namespace detail

// b(t, i) at bit i * n_transfers + t.
struct flag_store {
  // Lookup restricted to one cell, usable as a query transfer filter.
  struct row {
    bool operator()(std::uint32_t const t) const {
      return detail::test_bit(*bits_, offset_ + t);
    }
    std::vector<std::uint64_t> const* bits_{};
    std::size_t offset_{};
  };

  flag_store() = default;
  flag_store(std::uint32_t k, std::uint32_t n_transfers);

  bool get(std::uint32_t const t, std::uint32_t const cell) const {
    return detail::test_bit(bits_, std::size_t{cell} * n_transfers_ + t);
  }
  void set(std::uint32_t const t, std::uint32_t const cell) {
    detail::set_bit(bits_, std::size_t{cell} * n_transfers_ + t);
  }
  row cell_row(std::uint32_t const cell) const {
    return {&bits_, std::size_t{cell} * n_transfers_};
  }
  // True iff some cell flags the transfer.
  bool any(std::uint32_t t) const;
  std::size_t count() const;
  void merge(flag_store const&);

  bool operator==(flag_store const&) const = default;

  std::uint32_t k_{};
  std::uint32_t n_transfers_{};
  std::vector<std::uint64_t> bits_;
  flag_metadata meta_;
};

// Distinct k-bit patterns, most frequent first, and one pattern index per
// transfer. Pattern bits are cell-major as well: bit i * n_patterns + p.
struct compressed_flag_store {
  struct row {
    bool operator()(std::uint32_t const t) const {
      return detail::test_bit(s_->patterns_,
                              offset_ + s_->pattern_of(t));
    }
    compressed_flag_store const* s_{};
    std::size_t offset_{};
  };

  std::uint32_t pattern_of(std::uint32_t const t) const {
    switch (width_) {
      case 1U: return index_[t];
      case 2U: return index_[2U * t] | (std::uint32_t{index_[2U * t + 1U]} << 8U);
      default: {
        auto v = 0U;
        for (auto b = 0U; b != 4U; ++b) {
          v |= std::uint32_t{index_[4U * t + b]} << (8U * b);
        }
        return v;
      }
    }
  }
  bool get(std::uint32_t const t, std::uint32_t const cell) const {
    return detail::test_bit(patterns_,
                            std::size_t{cell} * n_patterns_ + pattern_of(t));
  }
  row cell_row(std::uint32_t const cell) const {
    return {this, std::size_t{cell} * n_patterns_};
  }
  // Bytes per index entry: 1, 2 or 4.
  std::uint32_t width() const { return width_; }

  bool operator==(compressed_flag_store const&) const = default;

  std::uint32_t k_{};
  std::uint32_t n_transfers_{};
  std::uint32_t n_patterns_{};
  std::uint32_t width_{1U};
  std::vector<std::uint64_t> patterns_;
  std::vector<std::uint8_t> index_;
  // Occurrences per pattern, non-increasing.
  std::vector<std::uint32_t> counts_;
  flag_metadata meta_;
};

compressed_flag_store compress_flags(flag_store const&);
flag_store decompress_flags(compressed_flag_store const&);

struct flag_options {
  std::uint32_t max_rounds_{kDefaultMaxRounds};
  unsigned threads_{1U};
};

// Runs canonical Profile-TB from every stop over `ts` and flags each
// transfer of each emitted journey for the cell of its target.
flag_store compute_flags(timetable const&, transfer_set const&,
                         partition const&, flag_options const& = {});

struct pruned {
  transfer_set transfers_;
  flag_store flags_;
  // Position in the input set per kept transfer.
  std::vector<std::uint32_t> kept_;
};

// Drops transfers flagged for no cell.
pruned prune_unflagged(timetable const&, transfer_set const&,
                       flag_store const&);

using any_flag_store = std::variant<flag_store, compressed_flag_store>;

std::vector<std::uint8_t> serialize(any_flag_store const&);
any_flag_store deserialize_flags(std::span<std::uint8_t const>);
void save_flags(any_flag_store const&, std::filesystem::path const&);
any_flag_store load_flags(std::filesystem::path const&);

inline flag_metadata const& metadata(any_flag_store const& s) {
  return std::visit([](auto const& x) -> flag_metadata const& { return x.meta_; },
                    s);
}
inline std::uint32_t n_cells(any_flag_store const& s) {
  return std::visit([](auto const& x) { return x.k_; }, s);
}
inline std::uint32_t n_flagged_transfers(any_flag_store const& s) {
  return std::visit([](auto const& x) { return x.n_transfers_; }, s);
}

}  // namespace flashtb
