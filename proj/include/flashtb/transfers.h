#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "flashtb/timetable.h"

namespace flashtb {

// Event-to-event transfers in CSR form over source events. Within a source
// event, targets are ordered by event rank. A transfer is identified by its
// position in the set, unless `ids_` is non-empty (split views keep the ids
// of the set they were derived from).
struct transfer_set {
  struct entry {
    event_idx to_;
    stime walk_arrival_;
  };

  std::size_t size() const { return targets_.size(); }
  std::size_t n_events() const {
    return offsets_.empty() ? 0U : offsets_.size() - 1U;
  }

  std::uint32_t begin_of(event_idx const e) const {
    return offsets_[to_idx(e)];
  }
  std::uint32_t end_of(event_idx const e) const {
    return offsets_[to_idx(e) + 1U];
  }
  std::span<entry const> out(event_idx const e) const {
    return {targets_.data() + begin_of(e), targets_.data() + end_of(e)};
  }
  transfer_idx id(std::uint32_t const pos) const {
    return ids_.empty() ? transfer_idx{pos} : ids_[pos];
  }

  // Position of the transfer, size() if absent.
  std::uint32_t find(event_idx from, event_idx to) const;
  bool contains(event_idx const from, event_idx const to) const {
    return find(from, to) != size();
  }

  std::vector<std::pair<event_idx, event_idx>> pairs() const;
  event_idx source(std::uint32_t pos) const;

  static transfer_set from_pairs(
      timetable const&, std::vector<std::pair<event_idx, event_idx>>);

  bool operator==(transfer_set const&) const = default;

  std::vector<std::uint32_t> offsets_;
  std::vector<entry> targets_;
  std::vector<transfer_idx> ids_;
};

inline bool operator==(transfer_set::entry const& a,
                       transfer_set::entry const& b) {
  return a.to_ == b.to_ && a.walk_arrival_ == b.walk_arrival_;
}

transfer_set generate_transfers(timetable const&);
transfer_set reduce_uturn(timetable const&, transfer_set const&);
transfer_set reduce_latest_exit(timetable const&, transfer_set const&);

// Generation followed by both reductions.
transfer_set tb_transfers(timetable const&);

struct trans_ultra_options {
  unsigned threads_{1U};
};

transfer_set trans_ultra(timetable const&, trans_ultra_options const& = {});

struct split_transfer_set {
  transfer_set same_stop_;
  transfer_set footpath_;
};

split_transfer_set split_transfers(timetable const&, transfer_set const&);

std::vector<std::uint8_t> serialize(transfer_set const&,
                                    std::uint64_t timetable_hash);
transfer_set deserialize_transfers(timetable const&,
                                   std::span<std::uint8_t const>,
                                   std::uint64_t expected_timetable_hash);
void write_transfers(transfer_set const&, std::uint64_t timetable_hash,
                     std::filesystem::path const&);
// FNV-1a over the native encoding, independent of the embedded timetable hash.
std::uint64_t content_hash(transfer_set const&);

transfer_set read_transfers(timetable const&, std::filesystem::path const&,
                            std::uint64_t expected_timetable_hash);

}  // namespace flashtb
