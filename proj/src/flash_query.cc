#include "flashtb/flash_query.h"

namespace flashtb {

void check_flag_artifacts(timetable const& tt, transfer_set const& ts,
                          flag_metadata const& meta, std::uint32_t const k,
                          std::uint32_t const n_transfers,
                          partition const& part,
                          bool const check_transfers_hash) {
  if (n_transfers != ts.size()) {
    throw validation_error{"flags cover " + std::to_string(n_transfers) +
                           " transfers, transfer set has " +
                           std::to_string(ts.size())};
  }
  if (part.cell_.size() != tt.n_stops()) {
    throw validation_error{"partition does not cover the timetable"};
  }
  if (k != part.k_ || meta.partition_hash_ != part.hash()) {
    throw validation_error{"flags were computed for a different partition"};
  }
  if (check_transfers_hash && meta.transfers_hash_ != content_hash(ts)) {
    throw validation_error{"flags were computed for a different transfer set"};
  }
}

}  // namespace flashtb
