#pragma once

#include <cstdint>

#include "flashtb/timetable.h"

namespace flashtb {

struct random_network_options {
  std::uint32_t max_stops_{30U};
  std::uint32_t max_trips_{40U};
  std::uint32_t max_footpaths_{10U};
};

// Small network with a handful of routes, times on a one-minute grid (many
// ties) and a few footpaths.
raw_timetable random_network(std::uint64_t seed,
                             random_network_options const& = {});

// rows x cols grid with bidirectional row and column lines and footpaths
// between some diagonal neighbours.
raw_timetable grid_network(std::uint64_t seed, std::uint32_t rows,
                           std::uint32_t cols, std::uint32_t trips_per_line);

}  // namespace flashtb
