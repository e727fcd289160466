#include "flashtb/random_network.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

namespace flashtb {

namespace {

std::string stop_name(std::uint32_t const i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%03u", i);
  return buf;
}

std::string trip_name(std::uint32_t const i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "t%04u", i);
  return buf;
}

}  // namespace

raw_timetable random_network(std::uint64_t const seed,
                             random_network_options const& opt) {
  std::mt19937_64 rng{seed};
  auto const uniform = [&](std::uint32_t const lo, std::uint32_t const hi) {
    return std::uniform_int_distribution<std::uint32_t>{lo, hi}(rng);
  };

  raw_timetable raw;
  auto const n_stops = uniform(std::min(6U, opt.max_stops_), opt.max_stops_);
  for (auto i = 0U; i != n_stops; ++i) {
    raw.stops_.push_back(stop_name(i));
  }

  std::vector<std::uint32_t> all(n_stops);
  std::iota(begin(all), end(all), 0U);
  auto const n_trips = uniform(opt.max_trips_ / 2U, opt.max_trips_);
  auto trip_id = 0U;
  while (trip_id < n_trips) {
    std::shuffle(begin(all), end(all), rng);
    auto const len = uniform(2U, std::min(6U, n_stops));
    std::vector<std::uint32_t> route(begin(all), begin(all) + len);
    std::vector<stime> hop(len - 1U);
    for (auto& h : hop) {
      h = static_cast<stime>(60U * uniform(1U, 6U));
    }
    auto const n_route_trips = std::min(uniform(1U, 6U), n_trips - trip_id);
    for (auto k = 0U; k != n_route_trips; ++k, ++trip_id) {
      raw_trip t;
      t.id_ = trip_name(trip_id);
      auto time = static_cast<stime>(60U * uniform(0U, 90U));
      for (auto i = 0U; i != len; ++i) {
        auto const arr = time;
        // Occasional dwell and slower runs make some trips overtake.
        auto const dwell = static_cast<stime>(uniform(0U, 3U) == 0U ? 60 : 0);
        t.events_.push_back({route[i], arr, arr + dwell});
        if (i + 1U != len) {
          time = arr + dwell + hop[i] +
                 static_cast<stime>(uniform(0U, 4U) == 0U ? 60 : 0);
        }
      }
      raw.trips_.push_back(std::move(t));
    }
  }

  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  auto const n_fp = uniform(0U, opt.max_footpaths_);
  for (auto i = 0U; i != n_fp; ++i) {
    auto const a = uniform(0U, n_stops - 1U);
    auto const b = uniform(0U, n_stops - 1U);
    if (a == b || !seen.emplace(a, b).second) {
      continue;
    }
    raw.footpaths_.push_back(
        {a, b, static_cast<stime>(60U * uniform(1U, 5U))});
  }
  return raw;
}

raw_timetable grid_network(std::uint64_t const seed, std::uint32_t const rows,
                           std::uint32_t const cols,
                           std::uint32_t const trips_per_line) {
  std::mt19937_64 rng{seed};
  auto const uniform = [&](std::uint32_t const lo, std::uint32_t const hi) {
    return std::uniform_int_distribution<std::uint32_t>{lo, hi}(rng);
  };
  raw_timetable raw;
  auto const id = [&](std::uint32_t const r, std::uint32_t const c) {
    return r * cols + c;
  };
  for (auto i = 0U; i != rows * cols; ++i) {
    raw.stops_.push_back(stop_name(i));
  }

  std::vector<std::vector<std::uint32_t>> routes;
  for (auto r = 0U; r != rows; ++r) {
    std::vector<std::uint32_t> route;
    for (auto c = 0U; c != cols; ++c) {
      route.push_back(id(r, c));
    }
    routes.push_back(route);
    std::reverse(begin(route), end(route));
    routes.push_back(route);
  }
  for (auto c = 0U; c != cols; ++c) {
    std::vector<std::uint32_t> route;
    for (auto r = 0U; r != rows; ++r) {
      route.push_back(id(r, c));
    }
    routes.push_back(route);
    std::reverse(begin(route), end(route));
    routes.push_back(route);
  }

  auto trip_id = 0U;
  for (auto const& route : routes) {
    std::vector<stime> hop(route.size() - 1U);
    for (auto& h : hop) {
      h = static_cast<stime>(60U * uniform(2U, 5U));
    }
    auto const headway = static_cast<stime>(60U * uniform(10U, 20U));
    auto const offset = static_cast<stime>(60U * uniform(0U, 15U));
    for (auto k = 0U; k != trips_per_line; ++k) {
      raw_trip t;
      t.id_ = trip_name(trip_id++);
      auto time = 6 * 3600 + offset + static_cast<stime>(k) * headway;
      for (auto i = 0U; i != route.size(); ++i) {
        t.events_.push_back({route[i], time, time});
        if (i + 1U != route.size()) {
          time += hop[i];
        }
      }
      raw.trips_.push_back(std::move(t));
    }
  }

  for (auto r = 0U; r + 1U < rows; ++r) {
    for (auto c = 0U; c + 1U < cols; ++c) {
      if (uniform(0U, 3U) == 0U) {
        auto const d = static_cast<stime>(60U * uniform(3U, 8U));
        raw.footpaths_.push_back({id(r, c), id(r + 1U, c + 1U), d});
        raw.footpaths_.push_back({id(r + 1U, c + 1U), id(r, c), d});
      }
    }
  }
  return raw;
}

}  // namespace flashtb
