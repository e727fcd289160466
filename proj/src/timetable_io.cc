#include <fstream>

#include "binary_io.h"
#include "flashtb/hash.h"
#include "flashtb/timetable.h"

namespace flashtb {

namespace {

constexpr std::uint16_t kVersion = 1U;

}  // namespace

std::vector<std::uint8_t> serialize(timetable const& tt) {
  detail::writer w;
  w.put_magic("FTTB");
  w.put(kVersion);

  w.put(static_cast<std::uint32_t>(tt.n_stops()));
  for (auto const& s : tt.stop_ids_) {
    w.put_string(s);
  }

  w.put(static_cast<std::uint32_t>(tt.n_events()));
  for (auto const& e : tt.events_) {
    w.put(to_idx(e.stop_));
    w.put(e.arr_);
    w.put(e.dep_);
  }

  w.put(static_cast<std::uint32_t>(tt.n_trips()));
  for (auto const& t : tt.trips_) {
    w.put_string(t.id_);
    w.put(to_idx(t.first_));
    w.put(t.size_);
    w.put(to_idx(t.line_));
  }

  w.put(static_cast<std::uint32_t>(tt.n_lines()));
  for (auto const& l : tt.lines_) {
    w.put(to_idx(l.first_trip_));
    w.put(l.n_trips_);
    w.put(static_cast<std::uint32_t>(l.stops_.size()));
    for (auto const s : l.stops_) {
      w.put(to_idx(s));
    }
  }

  auto const& fp = tt.footpaths_;
  w.put(static_cast<std::uint32_t>(fp.out_offsets_.size()));
  for (auto const o : fp.out_offsets_) {
    w.put(o);
  }
  w.put(static_cast<std::uint32_t>(fp.out_.size()));
  for (auto const& e : fp.out_) {
    w.put(to_idx(e.to_));
    w.put(e.duration_);
  }
  return std::move(w.buf_);
}

timetable deserialize_timetable(std::span<std::uint8_t const> data) {
  detail::reader r{data, "timetable"};
  r.expect_magic("FTTB");
  if (auto const v = r.get<std::uint16_t>(); v != kVersion) {
    throw format_error{"timetable: unsupported version " + std::to_string(v)};
  }

  timetable tt;
  auto const n_stops = r.get_count(4U);
  for (auto i = 0U; i != n_stops; ++i) {
    tt.stop_ids_.push_back(r.get_string());
  }

  auto const n_events = r.get_count(12U);
  tt.events_.resize(n_events);
  for (auto& e : tt.events_) {
    e.stop_ = stop_idx{r.get<std::uint32_t>()};
    e.arr_ = r.get<std::int32_t>();
    e.dep_ = r.get<std::int32_t>();
    if (to_idx(e.stop_) >= n_stops) {
      throw format_error{"timetable: event references unknown stop"};
    }
  }

  auto const n_trips = r.get_count(14U);
  for (auto i = 0U; i != n_trips; ++i) {
    auto& t = tt.trips_.emplace_back();
    t.id_ = r.get_string();
    t.first_ = event_idx{r.get<std::uint32_t>()};
    t.size_ = r.get<std::uint16_t>();
    t.line_ = line_idx{r.get<std::uint32_t>()};
    if (static_cast<std::uint64_t>(to_idx(t.first_)) + t.size_ > n_events) {
      throw format_error{"timetable: trip events out of range"};
    }
    for (auto j = 0U; j != t.size_; ++j) {
      auto& e = tt.events_[t.first_ + j];
      e.trip_ = trip_idx{i};
      e.pos_ = static_cast<std::uint16_t>(j);
    }
  }

  auto const n_lines = r.get_count(12U);
  for (auto i = 0U; i != n_lines; ++i) {
    auto& l = tt.lines_.emplace_back();
    l.first_trip_ = trip_idx{r.get<std::uint32_t>()};
    l.n_trips_ = r.get<std::uint32_t>();
    auto const n = r.get_count(4U);
    for (auto j = 0U; j != n; ++j) {
      l.stops_.emplace_back(r.get<std::uint32_t>());
    }
    if (static_cast<std::uint64_t>(to_idx(l.first_trip_)) + l.n_trips_ >
        n_trips) {
      throw format_error{"timetable: line trips out of range"};
    }
  }
  for (auto const& t : tt.trips_) {
    if (to_idx(t.line_) >= n_lines) {
      throw format_error{"timetable: trip references unknown line"};
    }
  }

  auto const n_offsets = r.get_count(4U);
  if (n_offsets != n_stops + 1U) {
    throw format_error{"timetable: footpath offsets size mismatch"};
  }
  std::vector<std::uint32_t> offsets(n_offsets);
  for (auto& o : offsets) {
    o = r.get<std::uint32_t>();
  }
  auto const n_edges = r.get_count(8U);
  std::vector<raw_footpath> edges;
  std::vector<footpath_set::edge> out(n_edges);
  for (auto& e : out) {
    e.to_ = stop_idx{r.get<std::uint32_t>()};
    e.duration_ = r.get<std::int32_t>();
    if (to_idx(e.to_) >= n_stops) {
      throw format_error{"timetable: footpath references unknown stop"};
    }
  }
  r.expect_end();
  if (offsets.front() != 0U || offsets.back() != n_edges ||
      !std::is_sorted(begin(offsets), end(offsets))) {
    throw format_error{"timetable: malformed footpath offsets"};
  }
  for (auto p = 0U; p != n_stops; ++p) {
    for (auto k = offsets[p]; k != offsets[p + 1U]; ++k) {
      if (to_idx(out[k].to_) != p) {
        edges.push_back({p, to_idx(out[k].to_), out[k].duration_});
      }
    }
  }
  tt.footpaths_ = footpath_set::from_edges(n_stops, std::move(edges));
  if (tt.footpaths_.out_offsets_ != offsets || tt.footpaths_.out_.size() != out.size() ||
      !std::equal(begin(out), end(out), begin(tt.footpaths_.out_))) {
    throw format_error{"timetable: footpath adjacency not canonical"};
  }

  tt.stop_lines_.resize(n_stops);
  for (auto l = line_idx{0U}; l != tt.lines_.size_key(); ++l) {
    auto const& stops = tt.lines_[l].stops_;
    for (auto i = 0U; i != stops.size(); ++i) {
      if (to_idx(stops[i]) >= n_stops) {
        throw format_error{"timetable: line references unknown stop"};
      }
      tt.stop_lines_[stops[i]].push_back({l, static_cast<std::uint16_t>(i)});
    }
  }

  if (auto const report = validate_timetable(tt); !report.empty()) {
    throw validation_error{"timetable: " + report.front()};
  }
  tt.order_ = assign_orderings(tt);
  return tt;
}

void write_timetable(timetable const& tt, std::filesystem::path const& p) {
  detail::write_file(p, serialize(tt));
}

timetable read_timetable(std::filesystem::path const& p) {
  return deserialize_timetable(detail::read_file(p));
}

timetable load_timetable(std::filesystem::path const& p) {
  if (std::filesystem::is_directory(p)) {
    return build_timetable(parse_gtfs(p));
  }
  return read_timetable(p);
}

std::uint64_t content_hash(timetable const& tt) { return fnv1a(serialize(tt)); }

}  // namespace flashtb
