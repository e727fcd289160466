#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <unordered_map>

#include "flashtb/timetable.h"

namespace flashtb {

namespace {

using row = std::vector<std::string>;

std::string trim(std::string_view s) {
  auto const b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    return {};
  }
  auto const e = s.find_last_not_of(" \t\r\n");
  return std::string{s.substr(b, e - b + 1U)};
}

// RFC 4180 style: quoted fields may contain commas and doubled quotes.
row split_csv(std::string_view line, std::string const& file,
              std::size_t const line_no) {
  row out;
  std::string cur;
  auto quoted = false;
  auto was_quoted = false;
  for (auto i = 0U; i < line.size(); ++i) {
    auto const c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1U < line.size() && line[i + 1U] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      out.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) {
    throw parse_error{file, line_no, "unterminated quote"};
  }
  out.push_back(was_quoted ? cur : trim(cur));
  return out;
}

struct table {
  std::string file_;
  std::map<std::string, std::size_t> columns_;
  std::vector<std::pair<std::size_t, row>> rows_;

  std::size_t column(std::string const& name) const {
    auto const it = columns_.find(name);
    if (it == end(columns_)) {
      throw parse_error{file_, 1U, "missing column " + name};
    }
    return it->second;
  }
  std::optional<std::size_t> optional_column(std::string const& name) const {
    auto const it = columns_.find(name);
    return it == end(columns_) ? std::nullopt
                               : std::optional<std::size_t>{it->second};
  }
};

table read_table(std::filesystem::path const& path, bool const required) {
  table t;
  t.file_ = path.filename().string();
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    if (required) {
      throw parse_error{t.file_, 0U, "cannot open file"};
    }
    return t;
  }
  std::string line;
  std::size_t line_no = 0U;
  auto header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line.starts_with("\xEF\xBB\xBF")) {
      line.erase(0, 3);
    }
    if (trim(line).empty()) {
      continue;
    }
    auto fields = split_csv(line, t.file_, line_no);
    if (header) {
      for (auto i = 0U; i != fields.size(); ++i) {
        t.columns_.emplace(fields[i], i);
      }
      header = false;
      continue;
    }
    if (fields.size() < t.columns_.size()) {
      throw parse_error{t.file_, line_no,
                        "expected " + std::to_string(t.columns_.size()) +
                            " fields, got " + std::to_string(fields.size())};
    }
    t.rows_.emplace_back(line_no, std::move(fields));
  }
  return t;
}

std::int64_t parse_int(std::string const& s, table const& t,
                       std::size_t const line_no, char const* what) {
  std::int64_t v{};
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw parse_error{t.file_, line_no,
                      std::string{"invalid "} + what + " '" + s + "'"};
  }
  return v;
}

stime parse_time(std::string const& s, table const& t,
                 std::size_t const line_no) {
  auto const c1 = s.find(':');
  auto const c2 = s.find(':', c1 == std::string::npos ? c1 : c1 + 1U);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw parse_error{t.file_, line_no, "invalid time '" + s + "'"};
  }
  auto const h = parse_int(s.substr(0, c1), t, line_no, "hours");
  auto const m = parse_int(s.substr(c1 + 1U, c2 - c1 - 1U), t, line_no,
                           "minutes");
  auto const sec = parse_int(s.substr(c2 + 1U), t, line_no, "seconds");
  if (h < 0 || m < 0 || m >= 60 || sec < 0 || sec >= 60) {
    throw parse_error{t.file_, line_no, "invalid time '" + s + "'"};
  }
  auto const v = h * 3600 + m * 60 + sec;
  if (v >= kHorizon) {
    throw parse_error{t.file_, line_no, "time beyond horizon '" + s + "'"};
  }
  return static_cast<stime>(v);
}

}  // namespace

raw_timetable parse_gtfs(std::filesystem::path const& dir) {
  raw_timetable raw;

  auto const stops = read_table(dir / "stops.txt", true);
  auto const stop_col = stops.column("stop_id");
  for (auto const& [line_no, r] : stops.rows_) {
    if (r[stop_col].empty()) {
      throw parse_error{stops.file_, line_no, "empty stop_id"};
    }
    raw.stops_.push_back(r[stop_col]);
  }
  std::sort(begin(raw.stops_), end(raw.stops_));
  if (auto const dup =
          std::adjacent_find(begin(raw.stops_), end(raw.stops_));
      dup != end(raw.stops_)) {
    throw validation_error{"duplicate stop id " + *dup};
  }
  auto const stop_index = [&](std::string const& id) -> std::uint32_t {
    auto const it = std::lower_bound(begin(raw.stops_), end(raw.stops_), id);
    if (it == end(raw.stops_) || *it != id) {
      throw validation_error{"unknown stop id " + id};
    }
    return static_cast<std::uint32_t>(it - begin(raw.stops_));
  };

  auto const trips = read_table(dir / "trips.txt", true);
  auto const trip_col = trips.column("trip_id");
  std::map<std::string, std::vector<std::pair<std::int64_t, raw_event>>>
      trip_events;
  for (auto const& [line_no, r] : trips.rows_) {
    if (!trip_events.emplace(r[trip_col], decltype(trip_events)::mapped_type{})
             .second) {
      throw validation_error{"duplicate trip id " + r[trip_col]};
    }
  }

  auto const st = read_table(dir / "stop_times.txt", true);
  auto const st_trip = st.column("trip_id");
  auto const st_arr = st.column("arrival_time");
  auto const st_dep = st.column("departure_time");
  auto const st_stop = st.column("stop_id");
  auto const st_seq = st.column("stop_sequence");
  for (auto const& [line_no, r] : st.rows_) {
    auto const it = trip_events.find(r[st_trip]);
    if (it == end(trip_events)) {
      throw validation_error{"stop_times.txt:" + std::to_string(line_no) +
                             ": unknown trip id " + r[st_trip]};
    }
    auto arr_s = r[st_arr];
    auto dep_s = r[st_dep];
    if (arr_s.empty()) {
      arr_s = dep_s;
    }
    if (dep_s.empty()) {
      dep_s = arr_s;
    }
    if (arr_s.empty()) {
      throw parse_error{st.file_, line_no, "missing arrival and departure"};
    }
    auto const seq = parse_int(r[st_seq], st, line_no, "stop_sequence");
    it->second.emplace_back(
        seq, raw_event{stop_index(r[st_stop]), parse_time(arr_s, st, line_no),
                       parse_time(dep_s, st, line_no)});
  }

  for (auto& [id, events] : trip_events) {
    if (events.size() < 2U) {
      throw validation_error{"trip with <2 events: " + id};
    }
    std::sort(begin(events), end(events),
              [](auto const& a, auto const& b) { return a.first < b.first; });
    auto& t = raw.trips_.emplace_back();
    t.id_ = id;
    for (auto i = 0U; i != events.size(); ++i) {
      if (i != 0U && events[i].first == events[i - 1U].first) {
        throw validation_error{"duplicate stop_sequence in trip " + id};
      }
      auto const& e = events[i].second;
      if (e.dep_ < e.arr_) {
        throw validation_error{"departure before arrival in trip " + id};
      }
      if (i != 0U && e.arr_ < t.events_.back().dep_) {
        throw validation_error{"non-monotone trip times in trip " + id};
      }
      t.events_.push_back(e);
    }
  }

  auto const tr = read_table(dir / "transfers.txt", false);
  if (!tr.columns_.empty()) {
    auto const from = tr.column("from_stop_id");
    auto const to = tr.column("to_stop_id");
    auto const type = tr.column("transfer_type");
    auto const min_time = tr.optional_column("min_transfer_time");
    for (auto const& [line_no, r] : tr.rows_) {
      if (parse_int(r[type], tr, line_no, "transfer_type") != 2) {
        continue;
      }
      auto const a = stop_index(r[from]);
      auto const b = stop_index(r[to]);
      if (a == b) {
        continue;
      }
      if (!min_time.has_value() || r[*min_time].empty()) {
        throw parse_error{tr.file_, line_no, "missing min_transfer_time"};
      }
      auto const d = parse_int(r[*min_time], tr, line_no, "min_transfer_time");
      if (d <= 0) {
        throw parse_error{tr.file_, line_no, "non-positive transfer time"};
      }
      raw.footpaths_.push_back({a, b, static_cast<stime>(d)});
    }
  }
  return raw;
}

}  // namespace flashtb
