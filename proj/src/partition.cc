#include "flashtb/partition.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_map>

#include "flashtb/hash.h"

namespace flashtb {

namespace {

layout_graph from_map(std::size_t const n,
                      std::map<std::pair<std::uint32_t, std::uint32_t>,
                               std::uint32_t> const& w) {
  layout_graph g;
  g.offsets_.assign(n + 1U, 0U);
  for (auto const& [pq, weight] : w) {
    ++g.offsets_[pq.first + 1U];
    g.edges_.push_back({stop_idx{pq.second}, weight});
  }
  std::partial_sum(begin(g.offsets_), end(g.offsets_), begin(g.offsets_));
  return g;
}

}  // namespace

std::uint32_t layout_graph::weight(stop_idx const from,
                                   stop_idx const to) const {
  auto const row = out(from);
  auto const it = std::lower_bound(
      begin(row), end(row), to,
      [](edge const& e, stop_idx const p) { return e.to_ < p; });
  return it != end(row) && it->to_ == to ? it->weight_ : 0U;
}

layout_graph layout_graph::symmetrized() const {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> w;
  for (auto p = 0U; p != n_nodes(); ++p) {
    for (auto const& e : out(stop_idx{p})) {
      w[{p, to_idx(e.to_)}] += e.weight_;
      w[{to_idx(e.to_), p}] += e.weight_;
    }
  }
  return from_map(n_nodes(), w);
}

layout_graph build_layout_graph(timetable const& tt) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> w;
  for (auto t = trip_idx{0U}; t != tt.trips_.size_key(); ++t) {
    for (auto i = 1U; i < tt.size(t); ++i) {
      auto const p = tt.stop(t, i - 1U);
      auto const q = tt.stop(t, i);
      if (p != q) {
        ++w[{to_idx(p), to_idx(q)}];
      }
    }
  }
  for (auto p = stop_idx{0U}; p != tt.stop_ids_.size_key(); ++p) {
    for (auto const& f : tt.footpaths_.out(p)) {
      if (f.to_ != p) {
        ++w[{to_idx(p), to_idx(f.to_)}];
      }
    }
  }
  return from_map(tt.n_stops(), w);
}

std::vector<std::uint32_t> partition::cell_sizes() const {
  std::vector<std::uint32_t> sizes(k_, 0U);
  for (auto const c : cell_) {
    ++sizes.at(c);
  }
  return sizes;
}

std::uint64_t partition::hash() const {
  auto h = fnv1a("partition");
  auto const mix = [&](std::uint32_t const v) {
    std::uint8_t b[4];
    for (auto i = 0U; i != 4U; ++i) {
      b[i] = static_cast<std::uint8_t>(v >> (8U * i));
    }
    h = fnv1a(b, h);
  };
  mix(k_);
  mix(static_cast<std::uint32_t>(cell_.size()));
  for (auto const c : cell_) {
    mix(c);
  }
  return h;
}

std::uint32_t max_cell_size(std::size_t const n, std::uint32_t const k,
                            double const eps) {
  constexpr auto kScale = 1'000'000LL;
  auto const per_cell = static_cast<long long>((n + k - 1U) / k);
  auto const e = std::llround(eps * static_cast<double>(kScale));
  return static_cast<std::uint32_t>(per_cell * (kScale + e) / kScale);
}

bool is_balanced(partition const& p, double const eps) {
  auto const cap = max_cell_size(p.cell_.size(), p.k_, eps);
  auto const sizes = p.cell_sizes();
  return std::all_of(begin(sizes), end(sizes),
                     [&](std::uint32_t const s) { return s <= cap; });
}

partition partition_stops(layout_graph const& directed, std::uint32_t const k,
                          double const eps, std::uint64_t const seed) {
  auto const n = static_cast<std::uint32_t>(directed.n_nodes());
  if (k == 0U || k > n) {
    throw std::invalid_argument{"partition: need 1 <= k <= " +
                                std::to_string(n) + ", got " +
                                std::to_string(k)};
  }
  if (eps < 0.0) {
    throw std::invalid_argument{"partition: negative imbalance"};
  }
  partition out;
  out.k_ = k;
  if (k == 1U) {
    out.cell_.assign(n, 0U);
    return out;
  }
  if (k == n) {
    out.cell_.resize(n);
    std::iota(begin(out.cell_), end(out.cell_), 0U);
    return out;
  }

  auto const g = directed.symmetrized();
  std::vector<std::uint32_t> rank(n);
  {
    std::vector<std::uint32_t> perm(n);
    std::iota(begin(perm), end(perm), 0U);
    std::mt19937_64 rng{seed};
    std::shuffle(begin(perm), end(perm), rng);
    for (auto i = 0U; i != n; ++i) {
      rank[perm[i]] = i;
    }
  }
  std::vector<std::uint64_t> degree(n, 0U);
  for (auto p = 0U; p != n; ++p) {
    for (auto const& e : g.out(stop_idx{p})) {
      degree[p] += e.weight_;
    }
  }
  // Seed candidates: high degree first, random among equals.
  std::vector<std::uint32_t> by_degree(n);
  std::iota(begin(by_degree), end(by_degree), 0U);
  std::sort(begin(by_degree), end(by_degree), [&](auto const a, auto const b) {
    return std::tie(degree[b], rank[a]) < std::tie(degree[a], rank[b]);
  });

  constexpr auto kUnassigned = std::numeric_limits<std::uint32_t>::max();
  out.cell_.assign(n, kUnassigned);
  auto next_seed = 0U;
  std::vector<std::uint64_t> conn(n, 0U);
  for (auto c = 0U; c != k; ++c) {
    auto const target = n / k + (c < n % k ? 1U : 0U);
    using item = std::tuple<std::uint64_t, std::int64_t, std::uint32_t>;
    std::priority_queue<item> pq;
    std::vector<std::uint32_t> touched;
    auto size = 0U;
    while (size != target) {
      auto v = kUnassigned;
      while (!pq.empty()) {
        auto const [w, r, u] = pq.top();
        pq.pop();
        if (out.cell_[u] == kUnassigned && w == conn[u]) {
          v = u;
          break;
        }
      }
      if (v == kUnassigned) {
        while (out.cell_[by_degree[next_seed]] != kUnassigned) {
          ++next_seed;
        }
        v = by_degree[next_seed];
      }
      out.cell_[v] = c;
      ++size;
      for (auto const& e : g.out(stop_idx{v})) {
        auto const u = to_idx(e.to_);
        if (out.cell_[u] == kUnassigned) {
          if (conn[u] == 0U) {
            touched.push_back(u);
          }
          conn[u] += e.weight_;
          pq.emplace(conn[u], -static_cast<std::int64_t>(rank[u]), u);
        }
      }
    }
    for (auto const u : touched) {
      conn[u] = 0U;
    }
  }

  // Boundary refinement: move a stop to the neighbouring cell it is most
  // strongly connected to if that lowers the cut and keeps the balance.
  auto const cap = max_cell_size(n, k, eps);
  auto sizes = out.cell_sizes();
  std::vector<std::uint32_t> order(n);
  std::iota(begin(order), end(order), 0U);
  std::sort(begin(order), end(order),
            [&](auto const a, auto const b) { return rank[a] < rank[b]; });
  for (auto pass = 0U; pass != 32U; ++pass) {
    auto moved = false;
    for (auto const v : order) {
      auto const own = out.cell_[v];
      if (sizes[own] == 1U) {
        continue;
      }
      std::map<std::uint32_t, std::uint64_t> to_cell;
      for (auto const& e : g.out(stop_idx{v})) {
        if (to_idx(e.to_) != v) {
          to_cell[out.cell_[to_idx(e.to_)]] += e.weight_;
        }
      }
      auto const here = to_cell[own];
      auto best = own;
      auto best_gain = std::uint64_t{0U};
      for (auto const& [c, w] : to_cell) {
        if (c != own && sizes[c] < cap && w > here && w - here > best_gain) {
          best = c;
          best_gain = w - here;
        }
      }
      if (best != own) {
        out.cell_[v] = best;
        --sizes[own];
        ++sizes[best];
        moved = true;
      }
    }
    if (!moved) {
      break;
    }
  }
  return out;
}

std::uint64_t cut_weight(layout_graph const& g, partition const& p) {
  auto cut = std::uint64_t{0U};
  for (auto v = 0U; v != g.n_nodes(); ++v) {
    for (auto const& e : g.out(stop_idx{v})) {
      if (p.cell_[v] != p.cell_[to_idx(e.to_)]) {
        cut += e.weight_;
      }
    }
  }
  return cut;
}

void export_partition(timetable const& tt, partition const& p,
                      std::filesystem::path const& path,
                      std::optional<std::uint64_t> const timetable_hash) {
  std::ofstream out{path};
  if (!out) {
    throw format_error{"cannot write " + path.string()};
  }
  out << "# k " << p.k_ << "\n";
  if (timetable_hash.has_value()) {
    out << "# timetable " << to_hex(*timetable_hash) << "\n";
  }
  for (auto s = stop_idx{0U}; s != tt.stop_ids_.size_key(); ++s) {
    out << tt.stop_ids_[s] << '\t' << p.cell(s) + 1U << '\n';
  }
  if (!out) {
    throw format_error{"cannot write " + path.string()};
  }
}

imported_partition import_partition(timetable const& tt,
                                    std::filesystem::path const& path) {
  std::ifstream in{path};
  if (!in) {
    throw format_error{"cannot open " + path.string()};
  }
  auto const file = path.filename().string();
  imported_partition res;
  std::optional<std::uint32_t> k;
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> cells(tt.n_stops(), kUnset);
  std::string line;
  std::size_t row = 0U;
  auto max_cell = 0U;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (line.front() == '#') {
      std::istringstream hdr{line.substr(1U)};
      std::string key, value;
      hdr >> key >> value;
      if (key == "k") {
        k = static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "timetable") {
        res.timetable_hash_ = from_hex(value);
      }
      continue;
    }
    auto const tab = line.find('\t');
    if (tab == std::string::npos) {
      throw parse_error{file, row, "expected <stop>\\t<cell>"};
    }
    auto const id = std::string_view{line}.substr(0U, tab);
    auto const cell_str = std::string_view{line}.substr(tab + 1U);
    auto cell = 0U;
    auto const [ptr, ec] = std::from_chars(
        cell_str.data(), cell_str.data() + cell_str.size(), cell);
    if (ec != std::errc{} || ptr != cell_str.data() + cell_str.size() ||
        cell == 0U) {
      throw parse_error{file, row, "bad cell '" + std::string{cell_str} + "'"};
    }
    auto const s = tt.find_stop(id);
    if (!s.valid()) {
      throw parse_error{file, row, "unknown stop '" + std::string{id} + "'"};
    }
    if (cells[to_idx(s)] != kUnset) {
      throw parse_error{file, row, "duplicate stop '" + std::string{id} + "'"};
    }
    cells[to_idx(s)] = cell - 1U;
    max_cell = std::max(max_cell, cell);
  }
  for (auto s = stop_idx{0U}; s != tt.stop_ids_.size_key(); ++s) {
    if (cells[to_idx(s)] == kUnset) {
      throw validation_error{path.string() + ": missing stop '" +
                             tt.stop_ids_[s] + "'"};
    }
  }
  auto& p = res.partition_;
  p.k_ = k.value_or(std::max(max_cell, 1U));
  if (max_cell > p.k_ || p.k_ == 0U) {
    throw validation_error{path.string() + ": cell " +
                           std::to_string(max_cell) + " out of range 1.." +
                           std::to_string(p.k_)};
  }
  p.cell_ = std::move(cells);
  return res;
}

}  // namespace flashtb
