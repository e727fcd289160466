#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "flashtb/timetable.h"

namespace flashtb {

constexpr double kDefaultImbalance = 0.05;

// Stop-level condensation of all links (trip connections between
// consecutive events plus footpaths), weighted by the number of links.
// Directed; empty footpaths are left out.
struct layout_graph {
  struct edge {
    stop_idx to_;
    std::uint32_t weight_;
  };

  std::size_t n_nodes() const {
    return offsets_.empty() ? 0U : offsets_.size() - 1U;
  }
  std::span<edge const> out(stop_idx const p) const {
    return {edges_.data() + offsets_[to_idx(p)],
            edges_.data() + offsets_[to_idx(p) + 1U]};
  }
  // 0 if there is no edge.
  std::uint32_t weight(stop_idx from, stop_idx to) const;

  // Undirected view with weights of both directions summed.
  layout_graph symmetrized() const;

  std::vector<std::uint32_t> offsets_;
  std::vector<edge> edges_;
};

layout_graph build_layout_graph(timetable const&);

// Cells are 0-based in memory and 1-based in the text format.
struct partition {
  std::uint32_t cell(stop_idx const p) const { return cell_[to_idx(p)]; }
  std::vector<std::uint32_t> cell_sizes() const;
  std::uint64_t hash() const;

  bool operator==(partition const&) const = default;

  std::uint32_t k_{1U};
  std::vector<std::uint32_t> cell_;
};

// floor((1 + eps) * ceil(n / k)), computed exactly for eps given to six
// decimal places.
std::uint32_t max_cell_size(std::size_t n, std::uint32_t k, double eps);
bool is_balanced(partition const&, double eps);

// Seeded greedy region growing followed by boundary refinement.
partition partition_stops(layout_graph const&, std::uint32_t k,
                          double eps = kDefaultImbalance,
                          std::uint64_t seed = 0U);

std::uint64_t cut_weight(layout_graph const&, partition const&);

// Lines `external_id<TAB>cell`. Header lines start with '#':
// `# k <k>` and `# timetable <hex hash>`.
void export_partition(timetable const&, partition const&,
                      std::filesystem::path const&,
                      std::optional<std::uint64_t> timetable_hash = {});

struct imported_partition {
  partition partition_;
  std::optional<std::uint64_t> timetable_hash_;
};

imported_partition import_partition(timetable const&,
                                    std::filesystem::path const&);

}  // namespace flashtb
