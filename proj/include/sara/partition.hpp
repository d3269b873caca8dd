#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "sara/analytic.hpp"
#include "sara/config_space.hpp"
#include "sara/types.hpp"

namespace sara {

enum class ReadMode : std::uint8_t { Replicated, Collated };

constexpr std::string_view to_string(ReadMode m) {
  return m == ReadMode::Replicated ? "replicated" : "collated";
}

inline ReadMode parse_read_mode(std::string_view s) {
  if (s == "replicated") return ReadMode::Replicated;
  if (s == "collated") return ReadMode::Collated;
  throw ValidationError("unknown read mode '" + std::string(s) +
                        "' (expected replicated or collated)");
}

/// Ceil-split of `extent` over `parts`: leading parts get ceil(extent/parts),
/// the last non-empty one the remainder. Trailing zero-sized parts are kept
/// so indices line up with grid positions.
inline std::vector<Count> split_extent(Count extent, Count parts) {
  const Count chunk = ceil_div(extent, parts);
  std::vector<Count> out(static_cast<std::size_t>(parts));
  for (Count i = 0; i < parts; ++i) {
    out[static_cast<std::size_t>(i)] = std::clamp<Count>(extent - i * chunk, 0, chunk);
  }
  return out;
}

struct Tile {
  Count grid_row = 0;
  Count grid_col = 0;
  Count row_offset = 0;  // into the row-mapped dimension
  Count col_offset = 0;  // into the column-mapped dimension
  GemmWorkload chunk;
};

struct PartitionPlan {
  ArrayConfig config;
  Count active_grid_rows = 0;
  Count active_grid_cols = 0;
  std::vector<Tile> tiles;  // non-empty tiles only, row-major over the grid
};

/// Splits the row-mapped dimension over grid rows and the column-mapped one
/// over grid columns. The temporal dimension goes whole to every partition.
inline PartitionPlan partition_workload(const GemmWorkload& w, const ArrayConfig& cfg) {
  validate(w);
  const auto mp = mapping_for(cfg.dataflow);
  const auto row_parts = split_extent(dim_of(w, mp.row_dim), cfg.grid_rows);
  const auto col_parts = split_extent(dim_of(w, mp.col_dim), cfg.grid_cols);

  PartitionPlan plan{cfg, 0, 0, {}};
  plan.active_grid_rows = std::count_if(row_parts.begin(), row_parts.end(), [](Count x) { return x > 0; });
  plan.active_grid_cols = std::count_if(col_parts.begin(), col_parts.end(), [](Count x) { return x > 0; });
  Count row_off = 0;
  for (Count a = 0; a < cfg.grid_rows; ++a) {
    const Count rows = row_parts[static_cast<std::size_t>(a)];
    Count col_off = 0;
    for (Count b = 0; b < cfg.grid_cols && rows > 0; ++b) {
      const Count cols = col_parts[static_cast<std::size_t>(b)];
      if (cols > 0) {
        GemmWorkload chunk = w;
        set_dim(chunk, mp.row_dim, rows);
        set_dim(chunk, mp.col_dim, cols);
        plan.tiles.push_back({a, b, row_off, col_off, chunk});
      }
      col_off += cols;
    }
    row_off += rows;
  }
  return plan;
}

namespace detail {

struct ExtentGroup {
  Count extent;
  Count count;
};

// A ceil-split has at most two distinct non-zero part sizes.
inline std::vector<ExtentGroup> group_extents(Count extent, Count parts) {
  std::vector<ExtentGroup> groups;
  for (Count e : split_extent(extent, parts)) {
    if (e == 0) continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const ExtentGroup& g) { return g.extent == e; });
    if (it == groups.end()) {
      groups.push_back({e, 1});
    } else {
      ++it->count;
    }
  }
  return groups;
}

enum class Sharing : std::uint8_t { None, AcrossGridCols, AcrossGridRows };

// An operand is identical for every partition along the grid axis whose
// dimension it does not index.
constexpr Sharing operand_sharing(GemmDim missing, const DataflowMapping& mp) {
  if (missing == mp.col_dim) return Sharing::AcrossGridCols;
  if (missing == mp.row_dim) return Sharing::AcrossGridRows;
  return Sharing::None;
}

}  // namespace detail

/// Whole-array report for `w` under `cfg`. Partitions run concurrently, so
/// cycles are the slowest tile's. Output traffic is summed over tiles. In
/// Collated mode an operand stream shared by a row (column) of partitions is
/// read once for that row (column), sized for its most demanding consumer.
/// WS and IS split K across grid rows; combining those partial outputs costs
/// (active grid rows - 1) * M * N extra output reads and writes.
inline SimReport simulate_config(const GemmWorkload& w, const ArrayConfig& cfg, ReadMode mode,
                                 const EnergyParams& params, const ArrayGeometry& geometry,
                                 Count fill_latency = 0) {
  validate(w);
  validate_config(geometry, cfg);
  const auto mp = mapping_for(cfg.dataflow);
  const auto row_groups = detail::group_extents(dim_of(w, mp.row_dim), cfg.grid_rows);
  const auto col_groups = detail::group_extents(dim_of(w, mp.col_dim), cfg.grid_cols);

  struct TileCost {
    Count cycles;
    GemmTraffic traffic;
  };
  auto cost = [&](const detail::ExtentGroup& rg, const detail::ExtentGroup& cg) {
    GemmWorkload chunk = w;
    set_dim(chunk, mp.row_dim, rg.extent);
    set_dim(chunk, mp.col_dim, cg.extent);
    return TileCost{gemm_cycles(chunk, cfg.part_rows, cfg.part_cols, cfg.dataflow, fill_latency),
                    gemm_reads(chunk, cfg.part_rows, cfg.part_cols, cfg.dataflow)};
  };

  SimReport r;
  Count active_rows = 0;
  for (const auto& rg : row_groups) active_rows += rg.count;

  // Per operand: sum over tiles, or sum over the non-shared axis of the max
  // along the shared axis.
  auto operand_reads = [&](Count GemmTraffic::*field, GemmDim missing) {
    const auto sharing = mode == ReadMode::Collated ? detail::operand_sharing(missing, mp)
                                                    : detail::Sharing::None;
    Count total = 0;
    switch (sharing) {
      case detail::Sharing::None:
        for (const auto& rg : row_groups)
          for (const auto& cg : col_groups) total += rg.count * cg.count * (cost(rg, cg).traffic.*field);
        break;
      case detail::Sharing::AcrossGridCols:
        for (const auto& rg : row_groups) {
          Count widest = 0;
          for (const auto& cg : col_groups) widest = std::max(widest, cost(rg, cg).traffic.*field);
          total += rg.count * widest;
        }
        break;
      case detail::Sharing::AcrossGridRows:
        for (const auto& cg : col_groups) {
          Count widest = 0;
          for (const auto& rg : row_groups) widest = std::max(widest, cost(rg, cg).traffic.*field);
          total += cg.count * widest;
        }
        break;
    }
    return total;
  };

  for (const auto& rg : row_groups) {
    for (const auto& cg : col_groups) {
      const auto c = cost(rg, cg);
      r.cycles = std::max(r.cycles, c.cycles);
      r.reads_out += rg.count * cg.count * c.traffic.reads_out;
      r.writes_out += rg.count * cg.count * c.traffic.writes_out;
    }
  }
  r.reads_a = operand_reads(&GemmTraffic::reads_a, GemmDim::N);
  r.reads_b = operand_reads(&GemmTraffic::reads_b, GemmDim::M);
  if (cfg.dataflow != Dataflow::OS) {
    const Count merge = (active_rows - 1) * w.m * w.n;
    r.reads_out += merge;
    r.writes_out += merge;
  }
  r.mac_ops = w.m * w.n * w.k;
  r.energy = energy(r, params, geometry.total_macs());
  r.utilization = utilization(r.mac_ops, geometry.total_macs(), r.cycles);
  return r;
}

using MuxBits = std::vector<std::uint8_t>;

/// Bypass-mux settings for the systolic-cell grid. Each internal boundary
/// between neighbouring cells owns two bits (input select, output select),
/// set when the boundary is a partition edge. Horizontal-neighbour
/// boundaries come first (row-major over the cell grid), then vertical ones.
inline MuxBits mux_bitvector(const ArrayGeometry& g, const ArrayConfig& cfg) {
  validate_config(g, cfg);
  const Count rows = g.cell_rows();
  const Count cols = g.cell_cols();
  MuxBits bits;
  bits.reserve(static_cast<std::size_t>(2 * ((cols - 1) * rows + (rows - 1) * cols)));
  auto emit = [&](bool edge) {
    bits.push_back(edge ? 1 : 0);
    bits.push_back(edge ? 1 : 0);
  };
  for (Count y = 0; y < rows; ++y) {
    for (Count x = 0; x + 1 < cols; ++x) emit(((x + 1) * g.cell) % cfg.part_cols == 0);
  }
  for (Count y = 0; y + 1 < rows; ++y) {
    for (Count x = 0; x < cols; ++x) emit(((y + 1) * g.cell) % cfg.part_rows == 0);
  }
  return bits;
}

inline std::size_t popcount(const MuxBits& bits) {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

/// Packs bits most-significant first into hex digits; the last digit is
/// zero-padded on the right.
inline std::string to_hex(const MuxBits& bits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve((bits.size() + 3) / 4);
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    unsigned nibble = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      nibble = (nibble << 1) | (i + b < bits.size() ? bits[i + b] : 0u);
    }
    out.push_back(kDigits[nibble]);
  }
  return out;
}

}  // namespace sara
