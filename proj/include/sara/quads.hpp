#pragma once

// Cycle estimates for running the recommender itself, either on a bank of
// 1-D multiplier units with binary reduction trees or on the systolic array.

#include <bit>
#include <numeric>
#include <vector>

#include "sara/config_space.hpp"
#include "sara/partition.hpp"

namespace sara {

struct QuadsSpec {
  Count units = 2;             // P
  Count mults_per_unit = 256;  // U

  Count tree_depth() const {
    return static_cast<Count>(std::bit_width(static_cast<std::uint64_t>(mults_per_unit - 1)));
  }
  Count multipliers() const { return units * mults_per_unit; }
};

inline void validate(const QuadsSpec& s) {
  if (s.units < 1 || s.mults_per_unit < 1) throw ValidationError("QUADS units and multipliers must be >= 1");
}

/// Input-stationary dense layer: the input vector is buffered next to the
/// multipliers in ceil(n_in/U) slices, each unit then produces one output
/// (partial) per cycle while weight rows stream through, and the reduction
/// tree drains once at the end.
inline Count dense_layer_cycles(Count n_in, Count n_out, const QuadsSpec& spec) {
  validate(spec);
  if (n_in < 1 || n_out < 1) throw ValidationError("layer widths must be >= 1");
  const Count slices = ceil_div(n_in, spec.mults_per_unit);
  return slices + ceil_div(n_out, spec.units) * slices + spec.tree_depth() + 1;
}

/// Layer widths of the recommender: input (3 x embedding), hidden, classes.
struct RecNetShape {
  std::vector<Count> widths{48, 128, 858};
  Count embedding_lookup_cycles = 3;
};

inline void validate(const RecNetShape& s) {
  if (s.widths.size() < 2) throw ValidationError("network needs at least one dense layer");
}

inline Count recnet_cycles_quads(const RecNetShape& net, const QuadsSpec& spec) {
  validate(net);
  Count total = net.embedding_lookup_cycles;
  for (std::size_t i = 0; i + 1 < net.widths.size(); ++i) {
    total += dense_layer_cycles(net.widths[i], net.widths[i + 1], spec);
  }
  return total;
}

/// Dense layer as a batch-1 GEMM: M = 1, K = inputs, N = outputs.
inline GemmWorkload dense_layer_gemm(Count n_in, Count n_out) { return {1, n_out, n_in}; }

/// Each layer runs weight-stationary on the reconfigurable array in its
/// fastest WS partitioning; the array is reconfigured between layers.
inline Count recnet_cycles_on_systolic(const RecNetShape& net, const ArrayGeometry& geometry) {
  validate(net);
  const ConfigSpace space(geometry);
  Count total = net.embedding_lookup_cycles;
  for (std::size_t i = 0; i + 1 < net.widths.size(); ++i) {
    const auto w = dense_layer_gemm(net.widths[i], net.widths[i + 1]);
    Count best = -1;
    for (const auto& cfg : space) {
      if (cfg.dataflow != Dataflow::WS) continue;
      const Count c = simulate_config(w, cfg, ReadMode::Collated, {}, geometry).cycles;
      if (best < 0 || c < best) best = c;
    }
    total += best;
  }
  return total;
}

/// Same network on one unpartitioned rows x cols WS array.
inline Count recnet_cycles_on_monolithic(const RecNetShape& net, Count rows, Count cols) {
  validate(net);
  Count total = net.embedding_lookup_cycles;
  for (std::size_t i = 0; i + 1 < net.widths.size(); ++i) {
    total += gemm_cycles(dense_layer_gemm(net.widths[i], net.widths[i + 1]), rows, cols, Dataflow::WS);
  }
  return total;
}

}  // namespace sara
