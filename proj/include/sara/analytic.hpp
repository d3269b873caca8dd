#pragma once

#include "sara/types.hpp"

namespace sara {

enum class GemmDim : std::uint8_t { M, N, K };

/// Which GEMM dimension lands on array rows, array columns and time.
struct DataflowMapping {
  GemmDim row_dim;
  GemmDim col_dim;
  GemmDim temporal_dim;
};

constexpr DataflowMapping mapping_for(Dataflow df) {
  switch (df) {
    case Dataflow::OS: return {GemmDim::M, GemmDim::N, GemmDim::K};
    case Dataflow::WS: return {GemmDim::K, GemmDim::N, GemmDim::M};
    case Dataflow::IS: return {GemmDim::K, GemmDim::M, GemmDim::N};
  }
  return {GemmDim::M, GemmDim::N, GemmDim::K};
}

constexpr Count dim_of(const GemmWorkload& w, GemmDim d) {
  switch (d) {
    case GemmDim::M: return w.m;
    case GemmDim::N: return w.n;
    case GemmDim::K: return w.k;
  }
  return 0;
}

constexpr void set_dim(GemmWorkload& w, GemmDim d, Count v) {
  switch (d) {
    case GemmDim::M: w.m = v; break;
    case GemmDim::N: w.n = v; break;
    case GemmDim::K: w.k = v; break;
  }
}

struct MappedDims {
  Count rows;
  Count cols;
  Count temporal;
};

constexpr MappedDims mapped_dims(const GemmWorkload& w, Dataflow df) {
  const auto mp = mapping_for(df);
  return {dim_of(w, mp.row_dim), dim_of(w, mp.col_dim), dim_of(w, mp.temporal_dim)};
}

/// Latency of one fold; identical for all dataflows.
constexpr Count fold_cycles(Count used_rows, Count used_cols, Count temporal) {
  return 2 * used_rows + used_cols + temporal - 2;
}

/// Cycles to run `w` on one rows x cols array. Folds are serialized and each
/// pays its own fill and drain; fill_latency is charged once per GEMM.
///
/// Summing fold_cycles over the FR x FC fold grid collapses to
///   2*FC*D_r + FR*D_c + FR*FC*(D_t - 2)
/// because the used rows over the row folds sum to D_r (and likewise for
/// columns).
constexpr Count gemm_cycles(const GemmWorkload& w, Count rows, Count cols, Dataflow df,
                            Count fill_latency = 0) {
  const auto d = mapped_dims(w, df);
  const Count fr = ceil_div(d.rows, rows);
  const Count fc = ceil_div(d.cols, cols);
  return fill_latency + 2 * fc * d.rows + fr * d.cols + fr * fc * (d.temporal - 2);
}

struct GemmTraffic {
  Count reads_a = 0;
  Count reads_b = 0;
  Count reads_out = 0;
  Count writes_out = 0;

  friend bool operator==(const GemmTraffic&, const GemmTraffic&) = default;
};

/// SRAM word accesses for `w` on one rows x cols array. Operands are counted
/// at injection; WS/IS re-read and re-write partial outputs across K folds.
constexpr GemmTraffic gemm_reads(const GemmWorkload& w, Count rows, Count cols, Dataflow df) {
  const auto d = mapped_dims(w, df);
  const Count fr = ceil_div(d.rows, rows);
  const Count fc = ceil_div(d.cols, cols);
  const Count mn = w.m * w.n;
  switch (df) {
    case Dataflow::OS:
      return {fc * w.m * w.k, fr * w.n * w.k, 0, mn};
    case Dataflow::WS:
      return {fc * w.m * w.k, w.k * w.n, (fr - 1) * mn, fr * mn};
    case Dataflow::IS:
      return {w.k * w.m, fc * w.n * w.k, (fr - 1) * mn, fr * mn};
  }
  return {};
}

/// Every element of A and B fetched exactly once.
constexpr Count min_reads(const GemmWorkload& w) { return w.m * w.k + w.k * w.n; }

inline double energy(const GemmTraffic& t, Count mac_ops, const EnergyParams& p, Count total_macs,
                     Count cycles) {
  return p.e_mac * static_cast<double>(mac_ops) +
         p.e_read * static_cast<double>(t.reads_a + t.reads_b + t.reads_out) +
         p.e_write * static_cast<double>(t.writes_out) +
         p.p_leak * static_cast<double>(total_macs) * static_cast<double>(cycles);
}

inline double energy(const SimReport& r, const EnergyParams& p, Count total_macs) {
  return energy({r.reads_a, r.reads_b, r.reads_out, r.writes_out}, r.mac_ops, p, total_macs,
                r.cycles);
}

constexpr double edp(double energy, Count cycles) { return energy * static_cast<double>(cycles); }

inline double utilization(Count mac_ops, Count total_macs, Count cycles) {
  if (cycles <= 0) return 0.0;
  return static_cast<double>(mac_ops) /
         (static_cast<double>(total_macs) * static_cast<double>(cycles));
}

/// Whole-GEMM report for a single monolithic array of rows x cols MACs.
inline SimReport simulate_monolithic(const GemmWorkload& w, Count rows, Count cols, Dataflow df,
                                     const EnergyParams& params, Count fill_latency = 0) {
  validate(w);
  SimReport r;
  r.cycles = gemm_cycles(w, rows, cols, df, fill_latency);
  const auto t = gemm_reads(w, rows, cols, df);
  r.reads_a = t.reads_a;
  r.reads_b = t.reads_b;
  r.reads_out = t.reads_out;
  r.writes_out = t.writes_out;
  r.mac_ops = w.m * w.n * w.k;
  r.energy = energy(t, r.mac_ops, params, rows * cols, r.cycles);
  r.utilization = utilization(r.mac_ops, rows * cols, r.cycles);
  return r;
}

}  // namespace sara
