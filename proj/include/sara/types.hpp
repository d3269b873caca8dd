#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sara {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration or workload violates a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or mismatched file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

using Count = std::int64_t;

/// One GEMM: C[m x n] = A[m x k] * B[k x n].
struct GemmWorkload {
  Count m = 1;
  Count n = 1;
  Count k = 1;

  friend bool operator==(const GemmWorkload&, const GemmWorkload&) = default;
};

inline void validate(const GemmWorkload& w) {
  if (w.m < 1 || w.n < 1 || w.k < 1) {
    throw ValidationError("workload dimensions must be >= 1, got (" + std::to_string(w.m) + "," +
                          std::to_string(w.n) + "," + std::to_string(w.k) + ")");
  }
}

// Enumerator order is the canonical order used for class ids.
enum class Dataflow : std::uint8_t { OS = 0, WS = 1, IS = 2 };

inline constexpr Dataflow kAllDataflows[] = {Dataflow::OS, Dataflow::WS, Dataflow::IS};

constexpr std::string_view to_string(Dataflow df) {
  switch (df) {
    case Dataflow::OS: return "OS";
    case Dataflow::WS: return "WS";
    case Dataflow::IS: return "IS";
  }
  return "?";
}

inline Dataflow parse_dataflow(std::string_view s) {
  if (s == "OS" || s == "os") return Dataflow::OS;
  if (s == "WS" || s == "ws") return Dataflow::WS;
  if (s == "IS" || s == "is") return Dataflow::IS;
  throw ValidationError("unknown dataflow '" + std::string(s) + "' (expected OS, WS or IS)");
}

/// Physical MAC grid and the edge length of one reconfigurable systolic cell.
struct ArrayGeometry {
  Count total_rows = 128;
  Count total_cols = 128;
  Count cell = 4;

  Count total_macs() const { return total_rows * total_cols; }
  Count cell_rows() const { return total_rows / cell; }
  Count cell_cols() const { return total_cols / cell; }

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

inline void validate(const ArrayGeometry& g) {
  if (g.total_rows < 1 || g.total_cols < 1 || g.cell < 1) {
    throw ValidationError("geometry dimensions must be >= 1");
  }
  if (g.total_rows % g.cell != 0 || g.total_cols % g.cell != 0) {
    throw ValidationError("cell size " + std::to_string(g.cell) + " does not divide array " +
                          std::to_string(g.total_rows) + "x" + std::to_string(g.total_cols));
  }
}

/// A uniform tiling of the array into grid_rows x grid_cols partitions of
/// part_rows x part_cols MACs each, all running the same dataflow.
struct ArrayConfig {
  Count grid_rows = 1;
  Count grid_cols = 1;
  Count part_rows = 1;
  Count part_cols = 1;
  Dataflow dataflow = Dataflow::OS;

  bool monolithic() const { return grid_rows == 1 && grid_cols == 1; }

  friend bool operator==(const ArrayConfig&, const ArrayConfig&) = default;
};

inline std::string to_string(const ArrayConfig& c) {
  return std::to_string(c.grid_rows) + "," + std::to_string(c.grid_cols) + "," +
         std::to_string(c.part_rows) + "," + std::to_string(c.part_cols) + "," +
         std::string(to_string(c.dataflow));
}

struct SimReport {
  Count cycles = 0;
  Count reads_a = 0;
  Count reads_b = 0;
  Count reads_out = 0;
  Count writes_out = 0;
  Count mac_ops = 0;
  double energy = 0.0;
  double utilization = 0.0;

  Count operand_reads() const { return reads_a + reads_b; }
  Count total_reads() const { return reads_a + reads_b + reads_out; }
};

/// Energy per event in abstract units. The defaults are placeholders; only
/// ratios between configurations are meaningful.
struct EnergyParams {
  double e_mac = 1.0;
  double e_read = 4.0;
  double e_write = 4.0;
  double p_leak = 0.05;  // per MAC unit per cycle
};

inline void validate(const EnergyParams& p) {
  if (p.e_mac < 0 || p.e_read < 0 || p.e_write < 0 || p.p_leak < 0) {
    throw ValidationError("energy parameters must be non-negative");
  }
}

constexpr Count ceil_div(Count a, Count b) { return (a + b - 1) / b; }

}  // namespace sara
