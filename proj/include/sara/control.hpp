#pragma once

// Per-workload control loop: pick a configuration, derive the bypass-mux
// settings, partition the GEMM and simulate it on the partitions.

#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sara/adaptnet.hpp"
#include "sara/oracle_search.hpp"
#include "sara/quads.hpp"

namespace sara {

/// How each workload's configuration is chosen.
struct Strategy {
  enum class Kind : std::uint8_t { Recommended, Oracle, Monolithic, Fixed };
  Kind kind = Kind::Recommended;
  ClassId fixed_class = 0;  // used by Fixed

  static Strategy recommended() { return {Kind::Recommended, 0}; }
  static Strategy oracle() { return {Kind::Oracle, 0}; }
  /// Unpartitioned array with the fastest of the three dataflows.
  static Strategy monolithic() { return {Kind::Monolithic, 0}; }
  static Strategy fixed(ClassId id) { return {Kind::Fixed, id}; }

  std::string name() const {
    switch (kind) {
      case Kind::Recommended: return "recommended";
      case Kind::Oracle: return "oracle";
      case Kind::Monolithic: return "monolithic";
      case Kind::Fixed: return "fixed:" + std::to_string(fixed_class);
    }
    return "?";
  }

  static Strategy parse(std::string_view s) {
    if (s == "recommended") return recommended();
    if (s == "oracle") return oracle();
    if (s == "monolithic") return monolithic();
    if (s.starts_with("fixed:")) {
      return fixed(static_cast<ClassId>(io::parse_count(s.substr(6), "fixed strategy class id")));
    }
    throw ValidationError("unknown strategy '" + std::string(s) +
                          "' (expected recommended, oracle, monolithic or fixed:<id>)");
  }
};

struct RunContext {
  const ConfigSpace& space;
  const RecModel* model = nullptr;  // required for Strategy::Recommended
  ReadMode mode = ReadMode::Collated;
  EnergyParams params{};
};

struct WorkloadResult {
  std::string name;
  GemmWorkload workload;
  ClassId class_id = 0;
  ArrayConfig config;
  MuxBits mux;
  SimReport report;
};

inline ClassId choose_class(const GemmWorkload& w, const Strategy& s, const RunContext& ctx) {
  switch (s.kind) {
    case Strategy::Kind::Recommended:
      if (!ctx.model) throw ValidationError("the recommended strategy needs a model");
      return predict(*ctx.model, w);
    case Strategy::Kind::Oracle:
      return best_config(w, ctx.space, ctx.mode, ctx.params).class_id;
    case Strategy::Kind::Monolithic: {
      ClassId best = ctx.space.monolithic_class(Dataflow::OS);
      Count best_cycles = -1;
      for (Dataflow df : kAllDataflows) {
        const ClassId id = ctx.space.monolithic_class(df);
        const Count c = simulate_config(w, ctx.space.at(id), ctx.mode, ctx.params, ctx.space.geometry()).cycles;
        if (best_cycles < 0 || c < best_cycles) {
          best = id;
          best_cycles = c;
        }
      }
      return best;
    }
    case Strategy::Kind::Fixed:
      ctx.space.at(s.fixed_class);
      return s.fixed_class;
  }
  return 0;
}

inline void check_model_matches(const RunContext& ctx) {
  if (!ctx.model) return;
  if (ctx.model->space_hash() != ctx.space.hash() ||
      ctx.model->dims().classes != static_cast<Count>(ctx.space.size())) {
    throw ValidationError("model was trained for a different configuration space");
  }
}

inline WorkloadResult run_workload(const GemmWorkload& w, const Strategy& s, const RunContext& ctx,
                                   std::string name = {}) {
  check_model_matches(ctx);
  WorkloadResult r;
  r.name = std::move(name);
  r.workload = w;
  r.class_id = choose_class(w, s, ctx);
  r.config = ctx.space.at(r.class_id);
  r.mux = mux_bitvector(ctx.space.geometry(), r.config);
  r.report = simulate_config(w, r.config, ctx.mode, ctx.params, ctx.space.geometry());
  return r;
}

struct NamedWorkload {
  std::string name;
  GemmWorkload workload;
};

struct SequenceTotals {
  Count cycles = 0;
  Count reads = 0;  // operand and output reads
  Count writes = 0;
  double energy = 0.0;

  /// The sequence runs back to back, so its delay is the summed cycles.
  double edp() const { return sara::edp(energy, cycles); }
};

struct SequenceResult {
  Strategy strategy;
  std::vector<WorkloadResult> items;
  SequenceTotals totals;
};

inline SequenceResult run_sequence(const std::vector<NamedWorkload>& workloads, const Strategy& s,
                                   const RunContext& ctx) {
  check_model_matches(ctx);
  SequenceResult out{s, {}, {}};
  out.items.reserve(workloads.size());
  for (const auto& nw : workloads) {
    auto r = run_workload(nw.workload, s, ctx, nw.name);
    out.totals.cycles += r.report.cycles;
    out.totals.reads += r.report.total_reads();
    out.totals.writes += r.report.writes_out;
    out.totals.energy += r.report.energy;
    out.items.push_back(std::move(r));
  }
  return out;
}

/// Recommender evaluation cost reported alongside a run; it overlaps the
/// previous layer and is not added to GEMM cycles.
inline Count recommendation_latency(const RecModel& model, const QuadsSpec& spec) {
  RecNetShape net;
  net.widths = {model.dims().input_width(), model.dims().hidden, model.dims().classes};
  return recnet_cycles_quads(net, spec);
}

// ---- workload files ----------------------------------------------------------

inline std::vector<NamedWorkload> parse_workloads_csv(std::string_view text, std::string_view source = "workloads") {
  std::vector<NamedWorkload> out;
  for (const auto& row : io::read_csv(text, {"name", "m", "n", "k"}, source)) {
    NamedWorkload nw{row[0], {io::parse_count(row[1], "m"), io::parse_count(row[2], "n"), io::parse_count(row[3], "k")}};
    validate(nw.workload);
    out.push_back(std::move(nw));
  }
  return out;
}

inline std::vector<NamedWorkload> read_workloads(const std::filesystem::path& path) {
  return parse_workloads_csv(io::read_file(path), path.string());
}

// ---- report rows ---------------------------------------------------------------

inline constexpr std::string_view kReportHeader =
    "workload_id,config_id,mode,cycles,reads_a,reads_b,reads_out,writes_out,energy,utilization";

inline std::string report_row(std::string_view workload_id, ClassId config_id, ReadMode mode, const SimReport& r) {
  std::ostringstream os;
  os << workload_id << ',' << config_id << ',' << to_string(mode) << ',' << r.cycles << ',' << r.reads_a << ','
     << r.reads_b << ',' << r.reads_out << ',' << r.writes_out << ',' << io::format_double(r.energy) << ','
     << io::format_double(r.utilization);
  return os.str();
}

inline std::string sequence_csv(const SequenceResult& seq, ReadMode mode, bool with_mux = false) {
  std::ostringstream os;
  os << "strategy," << kReportHeader << (with_mux ? ",mux_hex" : "") << '\n';
  for (const auto& it : seq.items) {
    os << seq.strategy.name() << ',' << report_row(it.name, it.class_id, mode, it.report);
    if (with_mux) os << ',' << to_hex(it.mux);
    os << '\n';
  }
  return os.str();
}

inline std::string totals_csv(const std::vector<SequenceResult>& runs) {
  std::ostringstream os;
  os << "strategy,workloads,total_cycles,total_reads,total_writes,total_energy,edp\n";
  for (const auto& r : runs) {
    os << r.strategy.name() << ',' << r.items.size() << ',' << r.totals.cycles << ',' << r.totals.reads << ','
       << r.totals.writes << ',' << io::format_double(r.totals.energy) << ',' << io::format_double(r.totals.edp())
       << '\n';
  }
  return os.str();
}

}  // namespace sara
