#pragma once

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sara/config_space.hpp"
#include "sara/io.hpp"
#include "sara/partition.hpp"
#include "sara/rng.hpp"

namespace sara {

enum class Objective : std::uint8_t { Cycles, Energy };

struct BestConfig {
  ClassId class_id = 0;
  ArrayConfig config;
  SimReport report;
};

/// Exhaustive search over the space. Ties go to the lowest class id, so the
/// answer does not depend on evaluation order.
inline BestConfig best_config(const GemmWorkload& w, const ConfigSpace& space, ReadMode mode,
                              const EnergyParams& params = {}, Objective objective = Objective::Cycles) {
  if (space.size() == 0) throw ValidationError("empty configuration space");
  BestConfig best;
  bool have = false;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& cfg = space.configs()[i];
    auto r = simulate_config(w, cfg, mode, params, space.geometry());
    const bool better = !have || (objective == Objective::Cycles ? r.cycles < best.report.cycles
                                                                 : r.energy < best.report.energy);
    if (better) {
      best = {static_cast<ClassId>(i), cfg, r};
      have = true;
    }
  }
  return best;
}

struct LabeledSample {
  GemmWorkload workload;
  ClassId class_id = 0;
  Count oracle_cycles = 0;
  double oracle_energy = 0.0;
};

struct DatasetSpec {
  Count sample_count = 50'000;
  Count dim_max = 1024;
  std::uint64_t seed = 42;
  ArrayGeometry geometry{64, 64, 4};
  ReadMode mode = ReadMode::Collated;
  Objective objective = Objective::Cycles;
};

inline void validate(const DatasetSpec& s) {
  if (s.sample_count < 1) throw ValidationError("sample count must be >= 1");
  if (s.dim_max < 1) throw ValidationError("dim_max must be >= 1");
  validate(s.geometry);
}

/// Workloads in draw order: m, n, k for each sample, each uniform on
/// [1, dim_max] from Rng(seed).
inline std::vector<GemmWorkload> draw_workloads(Count count, Count dim_max, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GemmWorkload> out(static_cast<std::size_t>(count));
  for (auto& w : out) {
    w.m = rng.uniform_int(1, dim_max);
    w.n = rng.uniform_int(1, dim_max);
    w.k = rng.uniform_int(1, dim_max);
  }
  return out;
}

/// Labels each workload with its oracle configuration. Work is split into
/// contiguous index ranges across `jobs` threads; each sample is labeled
/// independently, so the result is identical for every job count.
inline std::vector<LabeledSample> label_workloads(const std::vector<GemmWorkload>& workloads,
                                                  const ConfigSpace& space, ReadMode mode,
                                                  const EnergyParams& params = {},
                                                  Objective objective = Objective::Cycles,
                                                  unsigned jobs = 1) {
  std::vector<LabeledSample> out(workloads.size());
  auto label_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto best = best_config(workloads[i], space, mode, params, objective);
      out[i] = {workloads[i], best.class_id, best.report.cycles, best.report.energy};
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, workloads.size()))));
  if (jobs == 1) {
    label_range(0, workloads.size());
    return out;
  }
  std::vector<std::thread> workers;
  const std::size_t per = (workloads.size() + jobs - 1) / jobs;
  for (unsigned j = 0; j < jobs; ++j) {
    const std::size_t lo = std::min(workloads.size(), j * per);
    const std::size_t hi = std::min(workloads.size(), lo + per);
    workers.emplace_back(label_range, lo, hi);
  }
  for (auto& t : workers) t.join();
  return out;
}

inline std::vector<LabeledSample> gen_dataset(const DatasetSpec& spec, const EnergyParams& params = {},
                                              unsigned jobs = 1) {
  validate(spec);
  const ConfigSpace space(spec.geometry);
  return label_workloads(draw_workloads(spec.sample_count, spec.dim_max, spec.seed), space, spec.mode,
                         params, spec.objective, jobs);
}

// ---- dataset files -------------------------------------------------------

inline const std::vector<std::string> kDatasetHeader{"m", "n", "k", "class_id", "oracle_cycles"};

inline std::string dataset_csv(const std::vector<LabeledSample>& samples) {
  std::ostringstream os;
  os << "m,n,k,class_id,oracle_cycles\n";
  for (const auto& s : samples) {
    os << s.workload.m << ',' << s.workload.n << ',' << s.workload.k << ',' << s.class_id << ','
       << s.oracle_cycles << '\n';
  }
  return os.str();
}

inline std::vector<LabeledSample> parse_dataset_csv(std::string_view text, std::string_view source = "dataset") {
  std::vector<LabeledSample> out;
  for (const auto& row : io::read_csv(text, kDatasetHeader, source)) {
    LabeledSample s;
    s.workload = {io::parse_count(row[0], "m"), io::parse_count(row[1], "n"), io::parse_count(row[2], "k")};
    validate(s.workload);
    s.class_id = static_cast<ClassId>(io::parse_count(row[3], "class_id"));
    s.oracle_cycles = io::parse_count(row[4], "oracle_cycles");
    out.push_back(s);
  }
  return out;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p += ".meta.json";
  return p;
}

inline nlohmann::json dataset_meta(const DatasetSpec& spec, const ConfigSpace& space) {
  return {{"sample_count", spec.sample_count},
          {"dim_max", spec.dim_max},
          {"seed", spec.seed},
          {"geometry",
           {{"rows", spec.geometry.total_rows},
            {"cols", spec.geometry.total_cols},
            {"cell", spec.geometry.cell}}},
          {"mode", std::string(to_string(spec.mode))},
          {"objective", spec.objective == Objective::Cycles ? "cycles" : "energy"},
          {"space_hash", hash_hex(space.hash())}};
}

/// Writes the CSV and its metadata sidecar, each atomically.
inline void write_dataset(const std::filesystem::path& csv, const std::vector<LabeledSample>& samples,
                          const DatasetSpec& spec, const ConfigSpace& space) {
  io::write_file_atomic(csv, dataset_csv(samples));
  io::write_file_atomic(sidecar_path(csv), dataset_meta(spec, space).dump(2) + "\n");
}

struct LoadedDataset {
  std::vector<LabeledSample> samples;
  std::string space_hash;  // empty when no sidecar exists
};

inline LoadedDataset read_dataset(const std::filesystem::path& csv) {
  LoadedDataset d;
  d.samples = parse_dataset_csv(io::read_file(csv), csv.string());
  const auto meta = sidecar_path(csv);
  if (std::filesystem::exists(meta)) {
    try {
      d.space_hash = nlohmann::json::parse(io::read_file(meta)).at("space_hash").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(meta.string() + ": " + e.what());
    }
  }
  return d;
}

}  // namespace sara
