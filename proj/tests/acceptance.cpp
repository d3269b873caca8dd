// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Tolerances are pinned here, next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "sara/sara.hpp"

using namespace sara;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Every (R', C', T, dataflow) fold on arrays up to 8x8 with T up to 12 is
// event-simulated once; GEMM-level checks reuse this table.
class FoldTable {
 public:
  static constexpr Count kMaxSide = 8, kMaxT = 12;

  FoldTable() {
    for (auto df : kAllDataflows)
      for (Count r = 1; r <= kMaxSide; ++r)
        for (Count c = 1; c <= kMaxSide; ++c)
          for (Count t = 1; t <= kMaxT; ++t) traces_[{r, c, t, df}] = simulate_fold({r, c, t}, df);
  }

  const FoldTrace& at(Count r, Count c, Count t, Dataflow df) const { return traces_.at({r, c, t, df}); }
  const auto& all() const { return traces_; }

 private:
  std::map<std::tuple<Count, Count, Count, Dataflow>, FoldTrace> traces_;
};

struct EventTotals {
  Count cycles = 0;
  GemmTraffic traffic;
};

EventTotals event_gemm(const FoldTable& folds, const GemmWorkload& w, Count rows, Count cols, Dataflow df) {
  const auto md = mapped_dims(w, df);
  Count row_stream = 0, col_stream = 0, drained = 0, cycles = 0;
  for (Count r0 = 0; r0 < md.rows; r0 += rows) {
    for (Count c0 = 0; c0 < md.cols; c0 += cols) {
      const auto& t = folds.at(std::min(rows, md.rows - r0), std::min(cols, md.cols - c0), md.temporal, df);
      cycles += t.cycles;
      row_stream += t.reads_row_operand;
      col_stream += t.reads_col_operand;
      drained += t.outputs_drained;
    }
  }
  EventTotals out{cycles, {}};
  switch (df) {
    case Dataflow::OS: out.traffic = {row_stream, col_stream, 0, drained}; break;
    case Dataflow::WS: out.traffic = {row_stream, col_stream, drained - w.m * w.n, drained}; break;
    case Dataflow::IS: out.traffic = {col_stream, row_stream, drained - w.m * w.n, drained}; break;
  }
  return out;
}

Verdict oracle_equivalence() {
  const auto t0 = Clock::now();
  const FoldTable folds;
  Count fold_cases = 0, fold_mismatch = 0;
  for (const auto& [key, trace] : folds.all()) {
    const auto [r, c, t, df] = key;
    ++fold_cases;
    if (trace.cycles != fold_cycles(r, c, t)) ++fold_mismatch;
  }

  // Monolithic arrays of every shape up to 8x8.
  Count gemm_cases = 0, gemm_mismatch = 0;
  for (Count rows = 1; rows <= 8; ++rows)
    for (Count cols = 1; cols <= 8; ++cols)
      for (auto df : kAllDataflows)
        for (Count m = 1; m <= 12; ++m)
          for (Count n = 1; n <= 12; ++n)
            for (Count k = 1; k <= 12; ++k) {
              const GemmWorkload w{m, n, k};
              const auto ev = event_gemm(folds, w, rows, cols, df);
              ++gemm_cases;
              if (ev.cycles != gemm_cycles(w, rows, cols, df) || !(ev.traffic == gemm_reads(w, rows, cols, df)))
                ++gemm_mismatch;
            }

  // Partitioned configurations of 2x2 .. 8x8 arrays with 2x2 cells: without
  // collation, the whole-array report is the slowest tile and summed traffic.
  Count config_cases = 0, config_mismatch = 0;
  for (Count tr = 2; tr <= 8; tr += 2)
    for (Count tc = 2; tc <= 8; tc += 2) {
      const ConfigSpace space({tr, tc, 2});
      for (const auto& cfg : space)
        for (Count m = 1; m <= 12; ++m)
          for (Count n = 1; n <= 12; ++n)
            for (Count k = 1; k <= 12; ++k) {
              const GemmWorkload w{m, n, k};
              EventTotals ref;
              for (const auto& tile : partition_workload(w, cfg).tiles) {
                const auto ev = event_gemm(folds, tile.chunk, cfg.part_rows, cfg.part_cols, cfg.dataflow);
                ref.cycles = std::max(ref.cycles, ev.cycles);
                ref.traffic.reads_a += ev.traffic.reads_a;
                ref.traffic.reads_b += ev.traffic.reads_b;
                ref.traffic.reads_out += ev.traffic.reads_out;
                ref.traffic.writes_out += ev.traffic.writes_out;
              }
              const auto plan = partition_workload(w, cfg);
              if (cfg.dataflow != Dataflow::OS) {
                ref.traffic.reads_out += (plan.active_grid_rows - 1) * m * n;
                ref.traffic.writes_out += (plan.active_grid_rows - 1) * m * n;
              }
              const auto got = simulate_config(w, cfg, ReadMode::Replicated, {}, space.geometry());
              ++config_cases;
              if (got.cycles != ref.cycles || got.reads_a != ref.traffic.reads_a ||
                  got.reads_b != ref.traffic.reads_b || got.reads_out != ref.traffic.reads_out ||
                  got.writes_out != ref.traffic.writes_out)
                ++config_mismatch;
            }
    }

  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << fold_cases << " folds (" << fold_mismatch << " mismatches), " << gemm_cases << " monolithic GEMMs ("
    << gemm_mismatch << "), " << config_cases << " partitioned GEMMs (" << config_mismatch << "), " << secs << " s";
  return {fold_cases == 2304 && fold_mismatch == 0 && gemm_mismatch == 0 && config_mismatch == 0 && secs < 60.0,
          d.str()};
}

Verdict reads_lower_bound() {
  Rng rng(11);
  const ConfigSpace spaces[] = {ConfigSpace({128, 128, 4}), ConfigSpace({64, 64, 4}), ConfigSpace({16, 16, 4})};
  Count violations = 0;
  for (int i = 0; i < 10'000; ++i) {
    const auto& space = spaces[rng.below(3)];
    const GemmWorkload w{rng.uniform_int(1, 2048), rng.uniform_int(1, 2048), rng.uniform_int(1, 2048)};
    const auto& cfg = space.at(static_cast<ClassId>(rng.below(space.size())));
    const auto mode = rng.below(2) ? ReadMode::Collated : ReadMode::Replicated;
    const auto r = simulate_config(w, cfg, mode, {}, space.geometry());
    if (r.operand_reads() < min_reads(w)) ++violations;
  }
  return {violations == 0, "10000 triples, " + std::to_string(violations) + " violations"};
}

Verdict motivation() {
  const ArrayGeometry g{128, 128, 4};
  const GemmWorkload w{256, 256, 64};
  const ArrayConfig mono{1, 1, 128, 128, Dataflow::OS};
  const ArrayConfig split{4, 4, 32, 32, Dataflow::OS};
  const auto m = simulate_config(w, mono, ReadMode::Replicated, {}, g);
  const auto rep = simulate_config(w, split, ReadMode::Replicated, {}, g);
  const auto col = simulate_config(w, split, ReadMode::Collated, {}, g);
  const double read_ratio = static_cast<double>(rep.operand_reads()) / static_cast<double>(m.operand_reads());
  const double speedup = static_cast<double>(m.cycles) / static_cast<double>(rep.cycles);
  std::ostringstream d;
  d << "replicated/monolithic reads " << read_ratio << " (want 4.0), cycles " << m.cycles << "/" << rep.cycles << " = "
    << speedup << " (want [1.5, 3.5]), collated reads " << col.operand_reads() << " vs " << m.operand_reads();
  const bool pass = rep.operand_reads() == 4 * m.operand_reads() && speedup >= 1.5 && speedup <= 3.5 &&
                    col.operand_reads() == m.operand_reads();
  return {pass, d.str()};
}

Verdict recommender_quality() {
  const auto t0 = Clock::now();
  DatasetSpec spec;  // 50,000 samples, dims in [1, 1024], 64x64 array with 4x4 cells
  const ConfigSpace space(spec.geometry);
  const auto data = gen_dataset(spec, {}, 0);
  TrainConfig cfg;  // 30 epochs, batch 32, 90:10 split
  const auto split = split_dataset(data, cfg.train_fraction, cfg.seed);
  const auto model = train(split.train, split.test, space, cfg).model;
  const auto m = evaluate(model, split.test, space, spec.mode);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << space.size() << " classes, " << m.samples << " test samples: accuracy " << m.accuracy << " (>= 0.80), geomean "
    << m.geomean_ratio << " (>= 0.97), tail " << m.tail_fraction << " (<= 0.02), " << secs << " s";
  return {space.size() == 75 && m.accuracy >= 0.80 && m.geomean_ratio >= 0.97 && m.tail_fraction <= 0.02 &&
              secs <= 3600.0,
          d.str()};
}

Verdict gradient_check() {
  const auto t0 = Clock::now();
  Rng rng(99);
  const double step = 1e-5;  // near cbrt(machine epsilon) for central differences
  int trials = 0, failed = 0;
  double worst = 0.0;
  while (trials < 100) {
    const ModelDims dims{static_cast<Count>(4 + rng.below(8)), static_cast<Count>(1 + rng.below(4)),
                         static_cast<Count>(2 + rng.below(7)), static_cast<Count>(2 + rng.below(6)), rng.below(2) == 1};
    BasicRecModel<double> model(dims);
    for (auto& p : model.params()) p = rng.normal(0.0, 0.5);
    std::vector<Example> batch(1 + rng.below(8));
    for (auto& ex : batch) {
      ex.workload = {rng.uniform_int(1, dims.vocab + 2), rng.uniform_int(1, dims.vocab + 2),
                     rng.uniform_int(1, dims.vocab + 2)};
      ex.label = static_cast<ClassId>(rng.below(static_cast<std::uint64_t>(dims.classes)));
    }
    // Skip draws that put a hidden pre-activation near the ReLU kink.
    double nearest = 1e300;
    ForwardState<double> st;
    for (const auto& ex : batch) {
      forward_into(model, ex.workload, st);
      for (double z : st.pre_hidden) nearest = std::min(nearest, std::abs(z));
    }
    if (nearest < 1e-3) continue;
    ++trials;

    std::vector<double> grads, scratch;
    loss_and_grads(model, batch, grads);
    auto params = model.params();
    bool ok = true;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + step;
      const double up = loss_and_grads(model, batch, scratch);
      params[i] = saved - step;
      const double down = loss_and_grads(model, batch, scratch);
      params[i] = saved;
      const double numeric = (up - down) / (2 * step);
      const double scale = std::max(std::abs(numeric), std::abs(grads[i]));
      if (scale < 1e-7) {
        if (std::abs(numeric - grads[i]) > 1e-9) ok = false;
      } else {
        const double rel = std::abs(numeric - grads[i]) / scale;
        worst = std::max(worst, rel);
        if (rel >= 1e-4) ok = false;
      }
    }
    if (!ok) ++failed;
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << trials << " models, " << failed << " failed, worst relative error " << worst << ", " << secs << " s";
  return {failed == 0 && secs < 60.0, d.str()};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SARA_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return WEXITSTATUS(raw);
}

Verdict determinism() {
  const auto dir = fs::temp_directory_path() / "sara_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto p = [&](const std::string& name) { return (dir / name).string(); };
  const auto log = dir / "log.txt";
  int status = run_cli("enumerate --rows 64 --cols 64 --cell 4 --out " + p("space.json"), log);
  const std::string gen = "gen-dataset --samples 5000 --dim-max 1024 --seed 42 --space " + p("space.json") + " ";
  status |= run_cli(gen + "--jobs 1 --out " + p("a.csv"), log);
  status |= run_cli(gen + "--jobs 1 --out " + p("b.csv"), log);
  status |= run_cli(gen + "--jobs 8 --out " + p("c.csv"), log);
  const std::string trn = "train --data " + p("a.csv") + " --space " + p("space.json") + " --epochs 3 --seed 7 ";
  status |= run_cli(trn + "--out " + p("m1.bin") + " --metrics " + p("h1.csv"), log);
  status |= run_cli(trn + "--out " + p("m2.bin") + " --metrics " + p("h2.csv"), log);
  if (status != 0) return {false, "a CLI invocation failed: " + io::read_file(log)};

  const bool runs = io::read_file(p("a.csv")) == io::read_file(p("b.csv")) &&
                    io::read_file(p("a.csv.meta.json")) == io::read_file(p("b.csv.meta.json"));
  const bool jobs = io::read_file(p("a.csv")) == io::read_file(p("c.csv")) &&
                    io::read_file(p("a.csv.meta.json")) == io::read_file(p("c.csv.meta.json"));
  const bool model = io::read_file(p("m1.bin")) == io::read_file(p("m2.bin")) &&
                     io::read_file(p("h1.csv")) == io::read_file(p("h2.csv"));
  fs::remove_all(dir);
  std::ostringstream d;
  d << "dataset across runs " << (runs ? "identical" : "DIFFERENT") << ", --jobs 1 vs 8 "
    << (jobs ? "identical" : "DIFFERENT") << ", model+metrics across runs " << (model ? "identical" : "DIFFERENT");
  return {runs && jobs && model, d.str()};
}

Verdict quads_endpoints() {
  const RecNetShape net;  // 48 -> 128 -> 858
  const Count quads = recnet_cycles_quads(net, {2, 256});
  const Count systolic = recnet_cycles_on_systolic(net, {32, 32, 4});
  const Count quads_1024 = recnet_cycles_quads(net, {4, 256});
  const double quads_err = std::abs(static_cast<double>(quads) - 576.0) / 576.0;
  const double sys_err = std::abs(static_cast<double>(systolic) - 1134.0) / 1134.0;
  std::ostringstream d;
  d << "QUADS P=2,U=256: " << quads << " cycles (576 +-20%: " << quads_err * 100 << "%), systolic 32x32: " << systolic
    << " cycles (1134 +-25%: " << sys_err * 100 << "%), QUADS at 1024 multipliers: " << quads_1024;
  return {quads_err <= 0.20 && sys_err <= 0.25 && systolic > quads_1024, d.str()};
}

Verdict mux_vector() {
  const ConfigSpace space({128, 128, 4});
  bool sizes = true;
  for (const auto& cfg : space) sizes = sizes && mux_bitvector(space.geometry(), cfg).size() == 3968;
  const auto mono = mux_bitvector(space.geometry(), space.at(space.monolithic_class(Dataflow::OS)));
  std::ostringstream d;
  d << space.size() << " configs all " << (sizes ? "3968" : "NOT 3968") << " bits, monolithic popcount "
    << popcount(mono);
  return {sizes && popcount(mono) == 0, d.str()};
}

Verdict oracle_dominance() {
  DatasetSpec spec;
  spec.sample_count = 1000;
  spec.seed = 2025;
  const ConfigSpace space(spec.geometry);
  std::vector<NamedWorkload> workloads;
  for (const auto& s : gen_dataset(spec, {}, 0)) workloads.push_back({"w", s.workload});
  const RunContext ctx{space, nullptr, spec.mode, {}};
  const Count oracle = run_sequence(workloads, Strategy::oracle(), ctx).totals.cycles;
  const Count mono = run_sequence(workloads, Strategy::monolithic(), ctx).totals.cycles;
  Count beaten = 0, best_fixed = std::numeric_limits<Count>::max();
  for (ClassId id = 0; id < static_cast<ClassId>(space.size()); ++id) {
    const Count c = run_sequence(workloads, Strategy::fixed(id), ctx).totals.cycles;
    best_fixed = std::min(best_fixed, c);
    if (c < oracle) ++beaten;
  }
  std::ostringstream d;
  d << "oracle " << oracle << " cycles, monolithic " << mono << ", best fixed " << best_fixed << ", fixed strategies "
    << "beating oracle: " << beaten;
  return {oracle <= mono && beaten == 0, d.str()};
}

}  // namespace

int main() {
  const std::pair<const char*, Verdict (*)()> criteria[] = {
      {"oracle equivalence", oracle_equivalence},   {"reads lower bound", reads_lower_bound},
      {"motivation", motivation},                   {"recommender quality", recommender_quality},
      {"gradient correctness", gradient_check},     {"determinism", determinism},
      {"QUADS endpoints", quads_endpoints},         {"mux vector", mux_vector},
      {"oracle-strategy dominance", oracle_dominance},
  };
  int failures = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << index << " " << name << ": " << v.detail << std::endl;
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
