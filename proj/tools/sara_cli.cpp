// Command-line driver: every pipeline stage reads and writes plain files so
// runs are reproducible from their flags alone.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sara/sara.hpp"

namespace {

using namespace sara;

struct GeometryFlags {
  Count rows = 128;
  Count cols = 128;
  Count cell = 4;
  std::string space_path;

  void add(CLI::App* cmd, bool with_dims) {
    cmd->add_option("--space", space_path, "Configuration space JSON (from `enumerate`)");
    if (with_dims) {
      cmd->add_option("--rows", rows, "Total MAC rows (ignored with --space)")->capture_default_str();
      cmd->add_option("--cols", cols, "Total MAC columns (ignored with --space)")->capture_default_str();
      cmd->add_option("--cell", cell, "Systolic-cell edge length (ignored with --space)")->capture_default_str();
    }
  }

  ConfigSpace space() const {
    if (!space_path.empty()) {
      try {
        return ConfigSpace::from_json(nlohmann::json::parse(io::read_file(space_path)));
      } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(space_path + ": " + e.what());
      }
    }
    return ConfigSpace({rows, cols, cell});
  }
};

std::string mode_help() { return "SRAM read accounting: replicated or collated"; }

ClassId parse_config_arg(const std::string& arg, const ConfigSpace& space) {
  if (arg.find(',') == std::string::npos) {
    const auto id = static_cast<ClassId>(io::parse_count(arg, "config id"));
    space.at(id);
    return id;
  }
  const auto f = io::split(arg, ',');
  if (f.size() != 5) throw ValidationError("--config expects an id or gr,gc,r,c,df");
  ArrayConfig cfg{io::parse_count(f[0], "gr"), io::parse_count(f[1], "gc"), io::parse_count(f[2], "r"),
                  io::parse_count(f[3], "c"), parse_dataflow(io::trim(f[4]))};
  validate_config(space.geometry(), cfg);
  return space.class_of(cfg);
}

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
  } else {
    io::write_file_atomic(path, contents);
  }
}

unsigned resolve_jobs(unsigned jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconfigurable systolic array laboratory"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // enumerate
  auto* enumerate = app.add_subcommand("enumerate", "Write the configuration space of an array as JSON");
  ArrayGeometry en_geo;
  std::string en_out;
  enumerate->add_option("--rows", en_geo.total_rows, "Total MAC rows")->capture_default_str();
  enumerate->add_option("--cols", en_geo.total_cols, "Total MAC columns")->capture_default_str();
  enumerate->add_option("--cell", en_geo.cell, "Systolic-cell edge length")->capture_default_str();
  enumerate->add_option("--out", en_out, "Output path (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate one GEMM on one configuration");
  GemmWorkload sim_w;
  std::string sim_config, sim_mode = "collated", sim_energy, sim_id = "cli";
  Count sim_fill = 0;
  bool sim_no_header = false;
  GeometryFlags sim_geo;
  simulate->add_option("--m", sim_w.m, "Rows of A and C")->required();
  simulate->add_option("--n", sim_w.n, "Columns of B and C")->required();
  simulate->add_option("--k", sim_w.k, "Contraction length")->required();
  simulate->add_option("--config", sim_config, "Class id or gr,gc,r,c,df")->required();
  simulate->add_option("--mode", sim_mode, mode_help())->capture_default_str();
  simulate->add_option("--energy", sim_energy, "Energy constants JSON {e_mac,e_read,e_write,p_leak}");
  simulate->add_option("--fill-latency", sim_fill, "Bypass-link pipeline fill cycles per GEMM")->capture_default_str();
  simulate->add_option("--workload-id", sim_id, "Value for the workload_id column")->capture_default_str();
  simulate->add_flag("--no-header", sim_no_header, "Omit the CSV header line");
  sim_geo.add(simulate, true);

  // fold
  auto* fold = app.add_subcommand("fold", "Event-simulate a single fold on one sub-array");
  FoldSpec fold_spec;
  std::string fold_df = "OS", fold_events;
  fold->add_option("--rows", fold_spec.used_rows, "Used rows R'")->required();
  fold->add_option("--cols", fold_spec.used_cols, "Used columns C'")->required();
  fold->add_option("--temporal", fold_spec.temporal_len, "Temporal stream length T")->required();
  fold->add_option("--dataflow", fold_df, "OS, WS or IS")->capture_default_str();
  fold->add_option("--events", fold_events, "Write the per-cycle event log as CSV");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Simulate every workload on every configuration");
  std::string sw_workloads, sw_mode = "collated", sw_energy, sw_out;
  unsigned sw_jobs = 1;
  GeometryFlags sw_geo;
  sweep->add_option("--workloads", sw_workloads, "Workload CSV (name,m,n,k)")->required();
  sweep->add_option("--mode", sw_mode, mode_help())->capture_default_str();
  sweep->add_option("--energy", sw_energy, "Energy constants JSON");
  sweep->add_option("--jobs", sw_jobs, "Worker threads (0 = all cores)")->capture_default_str();
  sweep->add_option("--out", sw_out, "Output CSV (default stdout)");
  sw_geo.add(sweep, true);

  // gen-dataset
  auto* gen = app.add_subcommand("gen-dataset", "Draw random GEMMs and label them with their oracle configuration");
  DatasetSpec gen_spec;
  std::string gen_mode = "collated", gen_out, gen_objective = "cycles", gen_energy;
  unsigned gen_jobs = 1;
  GeometryFlags gen_geo;
  gen_geo.rows = 64;
  gen_geo.cols = 64;
  gen->add_option("--samples", gen_spec.sample_count, "Number of workloads")->capture_default_str();
  gen->add_option("--dim-max", gen_spec.dim_max, "Upper bound of the uniform M, N, K draw")->capture_default_str();
  gen->add_option("--seed", gen_spec.seed, "PRNG seed")->capture_default_str();
  gen->add_option("--mode", gen_mode, mode_help())->capture_default_str();
  gen->add_option("--objective", gen_objective, "Label by minimum cycles or minimum energy")
      ->check(CLI::IsMember({"cycles", "energy"}))
      ->capture_default_str();
  gen->add_option("--energy", gen_energy, "Energy constants JSON");
  gen->add_option("--jobs", gen_jobs, "Worker threads (0 = all cores)")->capture_default_str();
  gen->add_option("--out", gen_out, "Dataset CSV; metadata goes to <out>.meta.json")->required();
  gen_geo.add(gen, true);

  // train
  auto* trn = app.add_subcommand("train", "Train the configuration recommender");
  TrainConfig tc;
  std::string tr_data, tr_out, tr_metrics, tr_test_out;
  GeometryFlags tr_geo;
  trn->add_option("--data", tr_data, "Dataset CSV from gen-dataset")->required();
  trn->add_option("--epochs", tc.epochs, "Training epochs")->capture_default_str();
  trn->add_option("--batch", tc.batch_size, "Minibatch size")->capture_default_str();
  trn->add_option("--lr", tc.learning_rate, "Adam learning rate")->capture_default_str();
  trn->add_option("--seed", tc.seed, "Initialization, split and shuffle seed")->capture_default_str();
  trn->add_option("--train-fraction", tc.train_fraction, "Share of samples used for training")->capture_default_str();
  trn->add_option("--embed-dim", tc.embed_dim, "Embedding width per dimension")->capture_default_str();
  trn->add_option("--hidden", tc.hidden, "Hidden layer width")->capture_default_str();
  trn->add_option("--vocab", tc.vocab, "Embedding rows (0 = largest training dimension + 1)")->capture_default_str();
  trn->add_flag("--shared-embedding", tc.shared_embedding, "Use one embedding table for M, N and K");
  trn->add_option("--out", tr_out, "Model file")->required();
  trn->add_option("--metrics", tr_metrics, "Per-epoch metrics CSV");
  trn->add_option("--test-out", tr_test_out, "Write the held-out split as a dataset CSV");
  tr_geo.add(trn, false);
  trn->get_option("--space")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Accuracy and runtime ratio of a model on a labeled dataset");
  std::string ev_model, ev_data, ev_mode = "collated", ev_energy;
  GeometryFlags ev_geo;
  ev->add_option("--model", ev_model, "Model file")->required();
  ev->add_option("--data", ev_data, "Labeled dataset CSV")->required();
  ev->add_option("--mode", ev_mode, mode_help())->capture_default_str();
  ev->add_option("--energy", ev_energy, "Energy constants JSON");
  ev_geo.add(ev, false);
  ev->get_option("--space")->required();

  // recommend
  auto* rec = app.add_subcommand("recommend", "Predict the configuration for one GEMM");
  std::string rec_model;
  GemmWorkload rec_w;
  GeometryFlags rec_geo;
  rec->add_option("--model", rec_model, "Model file")->required();
  rec->add_option("--m", rec_w.m, "Rows of A and C")->required();
  rec->add_option("--n", rec_w.n, "Columns of B and C")->required();
  rec->add_option("--k", rec_w.k, "Contraction length")->required();
  rec_geo.add(rec, false);
  rec->get_option("--space")->required();

  // run
  auto* run = app.add_subcommand("run", "Run a workload list through the control loop");
  std::string run_model, run_workloads, run_mode = "collated", run_strategy = "recommended", run_energy, run_out,
                                        run_totals;
  bool run_mux = false;
  GeometryFlags run_geo;
  run->add_option("--model", run_model, "Model file (required for the recommended strategy)");
  run->add_option("--workloads", run_workloads, "Workload CSV (name,m,n,k)")->required();
  run->add_option("--mode", run_mode, mode_help())->capture_default_str();
  run->add_option("--strategy", run_strategy, "recommended, oracle, monolithic or fixed:<id>")->capture_default_str();
  run->add_option("--energy", run_energy, "Energy constants JSON");
  run->add_option("--out", run_out, "Per-workload CSV (default stdout)");
  run->add_option("--totals", run_totals, "Aggregate CSV (default: appended to stdout)");
  run->add_flag("--mux", run_mux, "Add the bypass-mux bit vector as hex");
  run_geo.add(run, false);
  run->get_option("--space")->required();

  // quads
  auto* quads = app.add_subcommand("quads", "Estimate recommender latency on QUADS and on a systolic array");
  QuadsSpec qs;
  Count q_classes = 858, q_embed = 16, q_hidden = 128, q_rows = 32, q_cols = 32, q_cell = 4;
  quads->add_option("--units", qs.units, "1-D multiplier units P")->capture_default_str();
  quads->add_option("--mults", qs.mults_per_unit, "Multipliers per unit U")->capture_default_str();
  quads->add_option("--classes", q_classes, "Output classes")->capture_default_str();
  quads->add_option("--embed-dim", q_embed, "Embedding width per dimension")->capture_default_str();
  quads->add_option("--hidden", q_hidden, "Hidden layer width")->capture_default_str();
  quads->add_option("--array-rows", q_rows, "Systolic array rows for comparison")->capture_default_str();
  quads->add_option("--array-cols", q_cols, "Systolic array columns for comparison")->capture_default_str();
  quads->add_option("--cell", q_cell, "Systolic-cell edge length")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*enumerate) {
      emit(en_out, ConfigSpace(en_geo).to_json().dump(2) + "\n");
    } else if (*simulate) {
      const auto space = sim_geo.space();
      const auto params = sim_energy.empty() ? EnergyParams{} : io::read_energy_params(sim_energy);
      const auto mode = parse_read_mode(sim_mode);
      const ClassId id = parse_config_arg(sim_config, space);
      const auto r = simulate_config(sim_w, space.at(id), mode, params, space.geometry(), sim_fill);
      if (!sim_no_header) std::cout << kReportHeader << '\n';
      std::cout << report_row(sim_id, id, mode, r) << '\n';
    } else if (*fold) {
      EventSimOptions opts;
      opts.record_events = !fold_events.empty();
      const auto trace = simulate_fold(fold_spec, parse_dataflow(fold_df), opts);
      std::cout << "cycles,reads_row_operand,reads_col_operand,outputs_drained,mac_fires\n"
                << trace.cycles << ',' << trace.reads_row_operand << ',' << trace.reads_col_operand << ','
                << trace.outputs_drained << ',' << trace.mac_fires << '\n';
      if (opts.record_events) {
        std::ostringstream os;
        write_event_csv(os, trace);
        io::write_file_atomic(fold_events, os.str());
      }
    } else if (*sweep) {
      const auto space = sw_geo.space();
      const auto params = sw_energy.empty() ? EnergyParams{} : io::read_energy_params(sw_energy);
      const auto mode = parse_read_mode(sw_mode);
      const auto workloads = read_workloads(sw_workloads);
      std::vector<std::string> blocks(workloads.size());
      auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          std::string block;
          for (std::size_t c = 0; c < space.size(); ++c) {
            const auto r = simulate_config(workloads[i].workload, space.configs()[c], mode, params, space.geometry());
            block += report_row(workloads[i].name, static_cast<ClassId>(c), mode, r) + "\n";
          }
          blocks[i] = std::move(block);
        }
      };
      const unsigned jobs = std::min<unsigned>(resolve_jobs(sw_jobs), std::max<std::size_t>(1, workloads.size()));
      std::vector<std::thread> workers;
      const std::size_t per = (workloads.size() + jobs - 1) / jobs;
      for (unsigned j = 0; j < jobs; ++j) {
        const std::size_t lo = std::min(workloads.size(), j * per);
        workers.emplace_back(work, lo, std::min(workloads.size(), lo + per));
      }
      for (auto& t : workers) t.join();
      std::string out = std::string(kReportHeader) + "\n";
      for (const auto& b : blocks) out += b;
      emit(sw_out, out);
    } else if (*gen) {
      gen_spec.geometry = gen_geo.space().geometry();
      gen_spec.mode = parse_read_mode(gen_mode);
      gen_spec.objective = gen_objective == "energy" ? Objective::Energy : Objective::Cycles;
      const auto params = gen_energy.empty() ? EnergyParams{} : io::read_energy_params(gen_energy);
      const ConfigSpace space(gen_spec.geometry);
      const auto samples = gen_dataset(gen_spec, params, resolve_jobs(gen_jobs));
      write_dataset(gen_out, samples, gen_spec, space);
    } else if (*trn) {
      const auto space = tr_geo.space();
      const auto data = read_dataset(tr_data);
      if (!data.space_hash.empty() && data.space_hash != hash_hex(space.hash())) {
        throw ValidationError(tr_data + " was labeled for configuration space " + data.space_hash + ", not " +
                              hash_hex(space.hash()));
      }
      if (data.samples.empty()) throw ValidationError(tr_data + " contains no samples");
      const auto split = split_dataset(data.samples, tc.train_fraction, tc.seed);
      const auto result = train(split.train, split.test, space, tc);
      save(result.model, tr_out);
      if (!tr_metrics.empty()) io::write_file_atomic(tr_metrics, metrics_csv(result.history));
      if (!tr_test_out.empty()) io::write_file_atomic(tr_test_out, dataset_csv(split.test));
      if (!result.history.empty()) {
        const auto& last = result.history.back();
        std::cerr << "epoch " << last.epoch << ": train_acc " << last.train_acc << ", val_acc " << last.val_acc
                  << '\n';
      }
    } else if (*ev) {
      const auto space = ev_geo.space();
      const auto model = load(ev_model, space);
      const auto data = read_dataset(ev_data);
      const auto params = ev_energy.empty() ? EnergyParams{} : io::read_energy_params(ev_energy);
      const auto m = evaluate(model, data.samples, space, parse_read_mode(ev_mode), params);
      std::cout << "samples,accuracy,geomean_ratio,tail_fraction\n"
                << m.samples << ',' << io::format_double(m.accuracy) << ',' << io::format_double(m.geomean_ratio)
                << ',' << io::format_double(m.tail_fraction) << '\n';
    } else if (*rec) {
      validate(rec_w);
      const auto space = rec_geo.space();
      const auto model = load(rec_model, space);
      const ClassId id = predict(model, rec_w);
      const auto& cfg = space.at(id);
      std::cout << "class_id,gr,gc,r,c,df,mux_hex\n"
                << id << ',' << to_string(cfg) << ',' << to_hex(mux_bitvector(space.geometry(), cfg)) << '\n';
    } else if (*run) {
      const auto space = run_geo.space();
      const auto strategy = Strategy::parse(run_strategy);
      std::optional<RecModel> model;
      if (!run_model.empty()) model = load(run_model, space);
      const RunContext ctx{space, model ? &*model : nullptr, parse_read_mode(run_mode),
                           run_energy.empty() ? EnergyParams{} : io::read_energy_params(run_energy)};
      const auto seq = run_sequence(read_workloads(run_workloads), strategy, ctx);
      const auto items = sequence_csv(seq, ctx.mode, run_mux);
      const auto totals = totals_csv({seq});
      if (run_totals.empty()) {
        emit(run_out, items);
        if (run_out.empty() || run_out == "-") {
          std::cout << '\n' << totals;
        } else {
          std::cout << totals;
        }
      } else {
        emit(run_out, items);
        emit(run_totals, totals);
      }
    } else if (*quads) {
      RecNetShape net;
      net.widths = {3 * q_embed, q_hidden, q_classes};
      const ArrayGeometry geo{q_rows, q_cols, q_cell};
      std::cout << "units,mults_per_unit,quads_multipliers,quads_cycles,array_rows,array_cols,systolic_cycles\n"
                << qs.units << ',' << qs.mults_per_unit << ',' << qs.multipliers() << ','
                << recnet_cycles_quads(net, qs) << ',' << q_rows << ',' << q_cols << ','
                << recnet_cycles_on_systolic(net, geo) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
