#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tcsnn/config.hpp"
#include "tcsnn/error.hpp"
#include "tcsnn/event_file.hpp"
#include "tcsnn/learning.hpp"
#include "tcsnn/metrics.hpp"
#include "tcsnn/network.hpp"
#include "tcsnn/parallel.hpp"
#include "tcsnn/simulator.hpp"

namespace tcsnn {

inline SpikeDataset load_dataset(const ExperimentConfig& c) {
  if (c.dataset_path) return load_event_file(*c.dataset_path);
  return synthetic_task(c.synthetic);
}

/// Network configuration for one run, sized to the dataset.
inline LsmConfig network_config(const ExperimentConfig& c, const SpikeDataset& ds, NeuronModel model,
                                int gamma) {
  LsmConfig l = c.lsm;
  l.num_inputs = ds.num_channels;
  if (c.readout_matches_classes) l.num_readout = ds.num_classes;
  if (ds.num_classes > l.num_readout)
    throw ConfigError("dataset has " + std::to_string(ds.num_classes) + " classes but only " +
                      std::to_string(l.num_readout) + " readout neurons");
  l.model = model;
  l.compression.gamma = gamma;
  return l;
}

struct RunReport {
  int gamma = 1;
  bool baseline = false;
  NeuronModel model = NeuronModel::Lif;
  std::uint64_t seed = 0;
  Step input_length = 0;
  Step timesteps = 0;  // per example
  double speedup = 1.0;
  TrainingReport training;
  double energy = 0.0;  // mean per test example, model units
  double energy_reduction = 1.0;
  std::optional<double> atel;
  std::string atel_note;
  int num_readout = 0;
  int reservoir_size = 0;
  double wall_seconds = 0.0;  // not part of any written report
};

struct ExperimentResult {
  std::vector<RunReport> runs;  // baseline first, then compressed rows in list order
};

inline double speedup_for(Step length, int gamma) {
  return static_cast<double>(length) / static_cast<double>(compressed_length(length, gamma));
}

inline RunReport run_single(const ExperimentConfig& c, const SpikeDataset& ds, bool baseline, int gamma,
                            int workers) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  r.gamma = gamma;
  r.baseline = baseline;
  r.model = baseline ? baseline_counterpart(c.lsm.model) : c.lsm.model;
  r.seed = c.seed;
  r.input_length = ds.length_steps;
  r.timesteps = baseline ? ds.length_steps : compressed_length(ds.length_steps, gamma);
  r.speedup = static_cast<double>(ds.length_steps) / static_cast<double>(r.timesteps);

  Network net = build_lsm(network_config(c, ds, r.model, baseline ? 1 : gamma));
  r.num_readout = net.num_readout;
  r.reservoir_size = net.reservoir_size;
  r.training = train_readout(net, ds, DatasetSplit{c.train_fraction, c.seed}, c.learning,
                             baseline ? RunMode::Baseline : RunMode::Compressed, workers);
  const EvaluationResult& t = r.training.test;
  if (t.total > 0) {
    LayerCounters all = t.input;
    all += t.reservoir;
    all += t.readout;
    r.energy = energy_estimate(all, t.timesteps, net.reservoir_size + net.num_readout, c.energy) / t.total;
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Builds, trains and evaluates one network per ratio plus the uncompressed
/// baseline. Rows run on up to `workers` threads; results do not depend on
/// the worker count.
inline ExperimentResult run_experiment(const ExperimentConfig& c, int workers = 1,
                                       std::ostream* log = nullptr) {
  c.validate();
  const SpikeDataset ds = load_dataset(c);
  ds.validate();

  std::vector<std::pair<bool, int>> rows = {{true, 1}};
  for (int g : c.gammas)
    if (g != 1) rows.emplace_back(false, g);

  ExperimentResult res;
  res.runs.resize(rows.size());
  const int inner = std::max(1, workers / static_cast<int>(rows.size()));
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    res.runs[i] = run_single(c, ds, rows[i].first, rows[i].second, inner);
  });

  const RunReport& base = res.runs.front();
  for (RunReport& r : res.runs) {
    r.energy_reduction = r.energy > 0.0 ? base.energy / r.energy : 0.0;
    const auto rb = c.resources.find(1);
    const auto rd = c.resources.find(r.gamma);
    if (rb == c.resources.end() || rd == c.resources.end()) {
      r.atel_note = "no resource counts";
      continue;
    }
    AtelInputs d{rd->second.lut, rd->second.ff, static_cast<double>(r.timesteps), r.energy,
                 r.training.test.accuracy};
    AtelInputs b{rb->second.lut, rb->second.ff, static_cast<double>(base.timesteps), base.energy,
                 base.training.test.accuracy};
    try {
      r.atel = atel(d, b);
    } catch (const ParameterError& e) {
      r.atel_note = e.what();
    }
  }
  if (log)
    for (const RunReport& r : res.runs)
      *log << (r.baseline ? "baseline" : std::to_string(r.gamma) + ":1") << ' ' << to_string(r.model)
           << " accuracy " << r.training.test.accuracy << "% in " << r.wall_seconds << " s\n";
  return res;
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::ordered_json counters_json(const LayerCounters& l) {
  nlohmann::ordered_json j;
  j["synaptic_ops"] = l.synaptic_ops;
  j["neuron_updates"] = l.neuron_updates;
  j["spike_events"] = l.spike_events;
  j["spike_weight"] = l.spike_weight;
  return j;
}

inline nlohmann::ordered_json run_json(const RunReport& r) {
  const EvaluationResult& t = r.training.test;
  nlohmann::ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["gamma"] = r.gamma;
  j["mode"] = r.baseline ? "baseline" : "compressed";
  j["model"] = std::string(to_string(r.model));
  j["seed"] = r.seed;
  j["input_length"] = r.input_length;
  j["timesteps"] = r.timesteps;
  j["speedup"] = r.speedup;
  j["accuracy"] = t.accuracy;
  j["test_examples"] = t.total;
  j["test_correct"] = t.correct;
  j["no_spike_examples"] = t.no_spike;
  j["epochs"] = r.training.epochs_run;
  j["train_accuracy"] = r.training.epoch_train_accuracy;
  j["predictions"] = t.predictions;
  nlohmann::ordered_json ev;
  ev["input"] = counters_json(t.input);
  ev["reservoir"] = counters_json(t.reservoir);
  ev["readout"] = counters_json(t.readout);
  j["events"] = ev;
  j["timesteps_total"] = t.timesteps;
  j["saturations"] = t.saturations;
  j["energy"] = r.energy;
  j["energy_reduction"] = r.energy_reduction;
  if (r.atel) j["atel_percent"] = *r.atel;
  else j["atel_percent"] = nullptr;
  if (!r.atel_note.empty()) j["atel_note"] = r.atel_note;
  return j;
}

inline std::string run_label(const RunReport& r) {
  return r.baseline ? "baseline" : "g" + std::to_string(r.gamma);
}

inline void write_summary_csv(std::ostream& out, const ExperimentResult& res) {
  out << "ratio,model,accuracy,timesteps,speedup,energy,energy_reduction,atel\n";
  for (const RunReport& r : res.runs) {
    out << r.gamma << ":1," << to_string(r.model) << ',' << detail::format_real(r.training.test.accuracy)
        << ',' << r.timesteps << ',' << detail::format_real(r.speedup) << ','
        << detail::format_real(r.energy) << ',' << detail::format_real(r.energy_reduction) << ','
        << (r.atel ? detail::format_real(*r.atel) : std::string()) << '\n';
  }
}

inline std::filesystem::path prepare_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory '" + dir + "'");
  return dir;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Writes run_<label>.json and weights_<label>.txt per row, summary.csv and
/// the resolved config. Returns the written paths.
inline std::vector<std::filesystem::path> write_reports(const ExperimentConfig& c, const ExperimentResult& res,
                                                        const std::string& dir) {
  const auto root = prepare_output_dir(dir);
  std::vector<std::filesystem::path> written;
  for (const RunReport& r : res.runs) {
    const auto p = root / ("run_" + run_label(r) + ".json");
    write_text_file(p, run_json(r).dump(2) + "\n");
    written.push_back(p);

    std::ostringstream w;
    write_weights(w, r.training.weights, r.num_readout, r.reservoir_size, c.lsm.format.frac_bits);
    const auto wp = root / ("weights_" + run_label(r) + ".txt");
    write_text_file(wp, w.str());
    written.push_back(wp);
  }
  std::ostringstream csv;
  write_summary_csv(csv, res);
  write_text_file(root / "summary.csv", csv.str());
  written.push_back(root / "summary.csv");
  std::ostringstream cfg;
  write_config(cfg, c);
  write_text_file(root / "config.resolved", cfg.str());
  written.push_back(root / "config.resolved");
  return written;
}

// ---------------------------------------------------------------------------
// Rasters

inline void write_raster_csv(std::ostream& out, const SimulationTrace& tr) {
  out << "neuron_id,timestep,weight\n";
  for (const SpikeRecord& s : tr.spikes) out << s.node << ',' << s.step << ',' << s.weight << '\n';
}

struct RasterPair {
  SimulationTrace baseline;
  SimulationTrace compressed;
};

/// Untrained network of the configured model, run on one example both
/// uncompressed and at `gamma`.
inline RasterPair raster_traces(const ExperimentConfig& c, const SpikeDataset& ds, std::size_t example,
                                int gamma) {
  if (example >= ds.examples.size())
    throw ParameterError("example index " + std::to_string(example) + " out of range (dataset has " +
                         std::to_string(ds.examples.size()) + ")");
  if (gamma < 1 || gamma > c.lsm.compression.max_gamma) throw ParameterError("gamma out of range");
  const Network net = build_lsm(network_config(c, ds, c.lsm.model, gamma));
  const auto& ex = ds.examples[example].channels;
  return {simulate(net, ex, RunMode::Baseline), simulate(net, ex, RunMode::Compressed)};
}

inline std::pair<std::filesystem::path, std::filesystem::path> emit_raster(const ExperimentConfig& c,
                                                                           std::size_t example, int gamma,
                                                                           const std::string& dir) {
  const SpikeDataset ds = load_dataset(c);
  const RasterPair rp = raster_traces(c, ds, example, gamma);
  const auto root = prepare_output_dir(dir);
  const std::string stem = "raster_ex" + std::to_string(example);
  const auto base = root / (stem + "_baseline.csv");
  const auto comp = root / (stem + "_g" + std::to_string(gamma) + ".csv");
  std::ostringstream a, b;
  write_raster_csv(a, rp.baseline);
  write_raster_csv(b, rp.compressed);
  write_text_file(base, a.str());
  write_text_file(comp, b.str());
  return {base, comp};
}

}  // namespace tcsnn
