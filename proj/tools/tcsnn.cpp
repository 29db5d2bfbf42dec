// Command-line front end: experiment sweeps, raster export and synthetic
// dataset generation. Exit codes: 0 success, 1 configuration error,
// 2 runtime error.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tcsnn/config.hpp"
#include "tcsnn/event_file.hpp"
#include "tcsnn/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

// Output directory precedence: --out, then TCSNN_OUT_DIR, then output.dir.
std::string resolve_out_dir(const std::string& flag, const tcsnn::ExperimentConfig& cfg) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TCSNN_OUT_DIR"); env && *env) return env;
  return cfg.output_dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-compressed spiking neural network simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int workers = 1;
  auto* run = app.add_subcommand("run", "train and evaluate the baseline and every compression ratio");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--workers", workers, "parallel runs")->check(CLI::Range(1, 1024));
  run->add_option("--out", out_dir, "output directory (overrides TCSNN_OUT_DIR and output.dir)");

  std::size_t example = 0;
  int gamma = 1;
  auto* raster = app.add_subcommand("raster", "write baseline and compressed spike rasters of one example");
  raster->add_option("--config", config_path, "experiment config file")->required();
  raster->add_option("--example", example, "example index")->required();
  raster->add_option("--gamma", gamma, "compression ratio")->required();
  raster->add_option("--out", out_dir, "output directory");

  tcsnn::SyntheticTaskParams task;
  std::string dataset_out;
  auto* gen = app.add_subcommand("gen-dataset", "write a synthetic task as an event file");
  gen->add_option("--classes", task.num_classes, "number of classes")->required();
  gen->add_option("--channels", task.num_channels, "number of input channels")->required();
  gen->add_option("--steps", task.length_steps, "example length in steps")->required();
  gen->add_option("--seed", task.seed, "generator seed")->required();
  gen->add_option("--out", dataset_out, "event file to write")->required();
  gen->add_option("--jitter", task.jitter_steps, "template spike jitter (steps)");
  gen->add_option("--examples-per-class", task.examples_per_class, "examples per class");
  gen->add_option("--max-rate", task.max_template_rate, "upper bound of channel rates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      const auto cfg = tcsnn::load_config(config_path);
      const auto result = tcsnn::run_experiment(cfg, workers, &std::cerr);
      const std::string dir = resolve_out_dir(out_dir, cfg);
      tcsnn::write_reports(cfg, result, dir);
      tcsnn::write_summary_csv(std::cout, result);
      std::cerr << "reports written to " << dir << '\n';
    } else if (*raster) {
      const auto cfg = tcsnn::load_config(config_path);
      const auto [base, comp] = tcsnn::emit_raster(cfg, example, gamma, resolve_out_dir(out_dir, cfg));
      std::cout << base.string() << '\n' << comp.string() << '\n';
    } else if (*gen) {
      tcsnn::export_event_file(dataset_out, tcsnn::synthetic_task(task));
      std::cout << dataset_out << '\n';
    }
  } catch (const tcsnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tcsnn::ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tcsnn::FormatError& e) {
    std::cerr << "malformed input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
