#include <CLI11.hpp>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "uavrsma/config.hpp"
#include "uavrsma/experiment.hpp"

namespace {

uavrsma::ExperimentConfig load(const std::string& config_path,
                               const std::string& preset) {
  if (!preset.empty()) {
    auto cfg = uavrsma::preset_config(preset);
    cfg.validate();
    return cfg;
  }
  return uavrsma::load_config_file(config_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV placement and multiple-access precoder simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds_csv;
  std::string preset;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Execute an experiment sweep");
  run->add_option("config", config_path, "Config file path");
  run->add_option("--out", out_dir, "Output directory override");
  run->add_option("--seeds", seeds_csv, "Comma-separated seed override");
  run->add_option("--preset", preset,
                  "Built-in preset (fig1_convergence, fig2_trajectory, "
                  "fig3_snr_los, fig4_snr_rician)");
  run->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);

  std::string summarize_dir;
  auto* summ = app.add_subcommand("summarize", "Summarize a results directory");
  summ->add_option("dir", summarize_dir, "Results directory")->required();

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "Check a config file");
  val->add_option("config", validate_path, "Config file path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (config_path.empty() && preset.empty()) {
        std::cerr << "error: provide a config path or --preset\n";
        return 1;
      }
      auto cfg = load(config_path, preset);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (!seeds_csv.empty()) {
        cfg.seeds.clear();
        std::string item;
        std::istringstream iss(seeds_csv);
        while (std::getline(iss, item, ',')) {
          if (!item.empty()) cfg.seeds.push_back(std::stoull(item));
        }
        cfg.validate();
      }
      const auto result = uavrsma::run_experiment(cfg, jobs);
      std::cout << "wrote " << result.files.size() << " files to "
                << cfg.output_dir << " (" << result.runs_total - result.runs_failed
                << "/" << result.runs_total << " runs succeeded)\n";
      if (result.runs_total > 0 && result.runs_failed == result.runs_total) {
        std::cerr << "error: all runs failed\n";
        return 2;
      }
      return 0;
    }
    if (summ->parsed()) {
      return uavrsma::summarize(summarize_dir, std::cout) == 0 ? 0 : 1;
    }
    // validate
    uavrsma::load_config_file(validate_path);
    std::cout << "ok\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
