#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "uavrsma/joint.hpp"

namespace uavrsma {

enum class PlacementMode { kJoint, kAvg };

const char* placement_mode_name(PlacementMode m);

struct ConfigError : std::runtime_error {
  ConfigError(int line_number, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + message),
        line(line_number) {}
  int line;
};

struct ExperimentConfig {
  Scenario scenario;          // users empty => random drops of random_user_count
  int random_user_count = 0;
  std::vector<double> snr_db;
  std::vector<Scheme> schemes;
  std::vector<PlacementMode> placements;
  std::vector<uint64_t> seeds;
  int monte_carlo_drops = 1;
  std::string output_dir = "out";
  std::string prefix = "run";
  JointOptParams opt;
  std::string preset = "custom";

  int user_count() const {
    return scenario.users.empty() ? random_user_count : scenario.num_users();
  }
  void validate() const;  // throws std::invalid_argument
};

// Embedded section IV presets: fig1_convergence, fig2_trajectory,
// fig3_snr_los, fig4_snr_rician.
ExperimentConfig preset_config(const std::string& name);

// INI-style sections ([scenario], [users], [sweep], [opt], [output]) with
// key = value lines. Unknown keys are rejected with their line number.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);

}  // namespace uavrsma
