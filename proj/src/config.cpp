#include "uavrsma/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace uavrsma {

namespace {

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream iss(s);
  std::vector<std::string> out;
  std::string t;
  while (iss >> t) out.push_back(t);
  return out;
}

double parse_double(const std::string& s, int line) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError(line, "trailing characters in number '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, int line) {
  size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(line, "expected an integer, got '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError(line, "trailing characters in integer '" + s + "'");
  return v;
}

Scheme parse_scheme(const std::string& s, int line) {
  if (s == "rsma") return Scheme::kRsma;
  if (s == "sdma") return Scheme::kSdma;
  if (s == "noma") return Scheme::kNoma;
  throw ConfigError(line, "unknown scheme '" + s + "' (rsma|sdma|noma)");
}

PlacementMode parse_placement(const std::string& s, int line) {
  if (s == "joint") return PlacementMode::kJoint;
  if (s == "avg") return PlacementMode::kAvg;
  throw ConfigError(line, "unknown placement mode '" + s + "' (joint|avg)");
}

Scenario base_scenario() {
  Scenario s;
  s.sigma2 = 1.0;
  s.bandwidth_hz = 20e6;
  s.beta = 2.0;
  s.box = PlacementBox{0.0, 300.0, 0.0, 300.0, 80.0, 120.0};
  s.channel_model = ChannelModelKind::kLos;
  return s;
}

const std::vector<Position3D> kFig3Users = {
    {0.0, 0.0, 0.0}, {0.0, 100.0, 0.0}, {150.0, 150.0, 0.0}, {200.0, 50.0, 0.0}};

std::vector<uint64_t> seed_range(uint64_t first, uint64_t count) {
  std::vector<uint64_t> s(count);
  for (uint64_t i = 0; i < count; ++i) s[i] = first + i;
  return s;
}

}  // namespace

const char* placement_mode_name(PlacementMode m) {
  return m == PlacementMode::kJoint ? "joint" : "avg";
}

void ExperimentConfig::validate() const {
  if (user_count() < 1) throw std::invalid_argument("config: no users configured");
  if (snr_db.empty()) throw std::invalid_argument("config: empty snr list");
  for (double s : snr_db) {
    if (!std::isfinite(s)) throw std::invalid_argument("config: non-finite SNR");
  }
  if (schemes.empty()) throw std::invalid_argument("config: empty scheme list");
  if (placements.empty()) throw std::invalid_argument("config: empty placement list");
  if (seeds.empty()) throw std::invalid_argument("config: empty seeds list");
  if (monte_carlo_drops < 1) throw std::invalid_argument("config: drops must be >= 1");
  if (output_dir.empty()) throw std::invalid_argument("config: empty output dir");

  // Validate the scenario shell with placeholder users/power when randomized.
  Scenario probe = scenario;
  if (probe.users.empty()) {
    probe.users.assign(random_user_count,
                       Position3D{0.5 * (probe.box.x_min + probe.box.x_max),
                                  0.5 * (probe.box.y_min + probe.box.y_max), 0.0});
  }
  if (probe.weights.size() == 0) probe.weights = Eigen::VectorXd::Ones(user_count());
  if (probe.rate_thresholds_bps.size() == 0) {
    probe.rate_thresholds_bps = Eigen::VectorXd::Zero(user_count());
  }
  probe.p_t = std::pow(10.0, snr_db.front() / 10.0) * probe.sigma2;
  probe.validate();
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.preset = name;
  cfg.scenario = base_scenario();
  cfg.schemes = {Scheme::kRsma, Scheme::kSdma, Scheme::kNoma};

  if (name == "fig1_convergence" || name == "fig2_trajectory") {
    cfg.random_user_count = 2;
    cfg.scenario.n_t = 2;
    cfg.snr_db = {20.0};
    cfg.placements = {PlacementMode::kJoint};
    cfg.seeds = seed_range(1, 10);
    cfg.prefix = name == "fig1_convergence" ? "fig1" : "fig2";
    return cfg;
  }
  if (name == "fig3_snr_los" || name == "fig4_snr_rician") {
    cfg.scenario.users = kFig3Users;
    cfg.scenario.n_t = 4;
    cfg.snr_db = {0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
    if (name == "fig3_snr_los") {
      cfg.placements = {PlacementMode::kJoint, PlacementMode::kAvg};
      cfg.seeds = seed_range(1, 3);
      cfg.prefix = "fig3";
    } else {
      cfg.scenario.channel_model = ChannelModelKind::kRician;
      // K-factor from 10^0.5 at the horizon to 10^1.5 at zenith.
      cfg.scenario.rician.a1 = std::pow(10.0, 0.5);
      cfg.scenario.rician.b1 = 2.0 * std::log(10.0) / M_PI;
      cfg.placements = {PlacementMode::kJoint};
      cfg.seeds = seed_range(1, 10);
      cfg.prefix = "fig4";
    }
    return cfg;
  }
  if (name == "custom") return cfg;
  throw std::invalid_argument("unknown preset '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg = preset_config("custom");
  bool preset_applied = false;
  std::vector<Position3D> users;
  std::vector<double> weights;
  std::vector<double> thresholds;

  std::istringstream stream(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(stream, raw)) {
    ++line;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    // trim
    const size_t first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const size_t last = raw.find_last_not_of(" \t\r");
    std::string s = raw.substr(first, last - first + 1);

    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "unterminated section header");
      section = s.substr(1, s.size() - 2);
      if (section != "scenario" && section != "users" && section != "sweep" &&
          section != "opt" && section != "output") {
        throw ConfigError(line, "unknown section [" + section + "]");
      }
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    std::string key = s.substr(0, eq);
    std::string value = s.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    const size_t vstart = value.find_first_not_of(" \t");
    value = vstart == std::string::npos ? "" : value.substr(vstart);
    if (key.empty()) throw ConfigError(line, "empty key");
    if (value.empty()) throw ConfigError(line, "empty value for '" + key + "'");
    const auto vals = tokens(value);

    if (section.empty()) {
      if (key == "preset") {
        if (preset_applied) throw ConfigError(line, "duplicate preset key");
        try {
          cfg = preset_config(value);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(line, e.what());
        }
        preset_applied = true;
        continue;
      }
      throw ConfigError(line, "key '" + key + "' outside any section");
    }

    if (section == "scenario") {
      if (key == "n_antennas") {
        cfg.scenario.n_t = static_cast<int>(parse_int(value, line));
      } else if (key == "noise_power_w") {
        cfg.scenario.sigma2 = parse_double(value, line);
      } else if (key == "bandwidth_hz") {
        cfg.scenario.bandwidth_hz = parse_double(value, line);
      } else if (key == "beta") {
        cfg.scenario.beta = parse_double(value, line);
      } else if (key == "channel") {
        if (value == "los") {
          cfg.scenario.channel_model = ChannelModelKind::kLos;
        } else if (value == "rician") {
          cfg.scenario.channel_model = ChannelModelKind::kRician;
        } else {
          throw ConfigError(line, "channel must be los or rician");
        }
      } else if (key == "rician_a1") {
        cfg.scenario.rician.a1 = parse_double(value, line);
      } else if (key == "rician_b1") {
        cfg.scenario.rician.b1 = parse_double(value, line);
      } else if (key == "box") {
        if (vals.size() != 6) {
          throw ConfigError(line, "box needs 6 values: xmin xmax ymin ymax zmin zmax");
        }
        cfg.scenario.box = PlacementBox{
            parse_double(vals[0], line), parse_double(vals[1], line),
            parse_double(vals[2], line), parse_double(vals[3], line),
            parse_double(vals[4], line), parse_double(vals[5], line)};
      } else if (key == "weights") {
        weights.clear();
        for (const auto& v : vals) weights.push_back(parse_double(v, line));
      } else if (key == "rate_threshold_bps") {
        thresholds.clear();
        for (const auto& v : vals) thresholds.push_back(parse_double(v, line));
      } else {
        throw ConfigError(line, "unknown key '" + key + "' in [scenario]");
      }
    } else if (section == "users") {
      if (key == "count") {
        cfg.random_user_count = static_cast<int>(parse_int(value, line));
        if (cfg.random_user_count < 1) throw ConfigError(line, "count must be >= 1");
      } else if (key == "user") {
        if (vals.size() != 3) throw ConfigError(line, "user needs 3 values: x y z");
        users.push_back(Position3D{parse_double(vals[0], line),
                                   parse_double(vals[1], line),
                                   parse_double(vals[2], line)});
      } else {
        throw ConfigError(line, "unknown key '" + key + "' in [users]");
      }
    } else if (section == "sweep") {
      if (key == "snr_db") {
        cfg.snr_db.clear();
        for (const auto& v : vals) cfg.snr_db.push_back(parse_double(v, line));
      } else if (key == "schemes") {
        cfg.schemes.clear();
        for (const auto& v : vals) cfg.schemes.push_back(parse_scheme(v, line));
      } else if (key == "placements") {
        cfg.placements.clear();
        for (const auto& v : vals) cfg.placements.push_back(parse_placement(v, line));
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& v : vals) {
          cfg.seeds.push_back(static_cast<uint64_t>(parse_int(v, line)));
        }
        if (cfg.seeds.empty()) throw ConfigError(line, "empty seeds list");
      } else if (key == "drops") {
        cfg.monte_carlo_drops = static_cast<int>(parse_int(value, line));
      } else {
        throw ConfigError(line, "unknown key '" + key + "' in [sweep]");
      }
    } else if (section == "opt") {
      if (key == "epsilon") {
        cfg.opt.epsilon = parse_double(value, line);
        cfg.opt.precoder.epsilon = cfg.opt.epsilon;
        cfg.opt.placement.epsilon = cfg.opt.epsilon;
      } else if (key == "max_outer") {
        cfg.opt.max_outer_iterations = static_cast<int>(parse_int(value, line));
      } else if (key == "max_inner") {
        cfg.opt.precoder.max_outer_iterations = static_cast<int>(parse_int(value, line));
      } else {
        throw ConfigError(line, "unknown key '" + key + "' in [opt]");
      }
    } else {  // output
      if (key == "dir") {
        cfg.output_dir = value;
      } else if (key == "prefix") {
        cfg.prefix = value;
      } else {
        throw ConfigError(line, "unknown key '" + key + "' in [output]");
      }
    }
  }

  if (!users.empty()) {
    cfg.scenario.users = users;
    cfg.random_user_count = 0;
  }
  const int k = cfg.user_count();
  if (!weights.empty()) {
    if (static_cast<int>(weights.size()) == 1) {
      cfg.scenario.weights = Eigen::VectorXd::Constant(k, weights[0]);
    } else if (static_cast<int>(weights.size()) == k) {
      cfg.scenario.weights =
          Eigen::Map<const Eigen::VectorXd>(weights.data(), k);
    } else {
      throw std::invalid_argument("config: weights count does not match users");
    }
  }
  if (!thresholds.empty()) {
    if (static_cast<int>(thresholds.size()) == 1) {
      cfg.scenario.rate_thresholds_bps = Eigen::VectorXd::Constant(k, thresholds[0]);
    } else if (static_cast<int>(thresholds.size()) == k) {
      cfg.scenario.rate_thresholds_bps =
          Eigen::Map<const Eigen::VectorXd>(thresholds.data(), k);
    } else {
      throw std::invalid_argument("config: threshold count does not match users");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace uavrsma
