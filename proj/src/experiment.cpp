#include "uavrsma/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "uavrsma/joint.hpp"

namespace fs = std::filesystem;

namespace uavrsma {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// One trace file: a fixed (placement, scheme, seed, drop) swept over SNR.
struct RunUnit {
  PlacementMode placement;
  Scheme scheme;
  uint64_t seed = 0;
  int drop = 0;
};

struct SnrOutcome {
  double snr_db = 0.0;
  double final_wsr_bps_hz = 0.0;
  int iterations = 0;
  bool ok = false;
};

struct UnitResult {
  std::string filename;
  std::string csv;
  std::vector<SnrOutcome> outcomes;
};

std::vector<Position3D> draw_users(const ExperimentConfig& cfg, uint64_t seed,
                                   int drop) {
  if (!cfg.scenario.users.empty()) return cfg.scenario.users;
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<uint64_t>(drop));
  std::uniform_real_distribution<double> ux(cfg.scenario.box.x_min,
                                            cfg.scenario.box.x_max);
  std::uniform_real_distribution<double> uy(cfg.scenario.box.y_min,
                                            cfg.scenario.box.y_max);
  std::vector<Position3D> users(cfg.random_user_count);
  for (auto& u : users) {
    u.x = ux(rng);
    u.y = uy(rng);
    u.z = 0.0;
  }
  return users;
}

Scenario materialize(const ExperimentConfig& cfg, uint64_t seed, int drop,
                     double snr_db) {
  Scenario s = cfg.scenario;
  s.users = draw_users(cfg, seed, drop);
  const int k = static_cast<int>(s.users.size());
  if (s.weights.size() == 0) s.weights = Eigen::VectorXd::Ones(k);
  if (s.rate_thresholds_bps.size() == 0) {
    s.rate_thresholds_bps = Eigen::VectorXd::Zero(k);
  }
  s.p_t = std::pow(10.0, snr_db / 10.0) * s.sigma2;
  return s;
}

UnitResult run_unit(const ExperimentConfig& cfg, const RunUnit& unit) {
  UnitResult res;
  std::ostringstream name;
  name << cfg.prefix << "_trace_" << placement_mode_name(unit.placement) << '_'
       << scheme_name(unit.scheme) << "_seed" << unit.seed;
  if (cfg.monte_carlo_drops > 1) name << "_drop" << unit.drop;
  name << ".csv";
  res.filename = name.str();

  const int k = cfg.user_count();
  std::ostringstream csv;
  csv << "iteration,scheme,seed,snr_db,wsr_bps_hz,wsr_bps,uav_x,uav_y,uav_z";
  for (int i = 1; i <= k; ++i) csv << ",rate_user_" << i;
  csv << ",status\n";

  for (double snr : cfg.snr_db) {
    const Scenario scenario = materialize(cfg, unit.seed, unit.drop, snr);
    SnrOutcome outcome;
    outcome.snr_db = snr;
    try {
      const JointSolution sol =
          unit.placement == PlacementMode::kJoint
              ? alternating_optimize(scenario, unit.scheme, cfg.opt, unit.seed)
              : avg_location_baseline(scenario, unit.scheme, cfg.opt, unit.seed);
      for (const TraceEntry& e : sol.trace.entries) {
        csv << e.iteration << ',' << scheme_name(unit.scheme) << ',' << unit.seed
            << ',' << fmt(snr) << ',' << fmt(e.wsr_bps_hz) << ','
            << fmt(e.wsr_bps_hz * scenario.bandwidth_hz) << ',' << fmt(e.uav.x)
            << ',' << fmt(e.uav.y) << ',' << fmt(e.uav.z);
        for (int i = 0; i < k; ++i) {
          csv << ',' << fmt(i < e.user_rates.size() ? e.user_rates(i) : 0.0);
        }
        csv << ',' << e.status << '\n';
      }
      outcome.final_wsr_bps_hz = sol.trace.final_wsr();
      outcome.iterations = static_cast<int>(sol.trace.entries.size());
      outcome.ok = true;
    } catch (const std::exception& e) {
      const Position3D q = scenario.baseline_position();
      csv << 0 << ',' << scheme_name(unit.scheme) << ',' << unit.seed << ','
          << fmt(snr) << ",0,0," << fmt(q.x) << ',' << fmt(q.y) << ','
          << fmt(q.z);
      for (int i = 0; i < k; ++i) csv << ",0";
      csv << ",error: " << sanitize(e.what()) << '\n';
    }
    res.outcomes.push_back(outcome);
  }
  res.csv = csv.str();
  return res;
}

struct AggKey {
  int placement_idx;
  int scheme_idx;
  int snr_idx;
  bool operator<(const AggKey& o) const {
    return std::tie(placement_idx, scheme_idx, snr_idx) <
           std::tie(o.placement_idx, o.scheme_idx, o.snr_idx);
  }
};

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& config, int jobs) {
  config.validate();
  fs::create_directories(config.output_dir);

  std::vector<RunUnit> units;
  for (PlacementMode pm : config.placements) {
    for (Scheme sc : config.schemes) {
      for (uint64_t seed : config.seeds) {
        for (int drop = 0; drop < config.monte_carlo_drops; ++drop) {
          units.push_back(RunUnit{pm, sc, seed, drop});
        }
      }
    }
  }

  std::vector<UnitResult> results(units.size());
  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(units.size())));
  if (n_workers == 1) {
    for (size_t i = 0; i < units.size(); ++i) results[i] = run_unit(config, units[i]);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      workers.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < units.size(); i = next.fetch_add(1)) {
          results[i] = run_unit(config, units[i]);
        }
      });
    }
    for (auto& t : workers) t.join();
  }

  ExperimentOutput out;
  std::map<AggKey, std::vector<double>> groups;
  for (size_t i = 0; i < units.size(); ++i) {
    const fs::path path = fs::path(config.output_dir) / results[i].filename;
    std::ofstream file(path);
    file << results[i].csv;
    out.files.push_back(path.string());

    const int pm_idx = static_cast<int>(
        std::find(config.placements.begin(), config.placements.end(),
                  units[i].placement) -
        config.placements.begin());
    const int sc_idx = static_cast<int>(
        std::find(config.schemes.begin(), config.schemes.end(), units[i].scheme) -
        config.schemes.begin());
    for (size_t s = 0; s < results[i].outcomes.size(); ++s) {
      const SnrOutcome& o = results[i].outcomes[s];
      ++out.runs_total;
      if (o.ok) {
        groups[AggKey{pm_idx, sc_idx, static_cast<int>(s)}].push_back(
            o.final_wsr_bps_hz);
      } else {
        ++out.runs_failed;
      }
    }
  }

  const fs::path agg_path =
      fs::path(config.output_dir) / (config.prefix + "_aggregate.csv");
  std::ofstream agg(agg_path);
  agg << "placement,scheme,snr_db,n_runs,wsr_bps_hz_mean,wsr_bps_hz_median,"
         "wsr_bps_hz_min,wsr_bps_hz_max,wsr_bps_mean\n";
  for (size_t p = 0; p < config.placements.size(); ++p) {
    for (size_t sc = 0; sc < config.schemes.size(); ++sc) {
      for (size_t s = 0; s < config.snr_db.size(); ++s) {
        const auto it = groups.find(AggKey{static_cast<int>(p),
                                           static_cast<int>(sc),
                                           static_cast<int>(s)});
        agg << placement_mode_name(config.placements[p]) << ','
            << scheme_name(config.schemes[sc]) << ',' << fmt(config.snr_db[s]);
        if (it == groups.end() || it->second.empty()) {
          agg << ",0,nan,nan,nan,nan,nan\n";
          continue;
        }
        const auto& v = it->second;
        const double mean =
            std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        agg << ',' << v.size() << ',' << fmt(mean) << ',' << fmt(median_of(v))
            << ',' << fmt(*std::min_element(v.begin(), v.end())) << ','
            << fmt(*std::max_element(v.begin(), v.end())) << ','
            << fmt(mean * config.scenario.bandwidth_hz) << '\n';
      }
    }
  }
  agg.close();
  out.files.push_back(agg_path.string());
  return out;
}

namespace {

struct AggRow {
  std::string placement;
  std::string scheme;
  double snr_db = 0.0;
  int n_runs = 0;
  double wsr_mean = 0.0;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool try_stod(const std::string& s, double& v) {
  try {
    size_t pos = 0;
    v = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

int summarize(const std::string& dir, std::ostream& out) {
  std::vector<AggRow> rows;
  std::vector<fs::path> trace_files;
  if (fs::is_directory(dir)) {
    std::vector<fs::path> agg_files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
      if (name.find("_aggregate") != std::string::npos) {
        agg_files.push_back(entry.path());
      } else if (name.find("_trace_") != std::string::npos) {
        trace_files.push_back(entry.path());
      }
    }
    std::sort(agg_files.begin(), agg_files.end());
    std::sort(trace_files.begin(), trace_files.end());
    for (const auto& path : agg_files) {
      std::ifstream in(path);
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        const auto f = split_csv(line);
        if (f.size() < 9) continue;
        AggRow r;
        r.placement = f[0];
        r.scheme = f[1];
        double n = 0.0;
        if (!try_stod(f[2], r.snr_db) || !try_stod(f[3], n) ||
            !try_stod(f[4], r.wsr_mean)) {
          continue;
        }
        r.n_runs = static_cast<int>(n);
        if (r.n_runs > 0) rows.push_back(r);
      }
    }
  }
  if (rows.empty()) {
    out << "no runs found in '" << dir << "'\n";
    return 1;
  }

  out << "placement  scheme  snr_db  n_runs  wsr_bps_hz_mean\n";
  for (const auto& r : rows) {
    out << r.placement << "  " << r.scheme << "  " << fmt(r.snr_db) << "  "
        << r.n_runs << "  " << fmt(r.wsr_mean) << '\n';
  }

  // Iteration counts come from the trace files (max iteration index per run).
  int traced_runs = 0;
  long total_iters = 0;
  int max_iters = 0;
  for (const auto& path : trace_files) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::map<std::string, int> per_snr;
    while (std::getline(in, line)) {
      const auto f = split_csv(line);
      if (f.size() < 4) continue;
      double it = 0.0;
      if (!try_stod(f[0], it)) continue;
      int& cur = per_snr[f[3]];
      cur = std::max(cur, static_cast<int>(it) + 1);
    }
    for (const auto& [snr, n] : per_snr) {
      ++traced_runs;
      total_iters += n;
      max_iters = std::max(max_iters, n);
    }
  }
  if (traced_runs > 0) {
    out << "iterations: mean "
        << fmt(static_cast<double>(total_iters) / traced_runs) << ", max "
        << max_iters << " over " << traced_runs << " runs\n";
  }

  // Qualitative orderings on mean WSR, evaluated where both sides exist.
  auto mean_for = [&](const std::string& pm, const std::string& sc,
                      double snr, double& v) {
    for (const auto& r : rows) {
      if (r.placement == pm && r.scheme == sc &&
          std::abs(r.snr_db - snr) < 1e-9) {
        v = r.wsr_mean;
        return true;
      }
    }
    return false;
  };
  std::vector<double> snrs;
  for (const auto& r : rows) {
    if (std::none_of(snrs.begin(), snrs.end(),
                     [&](double s) { return std::abs(s - r.snr_db) < 1e-9; })) {
      snrs.push_back(r.snr_db);
    }
  }
  std::sort(snrs.begin(), snrs.end());

  auto check_pair = [&](const char* label, const std::string& pm_a,
                        const std::string& sc_a, const std::string& pm_b,
                        const std::string& sc_b) {
    int checked = 0;
    int holds = 0;
    for (double snr : snrs) {
      double a = 0.0;
      double b = 0.0;
      if (mean_for(pm_a, sc_a, snr, a) && mean_for(pm_b, sc_b, snr, b)) {
        ++checked;
        if (a >= b - 1e-9) ++holds;
      }
    }
    if (checked == 0) return;
    out << "check " << label << ": " << (holds == checked ? "pass" : "FAIL")
        << " (" << holds << "/" << checked << " SNR points)\n";
  };
  check_pair("rsma >= sdma", "joint", "rsma", "joint", "sdma");
  check_pair("sdma >= noma", "joint", "sdma", "joint", "noma");
  for (const std::string sc : {"rsma", "sdma", "noma"}) {
    check_pair(("joint >= avg (" + sc + ")").c_str(), "joint", sc, "avg", sc);
  }
  if (!snrs.empty() && snrs.front() <= 5.0) {
    double a = 0.0;
    double b = 0.0;
    if (mean_for("joint", "noma", snrs.front(), a) &&
        mean_for("joint", "sdma", snrs.front(), b)) {
      out << "check noma >= sdma at " << fmt(snrs.front())
          << " dB: " << (a >= b - 1e-9 ? "pass" : "FAIL") << '\n';
    }
  }
  return 0;
}

}  // namespace uavrsma
