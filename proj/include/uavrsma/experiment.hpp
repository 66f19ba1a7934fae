#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "uavrsma/config.hpp"

namespace uavrsma {

struct ExperimentOutput {
  std::vector<std::string> files;  // CSV paths written, aggregate last
  int runs_total = 0;
  int runs_failed = 0;
};

// Executes the sweep and writes one trace CSV per (placement, scheme, seed,
// drop) plus an aggregate CSV. Byte-deterministic for a fixed config.
ExperimentOutput run_experiment(const ExperimentConfig& config, int jobs = 1);

// Reads the CSVs under dir and prints converged WSRs, iteration counts, and
// qualitative ordering checks. Returns 0 on success, 1 when no runs exist.
int summarize(const std::string& dir, std::ostream& out);

}  // namespace uavrsma
