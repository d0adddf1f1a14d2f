#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spfactor/sampler.hpp"
#include "spfactor/simulator.hpp"

namespace spfactor {

// Simulate-fit-check study: each replicate draws a dataset at the spec's true
// values, refits it through the standard ingestion path (offsets recomputed
// from the realized counts, covariates restandardized), and records whether
// the equal-tailed interval covers the truth for beta and the four variances.
struct RecoveryConfig {
  int replicates = 20;
  int threads = 4;
  double level = 0.95;
  SamplerConfig fit;      // per-replicate seed is derived from `seed`
  std::uint64_t seed = 1;
};

struct RecoveryRow {
  int replicate = 0;
  std::string param;
  double truth = 0.0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool covered = false;
};

struct RecoveryAggregate {
  std::string param;
  double truth = 0.0;
  int covered = 0;
  int total = 0;
  double mean_bias = 0.0;
  int sign_correct = 0;  // posterior mean sign matches truth (beta rows)
};

struct RecoveryResult {
  std::vector<RecoveryRow> rows;
  std::vector<RecoveryAggregate> aggregate;
  std::string to_text() const;
};

RecoveryResult recovery_study(const SimulationSpec& spec,
                              const RecoveryConfig& cfg);

}  // namespace spfactor
