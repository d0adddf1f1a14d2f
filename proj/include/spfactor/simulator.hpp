#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spfactor/adjacency.hpp"
#include "spfactor/chain_state.hpp"
#include "spfactor/dataset.hpp"
#include "spfactor/rng.hpp"

namespace spfactor {

// Generative configuration. Graph comes from lattice dims or an edge-list
// file; covariates are iid standard normal columns (then standardized
// exactly), one per entry of beta.
struct SimulationSpec {
  int lattice_rows = 0;
  int lattice_cols = 0;
  std::string edge_list_path;  // used when lattice dims are unset
  int n_units = 0;             // required with edge_list_path

  double beta0_death = 0.0;
  double beta0_treatment = 0.0;
  std::vector<double> beta;
  double tau2 = 0.38;
  double tau2_death = 0.27;
  double sigma2_death = 0.03;
  double sigma2_treatment = 0.09;

  std::int64_t pop_min = 50000;
  std::int64_t pop_max = 200000;
  double base_rate_death = 57.0e-5;      // per person
  double base_rate_treatment = 563.0e-5;

  // Censoring: explicit unit list, or a threshold rule that censors units
  // whose simulated treatment count falls below the threshold. A censored
  // unit reports lower = 10*floor(count/10), so the truth lies in
  // [lower, lower+9] exactly as the likelihood assumes.
  std::vector<int> censored_units;
  std::int64_t censor_threshold = -1;  // < 0 disables the rule

  std::uint64_t seed = 1;

  void validate() const;
};

AdjacencyGraph resolve_graph(const SimulationSpec& spec);

// Mean-zero draw with density proportional to exp(-r'Q r / (2 variance)) on
// the sum-to-zero subspace, through a dense eigendecomposition of Q done once
// at construction (simulation scales, n <= a few hundred). Requires a
// connected graph.
class ConstrainedIcarSampler {
 public:
  explicit ConstrainedIcarSampler(const AdjacencyGraph& g);
  std::vector<double> draw(double variance, Rng& rng) const;
  int n() const { return static_cast<int>(basis_.rows()); }

 private:
  Eigen::MatrixXd basis_;         // n x (n-1), eigenvectors of Q, lambda > 0
  Eigen::VectorXd inv_sqrt_eig_;  // lambda_k^{-1/2}
};

// Fixed design pieces shared by every redraw: populations, standardized
// covariates, offsets E = population * base rate, censoring flags.
struct SimSkeleton {
  std::vector<std::int64_t> populations;
  std::vector<std::vector<double>> covariates;
  std::vector<std::string> covariate_names;
  std::vector<double> off_death, off_treat;
  std::vector<std::uint8_t> censored;
};

SimSkeleton make_skeleton(const SimulationSpec& spec,
                          const AdjacencyGraph& graph, Rng& rng);

// Random effects given fixed hyperparameters: nu and alpha from the
// constrained ICAR (centered exactly), eps iid normal.
ChainState draw_effects(const SimulationSpec& spec,
                        const SimSkeleton& skeleton,
                        const ConstrainedIcarSampler& icar, Rng& rng);

struct SimCounts {
  std::vector<std::int64_t> deaths;
  std::vector<std::int64_t> treatments_true;
  std::vector<std::int64_t> treatments_lower;  // binned where censored
};

SimCounts draw_counts(const SimSkeleton& skeleton, const ChainState& state,
                      Rng& rng);

struct SimulationResult {
  Dataset data;       // offsets fixed at the generative E
  ChainState truth;
  std::vector<std::int64_t> treatments_true;
};

// Forward simulation at the spec's fixed parameter values. Censoring never
// alters the underlying true counts, only the observation record. Applies
// the threshold rule when configured.
SimulationResult simulate_dataset(const SimulationSpec& spec,
                                  const AdjacencyGraph& graph, Rng& rng);

}  // namespace spfactor
