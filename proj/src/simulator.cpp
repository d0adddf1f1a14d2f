#include "spfactor/simulator.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>

#include "spfactor/errors.hpp"
#include "spfactor/likelihood.hpp"

namespace spfactor {
namespace {

void recenter(std::vector<double>& v, double target) {
  double m = 0.0;
  for (double x : v) m += x;
  m = m / static_cast<double>(v.size()) - target;
  for (double& x : v) x -= m;
}

}  // namespace

void SimulationSpec::validate() const {
  const bool lattice = lattice_rows > 0 && lattice_cols > 0;
  const bool file = !edge_list_path.empty() && n_units > 0;
  if (lattice == file) {
    throw ValidationError(
        "simulation spec needs either lattice dims or an edge list with "
        "n_units");
  }
  if (!(tau2 > 0.0 && tau2_death > 0.0 && sigma2_death > 0.0 &&
        sigma2_treatment > 0.0)) {
    throw ValidationError("simulation spec: variances must be positive");
  }
  if (pop_min <= 0 || pop_max < pop_min) {
    throw ValidationError("simulation spec: invalid population range");
  }
  if (!(base_rate_death > 0.0 && base_rate_treatment > 0.0)) {
    throw ValidationError("simulation spec: base rates must be positive");
  }
}

AdjacencyGraph resolve_graph(const SimulationSpec& spec) {
  spec.validate();
  if (spec.lattice_rows > 0) {
    return make_lattice(spec.lattice_rows, spec.lattice_cols);
  }
  std::ifstream in(spec.edge_list_path);
  if (!in) {
    throw ValidationError("cannot open edge list: " + spec.edge_list_path);
  }
  return load_adjacency(in, spec.n_units);
}

ConstrainedIcarSampler::ConstrainedIcarSampler(const AdjacencyGraph& g) {
  if (!is_connected(g)) {
    throw ValidationError("constrained ICAR draw requires a connected graph");
  }
  const int n = g.n;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) q(i, i) = g.degrees[i];
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    q(g.edge_a[e], g.edge_b[e]) = -1.0;
    q(g.edge_b[e], g.edge_a[e]) = -1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
  if (eig.info() != Eigen::Success) {
    throw ComputeError("ICAR eigendecomposition failed");
  }
  // Connected graph: exactly one null eigenvalue (the constant vector).
  if (n > 1 && eig.eigenvalues()(1) < 1e-9) {
    throw ValidationError("graph precision has a repeated null space");
  }
  basis_ = eig.eigenvectors().rightCols(n - 1);
  inv_sqrt_eig_ = eig.eigenvalues().tail(n - 1).array().rsqrt();
}

std::vector<double> ConstrainedIcarSampler::draw(double variance,
                                                 Rng& rng) const {
  const int n = static_cast<int>(basis_.rows());
  const double sd = std::sqrt(variance);
  Eigen::VectorXd z(n - 1);
  for (int k = 0; k < n - 1; ++k) {
    z(k) = sd * inv_sqrt_eig_(k) * rng.normal();
  }
  Eigen::VectorXd r = basis_ * z;
  std::vector<double> out(r.data(), r.data() + n);
  recenter(out, 0.0);
  return out;
}

SimSkeleton make_skeleton(const SimulationSpec& spec,
                          const AdjacencyGraph& graph, Rng& rng) {
  const int n = graph.n;
  const int p = static_cast<int>(spec.beta.size());
  SimSkeleton sk;
  sk.populations.resize(n);
  for (int i = 0; i < n; ++i) {
    sk.populations[i] = rng.uniform_int(spec.pop_min, spec.pop_max);
  }
  sk.covariates.assign(p, std::vector<double>(n));
  for (int c = 0; c < p; ++c) {
    sk.covariate_names.push_back("x" + std::to_string(c + 1));
    for (int i = 0; i < n; ++i) sk.covariates[c][i] = rng.normal();
  }
  if (p > 0) standardize_covariates(sk.covariates, sk.covariate_names);
  sk.off_death.resize(n);
  sk.off_treat.resize(n);
  for (int i = 0; i < n; ++i) {
    sk.off_death[i] =
        static_cast<double>(sk.populations[i]) * spec.base_rate_death;
    sk.off_treat[i] =
        static_cast<double>(sk.populations[i]) * spec.base_rate_treatment;
  }
  sk.censored.assign(n, 0);
  for (int u : spec.censored_units) {
    if (u < 0 || u >= n) {
      throw ValidationError("censored unit index out of range: " +
                            std::to_string(u));
    }
    sk.censored[u] = 1;
  }
  return sk;
}

ChainState draw_effects(const SimulationSpec& spec,
                        const SimSkeleton& skeleton,
                        const ConstrainedIcarSampler& icar, Rng& rng) {
  const int n = icar.n();
  ChainState s;
  s.beta0_death = spec.beta0_death;
  s.beta0_treatment = spec.beta0_treatment;
  s.beta = spec.beta;
  s.tau2 = spec.tau2;
  s.tau2_death = spec.tau2_death;
  s.sigma2_death = spec.sigma2_death;
  s.sigma2_treatment = spec.sigma2_treatment;

  s.nu = icar.draw(spec.tau2, rng);
  for (std::size_t c = 0; c < skeleton.covariates.size(); ++c) {
    for (int i = 0; i < n; ++i) s.nu[i] += skeleton.covariates[c][i] * s.beta[c];
  }
  recenter(s.nu, 0.0);

  s.alpha_death = icar.draw(spec.tau2_death, rng);
  for (double& a : s.alpha_death) a += 1.0;
  recenter(s.alpha_death, 1.0);

  s.eps_death.resize(n);
  s.eps_treatment.resize(n);
  const double sd_d = std::sqrt(spec.sigma2_death);
  const double sd_t = std::sqrt(spec.sigma2_treatment);
  for (int i = 0; i < n; ++i) s.eps_death[i] = sd_d * rng.normal();
  for (int i = 0; i < n; ++i) s.eps_treatment[i] = sd_t * rng.normal();
  return s;
}

SimCounts draw_counts(const SimSkeleton& skeleton, const ChainState& state,
                      Rng& rng) {
  const int n = state.n();
  SimCounts c;
  c.deaths.resize(n);
  c.treatments_true.resize(n);
  c.treatments_lower.resize(n);
  for (int i = 0; i < n; ++i) {
    const double loglam_d = link_death(state.beta0_death,
                                       state.alpha_death[i], state.nu[i],
                                       state.eps_death[i]);
    c.deaths[i] = rng.poisson(skeleton.off_death[i] * std::exp(loglam_d));
  }
  for (int i = 0; i < n; ++i) {
    const double loglam_t = link_treatment(state.beta0_treatment, state.nu[i],
                                           state.eps_treatment[i]);
    c.treatments_true[i] =
        rng.poisson(skeleton.off_treat[i] * std::exp(loglam_t));
    c.treatments_lower[i] = skeleton.censored[i]
                                ? (c.treatments_true[i] / 10) * 10
                                : c.treatments_true[i];
  }
  return c;
}

SimulationResult simulate_dataset(const SimulationSpec& spec,
                                  const AdjacencyGraph& graph, Rng& rng) {
  spec.validate();
  if (!is_connected(graph)) {
    throw ValidationError("simulate_dataset requires a connected graph");
  }
  SimSkeleton sk = make_skeleton(spec, graph, rng);
  const ConstrainedIcarSampler icar(graph);
  ChainState truth = draw_effects(spec, sk, icar, rng);
  SimCounts counts = draw_counts(sk, truth, rng);

  if (spec.censor_threshold >= 0) {
    for (int i = 0; i < graph.n; ++i) {
      if (counts.treatments_true[i] < spec.censor_threshold) {
        sk.censored[i] = 1;
        counts.treatments_lower[i] = (counts.treatments_true[i] / 10) * 10;
      }
    }
  }

  SimulationResult out;
  out.truth = std::move(truth);
  out.treatments_true = counts.treatments_true;
  out.data = dataset_with_offsets(
      graph.n, std::move(counts.deaths), std::move(counts.treatments_lower),
      sk.censored, std::move(sk.populations), std::move(sk.covariates),
      std::move(sk.covariate_names), std::move(sk.off_death),
      std::move(sk.off_treat));
  return out;
}

}  // namespace spfactor
