#include "spfactor/full_conditionals.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "spfactor/errors.hpp"

namespace spfactor {

std::vector<double> xtqx(const AdjacencyGraph& g,
                         const std::vector<std::vector<double>>& x_cols) {
  const int p = static_cast<int>(x_cols.size());
  std::vector<double> out(static_cast<std::size_t>(p) * p, 0.0);
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      const double v = cross_quadform(g, x_cols[a], x_cols[b]);
      out[a * p + b] = v;
      out[b * p + a] = v;
    }
  }
  return out;
}

std::vector<double> xtq_vec(const AdjacencyGraph& g,
                            const std::vector<std::vector<double>>& x_cols,
                            std::span<const double> r) {
  std::vector<double> out(x_cols.size());
  for (std::size_t c = 0; c < x_cols.size(); ++c) {
    out[c] = cross_quadform(g, x_cols[c], r);
  }
  return out;
}

std::vector<double> gibbs_beta_cached(std::span<const double> xtqx_flat,
                                      std::span<const double> xtq_nu,
                                      double tau2, const PriorSpec& prior,
                                      Rng& rng) {
  const int p = static_cast<int>(xtq_nu.size());
  if (p == 0) return {};
  Eigen::MatrixXd precision(p, p);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      precision(a, b) = xtqx_flat[a * p + b] / tau2;
    }
    precision(a, a) += 1.0 / prior.beta_variance;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw ComputeError("gibbs_beta: precision factorization failed");
  }
  Eigen::VectorXd b(p);
  for (int a = 0; a < p; ++a) b(a) = xtq_nu[a] / tau2;
  const Eigen::VectorXd mean = llt.solve(b);
  // z ~ N(0, I); solving L' u = z gives u ~ N(0, precision^{-1}).
  Eigen::VectorXd z(p);
  for (int a = 0; a < p; ++a) z(a) = rng.normal();
  const Eigen::VectorXd u = llt.matrixU().solve(z);
  std::vector<double> draw(p);
  for (int a = 0; a < p; ++a) draw[a] = mean(a) + u(a);
  return draw;
}

std::vector<double> gibbs_beta(const ChainState& state,
                               const AdjacencyGraph& g,
                               const std::vector<std::vector<double>>& x_cols,
                               const PriorSpec& prior, Rng& rng) {
  const auto xtqx_flat = xtqx(g, x_cols);
  const auto xtq_nu = xtq_vec(g, x_cols, state.nu);
  return gibbs_beta_cached(xtqx_flat, xtq_nu, state.tau2, prior, rng);
}

double gibbs_variance_ex(int kernel_dim, double quadform, double a0, double b0,
                         Rng& rng) {
  const double shape = 0.5 * kernel_dim + a0;
  const double scale = 0.5 * quadform + b0;
  if (!(shape > 0.0)) {
    throw ValidationError("gibbs_variance: nonpositive shape " +
                          std::to_string(shape));
  }
  if (!(scale > 0.0)) {
    throw ValidationError("gibbs_variance: nonpositive scale (quadform " +
                          std::to_string(quadform) + ")");
  }
  // 1/V ~ Gamma(shape, rate = scale)
  return scale / rng.gamma(shape);
}

double gibbs_variance(double quadform, int n, Rng& rng) {
  if (n < 3) {
    throw ValidationError("gibbs_variance: need n >= 3, got " +
                          std::to_string(n));
  }
  return gibbs_variance_ex(n, quadform, -0.5, 0.0, rng);
}

std::vector<double> factor_mean(const std::vector<std::vector<double>>& x_cols,
                                std::span<const double> beta, int n) {
  std::vector<double> mean(n, 0.0);
  for (std::size_t c = 0; c < x_cols.size(); ++c) {
    const double bc = beta[c];
    for (int i = 0; i < n; ++i) mean[i] += x_cols[c][i] * bc;
  }
  return mean;
}

double logdensity_nu(const ChainState& state, const AdjacencyGraph& g,
                     const std::vector<std::vector<double>>& x_cols,
                     const Dataset& data) {
  const LinkState link = link_from_state(state);
  const auto mean = factor_mean(x_cols, state.beta, state.n());
  const double qf = precision_quadform(g, state.nu, mean);
  return joint_loglik(data, link) - 0.5 * qf / state.tau2;
}

double logdensity_alpha(const ChainState& state, const AdjacencyGraph& g,
                        const Dataset& data) {
  const LinkState link = link_from_state(state);
  const std::vector<double> ones(state.n(), 1.0);
  const double qf = precision_quadform(g, state.alpha_death, ones);
  return joint_loglik(data, link) - 0.5 * qf / state.tau2_death;
}

double logdensity_eps_pair(const ChainState& state, const Dataset& data,
                           int i) {
  if (i < 0 || i >= state.n()) {
    throw ValidationError("logdensity_eps_pair: index out of range");
  }
  const double loglam_d = link_death(state.beta0_death, state.alpha_death[i],
                                     state.nu[i], state.eps_death[i]);
  const double loglam_t = link_treatment(state.beta0_treatment, state.nu[i],
                                         state.eps_treatment[i]);
  const double ed = state.eps_death[i];
  const double et = state.eps_treatment[i];
  return unit_loglik(data, i, loglam_d, loglam_t) -
         0.5 * ed * ed / state.sigma2_death -
         0.5 * et * et / state.sigma2_treatment;
}

double logdensity_intercepts(const ChainState& state, const Dataset& data,
                             Outcome which, const PriorSpec& prior) {
  const LinkState link = link_from_state(state);
  const double b0 = which == Outcome::death ? state.beta0_death
                                            : state.beta0_treatment;
  return outcome_loglik(data, link, which) + prior.intercept_log_kernel(b0);
}

}  // namespace spfactor
