#pragma once

#include <string>
#include <vector>

namespace spfactor {

// One full parameter vector of the model. nu is mean-zero and alpha_death is
// mean-one by construction; the sampler re-centers on every sweep so the
// constraints hold to ~1e-15 throughout a run.
struct ChainState {
  std::vector<double> nu;           // shared spatial factor
  std::vector<double> alpha_death;  // death loadings (treatment loading == 1)
  std::vector<double> eps_death;
  std::vector<double> eps_treatment;
  double beta0_death = 0.0;
  double beta0_treatment = 0.0;
  std::vector<double> beta;         // latent-factor regression coefficients
  double tau2 = 1.0;
  double tau2_death = 1.0;
  double sigma2_death = 1.0;
  double sigma2_treatment = 1.0;

  int n() const { return static_cast<int>(nu.size()); }
  int p() const { return static_cast<int>(beta.size()); }

  // |mean(nu)| and |mean(alpha_death) - 1| below tol, variances positive.
  bool constraints_ok(double tol = 1e-12) const;

  // Flat parameter layout used by chain records: nu[0..n), alpha_death[0..n),
  // eps_death[0..n), eps_treatment[0..n), beta0_death, beta0_treatment,
  // beta[0..p), tau2, tau2_death, sigma2_death, sigma2_treatment.
  std::size_t flat_size() const;
  void flatten(std::vector<double>& out) const;
  static ChainState unflatten(const std::vector<double>& flat, int n, int p);
  static std::vector<std::string> flat_names(
      int n, const std::vector<std::string>& covariate_names);
};

}  // namespace spfactor
