#include "spfactor/chain_state.hpp"

#include <cmath>

#include "spfactor/errors.hpp"

namespace spfactor {

bool ChainState::constraints_ok(double tol) const {
  double mean_nu = 0.0, mean_alpha = 0.0;
  for (double v : nu) mean_nu += v;
  for (double v : alpha_death) mean_alpha += v;
  mean_nu /= static_cast<double>(nu.size());
  mean_alpha /= static_cast<double>(alpha_death.size());
  return std::abs(mean_nu) < tol && std::abs(mean_alpha - 1.0) < tol &&
         tau2 > 0.0 && tau2_death > 0.0 && sigma2_death > 0.0 &&
         sigma2_treatment > 0.0;
}

std::size_t ChainState::flat_size() const {
  return 4 * nu.size() + 2 + beta.size() + 4;
}

void ChainState::flatten(std::vector<double>& out) const {
  out.clear();
  out.reserve(flat_size());
  out.insert(out.end(), nu.begin(), nu.end());
  out.insert(out.end(), alpha_death.begin(), alpha_death.end());
  out.insert(out.end(), eps_death.begin(), eps_death.end());
  out.insert(out.end(), eps_treatment.begin(), eps_treatment.end());
  out.push_back(beta0_death);
  out.push_back(beta0_treatment);
  out.insert(out.end(), beta.begin(), beta.end());
  out.push_back(tau2);
  out.push_back(tau2_death);
  out.push_back(sigma2_death);
  out.push_back(sigma2_treatment);
}

ChainState ChainState::unflatten(const std::vector<double>& flat, int n,
                                 int p) {
  if (flat.size() != static_cast<std::size_t>(4 * n + 2 + p + 4)) {
    throw ValidationError("chain record has wrong length");
  }
  ChainState s;
  auto it = flat.begin();
  s.nu.assign(it, it + n);
  it += n;
  s.alpha_death.assign(it, it + n);
  it += n;
  s.eps_death.assign(it, it + n);
  it += n;
  s.eps_treatment.assign(it, it + n);
  it += n;
  s.beta0_death = *it++;
  s.beta0_treatment = *it++;
  s.beta.assign(it, it + p);
  it += p;
  s.tau2 = *it++;
  s.tau2_death = *it++;
  s.sigma2_death = *it++;
  s.sigma2_treatment = *it++;
  return s;
}

std::vector<std::string> ChainState::flat_names(
    int n, const std::vector<std::string>& covariate_names) {
  std::vector<std::string> names;
  names.reserve(4 * n + 2 + covariate_names.size() + 4);
  const auto unit_block = [&](const std::string& prefix) {
    for (int i = 0; i < n; ++i) {
      names.push_back(prefix + "[" + std::to_string(i) + "]");
    }
  };
  unit_block("nu");
  unit_block("alpha_death");
  unit_block("eps_death");
  unit_block("eps_treatment");
  names.push_back("beta0_death");
  names.push_back("beta0_treatment");
  for (const auto& cn : covariate_names) names.push_back("beta." + cn);
  names.push_back("tau2");
  names.push_back("tau2_death");
  names.push_back("sigma2_death");
  names.push_back("sigma2_treatment");
  return names;
}

}  // namespace spfactor
