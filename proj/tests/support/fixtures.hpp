#pragma once

// Shared in-memory fixtures for unit tests.

#include <cstdint>
#include <vector>

#include "spfactor/chain_state.hpp"
#include "spfactor/dataset.hpp"
#include "spfactor/rng.hpp"

namespace fixtures {

inline spfactor::Dataset tiny_dataset(std::vector<std::int64_t> deaths,
                                      std::vector<std::int64_t> lower,
                                      std::vector<std::uint8_t> censored,
                                      std::vector<double> off_death,
                                      std::vector<double> off_treat) {
  const int n = static_cast<int>(deaths.size());
  return spfactor::dataset_with_offsets(
      n, std::move(deaths), std::move(lower), std::move(censored),
      std::vector<std::int64_t>(n, 1000), {}, {}, std::move(off_death),
      std::move(off_treat));
}

// Random counts with offsets near 20-80, optional censored units.
inline spfactor::Dataset random_dataset(int n, int censored_count,
                                        spfactor::Rng& rng) {
  std::vector<std::int64_t> deaths(n), lower(n);
  std::vector<std::uint8_t> censored(n, 0);
  std::vector<double> off_d(n), off_t(n);
  for (int i = 0; i < n; ++i) {
    off_d[i] = 20.0 + 60.0 * rng.uniform();
    off_t[i] = 20.0 + 60.0 * rng.uniform();
    deaths[i] = rng.poisson(off_d[i]);
    const auto treat = rng.poisson(off_t[i]);
    lower[i] = treat;
  }
  for (int c = 0; c < censored_count && c < n; ++c) {
    censored[c] = 1;
    lower[c] = (lower[c] / 10) * 10;
  }
  return tiny_dataset(std::move(deaths), std::move(lower), std::move(censored),
                      std::move(off_d), std::move(off_t));
}

// Centered random state with p coefficients.
inline spfactor::ChainState random_state(int n, int p, spfactor::Rng& rng) {
  spfactor::ChainState s;
  s.nu.resize(n);
  s.alpha_death.resize(n);
  s.eps_death.resize(n);
  s.eps_treatment.resize(n);
  double mnu = 0.0, malpha = 0.0;
  for (int i = 0; i < n; ++i) {
    s.nu[i] = 0.4 * rng.normal();
    s.alpha_death[i] = 1.0 + 0.3 * rng.normal();
    s.eps_death[i] = 0.2 * rng.normal();
    s.eps_treatment[i] = 0.2 * rng.normal();
    mnu += s.nu[i];
    malpha += s.alpha_death[i];
  }
  mnu /= n;
  malpha = malpha / n - 1.0;
  for (int i = 0; i < n; ++i) {
    s.nu[i] -= mnu;
    s.alpha_death[i] -= malpha;
  }
  s.beta0_death = 0.3 * rng.normal();
  s.beta0_treatment = 0.3 * rng.normal();
  s.beta.resize(p);
  for (int c = 0; c < p; ++c) s.beta[c] = 0.5 * rng.normal();
  s.tau2 = 0.2 + rng.uniform();
  s.tau2_death = 0.2 + rng.uniform();
  s.sigma2_death = 0.1 + rng.uniform();
  s.sigma2_treatment = 0.1 + rng.uniform();
  return s;
}

// Standardized random covariate columns.
inline std::vector<std::vector<double>> random_covariates(int n, int p,
                                                          spfactor::Rng& rng) {
  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  std::vector<std::string> names;
  for (int c = 0; c < p; ++c) {
    names.push_back("x" + std::to_string(c));
    for (int i = 0; i < n; ++i) cols[c][i] = rng.normal();
  }
  if (p > 0) spfactor::standardize_covariates(cols, names);
  return cols;
}

}  // namespace fixtures
