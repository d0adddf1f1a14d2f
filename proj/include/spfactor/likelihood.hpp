#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spfactor/chain_state.hpp"
#include "spfactor/dataset.hpp"

namespace spfactor {

// log(k!) -- exact table for small integers, lgamma beyond.
double log_factorial(std::int64_t k);

// log P(Y = y) for Y ~ Poisson(mean). Errors on mean <= 1e-290 rather than
// silently returning -inf.
double poisson_logpmf(std::int64_t y, double mean);

// log P(lower <= Y <= lower + width) for Y ~ Poisson(mean), computed as a
// log-sum-exp over the pmf terms. Two CDF calls would cancel catastrophically
// when the interval mass is tiny; the pmf sum cannot.
double censored_interval_logprob(std::int64_t lower, std::int64_t width,
                                 double mean);

// Link-scale relative risks:
//   log lambda_death[i]     = beta0_death + alpha_death[i]*nu[i] + eps_death[i]
//   log lambda_treatment[i] = beta0_treatment + nu[i] + eps_treatment[i]
// (the treatment loading is pinned at 1). The expressions here are the single
// place the link is evaluated, so reconstruction is bit-for-bit.
struct LinkState {
  std::vector<double> log_lambda_death;
  std::vector<double> log_lambda_treatment;
};

LinkState link_from_state(const ChainState& state);
void link_from_state(const ChainState& state, LinkState& out);

inline double link_death(double beta0, double alpha, double nu, double eps) {
  return beta0 + alpha * nu + eps;
}
inline double link_treatment(double beta0, double nu, double eps) {
  return beta0 + nu + eps;
}

enum class Outcome { death, treatment };

// Reference per-outcome log likelihood; terms accumulate in ascending unit
// order. Censored treatment units contribute the width-9 interval
// probability.
double outcome_loglik(const Dataset& data, const LinkState& link,
                      Outcome which);

// outcome_loglik(death) + outcome_loglik(treatment).
double joint_loglik(const Dataset& data, const LinkState& link);

// The two terms of unit i at the given link values.
double unit_loglik(const Dataset& data, int i, double loglam_death,
                   double loglam_treatment);

// joint_loglik(link with unit i replaced) - joint_loglik(link); only unit i's
// terms change because units are conditionally independent given lambda.
double unit_loglik_delta(const Dataset& data, const LinkState& link, int i,
                         double proposed_loglam_death,
                         double proposed_loglam_treatment);

// Precomputed tables for the kernel-backed fast path used inside the sampler:
// counts and offsets as dense arrays, per-outcome additive constants, the
// uncensored treatment subset compacted, and lgamma tables for each censored
// unit's 10 support points.
struct LikCache {
  int n = 0;
  std::vector<double> y_death, off_death;
  double const_death = 0.0;
  std::vector<std::int32_t> unc_idx;
  std::vector<double> y_treat_unc, off_treat_unc;
  double const_treat = 0.0;
  struct CensUnit {
    std::int32_t idx;
    std::int64_t lower;
    double off;
    double log_off;
    std::vector<double> lgamma_tab;  // lgamma(k+1), k = lower .. lower+9
  };
  std::vector<CensUnit> cens;
};

LikCache build_lik_cache(const Dataset& data);

// Kernel-backed outcome sums. Equal to the corresponding joint_loglik factor
// up to the active kernel lane's accuracy (~1e-13 relative).
double death_loglik(const LikCache& c, std::span<const double> loglam_death);
// scratch must have unc_idx.size() elements.
double treatment_loglik(const LikCache& c,
                        std::span<const double> loglam_treatment,
                        std::span<double> scratch);

// Single censored-unit contribution given its cached tables.
double censored_unit_loglik(const LikCache::CensUnit& cu, double loglam);

}  // namespace spfactor
