#include "spfactor/likelihood.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "spfactor/errors.hpp"
#include "spfactor/kernels.hpp"

namespace spfactor {
namespace {

constexpr double kMeanFloor = 1e-290;
constexpr int kLogFactTableSize = 257;

const double* log_fact_table() {
  static const auto table = [] {
    std::array<double, kLogFactTableSize> t{};
    long double acc = 0.0L;
    t[0] = 0.0;
    for (int k = 1; k < kLogFactTableSize; ++k) {
      acc += std::log(static_cast<long double>(k));
      t[k] = static_cast<double>(acc);
    }
    return t;
  }();
  return table.data();
}

void check_mean(double mean) {
  if (!(mean > kMeanFloor)) {
    throw ComputeError("poisson mean out of range (must exceed 1e-290): " +
                       std::to_string(mean));
  }
}

}  // namespace

double log_factorial(std::int64_t k) {
  if (k < 0) throw ComputeError("log_factorial: negative argument");
  if (k < kLogFactTableSize) return log_fact_table()[k];
  return std::lgamma(static_cast<double>(k) + 1.0);
}

double poisson_logpmf(std::int64_t y, double mean) {
  check_mean(mean);
  if (y < 0) throw ComputeError("poisson_logpmf: negative count");
  return static_cast<double>(y) * std::log(mean) - mean - log_factorial(y);
}

double censored_interval_logprob(std::int64_t lower, std::int64_t width,
                                 double mean) {
  check_mean(mean);
  if (lower < 0 || width < 0) {
    throw ComputeError("censored_interval_logprob: negative lower or width");
  }
  const double log_mean = std::log(mean);
  // t_k = k*log(mean) - mean - log(k!), log-sum-exp over k in [lower, lower+width]
  double max_term = -std::numeric_limits<double>::infinity();
  for (std::int64_t k = lower; k <= lower + width; ++k) {
    const double t =
        static_cast<double>(k) * log_mean - mean - log_factorial(k);
    if (t > max_term) max_term = t;
  }
  double acc = 0.0;
  for (std::int64_t k = lower; k <= lower + width; ++k) {
    const double t =
        static_cast<double>(k) * log_mean - mean - log_factorial(k);
    acc += std::exp(t - max_term);
  }
  return max_term + std::log(acc);
}

LinkState link_from_state(const ChainState& state) {
  LinkState link;
  link_from_state(state, link);
  return link;
}

void link_from_state(const ChainState& state, LinkState& out) {
  const int n = state.n();
  out.log_lambda_death.resize(n);
  out.log_lambda_treatment.resize(n);
  for (int i = 0; i < n; ++i) {
    out.log_lambda_death[i] = link_death(state.beta0_death,
                                         state.alpha_death[i], state.nu[i],
                                         state.eps_death[i]);
    out.log_lambda_treatment[i] = link_treatment(
        state.beta0_treatment, state.nu[i], state.eps_treatment[i]);
  }
}

double unit_loglik(const Dataset& data, int i, double loglam_death,
                   double loglam_treatment) {
  const double mean_death = data.offsets_death[i] * std::exp(loglam_death);
  const double mean_treat =
      data.offsets_treatment[i] * std::exp(loglam_treatment);
  double ll = poisson_logpmf(data.deaths[i], mean_death);
  if (data.censored[i]) {
    ll += censored_interval_logprob(data.treatments_lower[i], 9, mean_treat);
  } else {
    ll += poisson_logpmf(data.treatments_lower[i], mean_treat);
  }
  return ll;
}

double outcome_loglik(const Dataset& data, const LinkState& link,
                      Outcome which) {
  if (static_cast<int>(link.log_lambda_death.size()) != data.n ||
      static_cast<int>(link.log_lambda_treatment.size()) != data.n) {
    throw ValidationError("outcome_loglik: link length mismatch");
  }
  double ll = 0.0;
  if (which == Outcome::death) {
    for (int i = 0; i < data.n; ++i) {
      const double mean = data.offsets_death[i] *
                          std::exp(link.log_lambda_death[i]);
      ll += poisson_logpmf(data.deaths[i], mean);
    }
  } else {
    for (int i = 0; i < data.n; ++i) {
      const double mean = data.offsets_treatment[i] *
                          std::exp(link.log_lambda_treatment[i]);
      if (data.censored[i]) {
        ll += censored_interval_logprob(data.treatments_lower[i], 9, mean);
      } else {
        ll += poisson_logpmf(data.treatments_lower[i], mean);
      }
    }
  }
  return ll;
}

double joint_loglik(const Dataset& data, const LinkState& link) {
  return outcome_loglik(data, link, Outcome::death) +
         outcome_loglik(data, link, Outcome::treatment);
}

double unit_loglik_delta(const Dataset& data, const LinkState& link, int i,
                         double proposed_loglam_death,
                         double proposed_loglam_treatment) {
  if (i < 0 || i >= data.n) {
    throw ValidationError("unit_loglik_delta: index out of range");
  }
  return unit_loglik(data, i, proposed_loglam_death,
                     proposed_loglam_treatment) -
         unit_loglik(data, i, link.log_lambda_death[i],
                     link.log_lambda_treatment[i]);
}

LikCache build_lik_cache(const Dataset& data) {
  LikCache c;
  c.n = data.n;
  c.y_death.resize(data.n);
  c.off_death.resize(data.n);
  for (int i = 0; i < data.n; ++i) {
    c.y_death[i] = static_cast<double>(data.deaths[i]);
    c.off_death[i] = data.offsets_death[i];
    c.const_death += c.y_death[i] * std::log(data.offsets_death[i]) -
                     log_factorial(data.deaths[i]);
  }
  for (int i = 0; i < data.n; ++i) {
    if (data.censored[i]) {
      LikCache::CensUnit cu;
      cu.idx = i;
      cu.lower = data.treatments_lower[i];
      cu.off = data.offsets_treatment[i];
      cu.log_off = std::log(cu.off);
      cu.lgamma_tab.resize(10);
      for (int k = 0; k < 10; ++k) {
        cu.lgamma_tab[k] = log_factorial(cu.lower + k);
      }
      c.cens.push_back(std::move(cu));
    } else {
      c.unc_idx.push_back(i);
      c.y_treat_unc.push_back(static_cast<double>(data.treatments_lower[i]));
      c.off_treat_unc.push_back(data.offsets_treatment[i]);
      c.const_treat +=
          static_cast<double>(data.treatments_lower[i]) *
              std::log(data.offsets_treatment[i]) -
          log_factorial(data.treatments_lower[i]);
    }
  }
  return c;
}

double death_loglik(const LikCache& c, std::span<const double> loglam_death) {
  return kernels::poisson_term_sum(c.y_death.data(), loglam_death.data(),
                                   c.off_death.data(), c.y_death.size()) +
         c.const_death;
}

double censored_unit_loglik(const LikCache::CensUnit& cu, double loglam) {
  const double log_mean = cu.log_off + loglam;
  const double mean = cu.off * std::exp(loglam);
  double max_term = -std::numeric_limits<double>::infinity();
  std::array<double, 10> terms;
  for (int k = 0; k < 10; ++k) {
    terms[k] = static_cast<double>(cu.lower + k) * log_mean - mean -
               cu.lgamma_tab[k];
    max_term = std::max(max_term, terms[k]);
  }
  double acc = 0.0;
  for (int k = 0; k < 10; ++k) acc += std::exp(terms[k] - max_term);
  return max_term + std::log(acc);
}

double treatment_loglik(const LikCache& c,
                        std::span<const double> loglam_treatment,
                        std::span<double> scratch) {
  const std::size_t m = c.unc_idx.size();
  for (std::size_t k = 0; k < m; ++k) {
    scratch[k] = loglam_treatment[c.unc_idx[k]];
  }
  double ll = kernels::poisson_term_sum(c.y_treat_unc.data(), scratch.data(),
                                        c.off_treat_unc.data(), m) +
              c.const_treat;
  for (const auto& cu : c.cens) {
    ll += censored_unit_loglik(cu, loglam_treatment[cu.idx]);
  }
  return ll;
}

}  // namespace spfactor
