#pragma once

#include <span>
#include <string>
#include <vector>

namespace spfactor {

// Equal-tailed interval endpoints use linear interpolation between order
// statistics (the "type 7" definition: h = (N-1)q), fixed here so ports and
// post-processing agree exactly.
double quantile_sorted(std::span<const double> sorted, double q);
double quantile(std::vector<double> values, double q);

// Effective sample size by the initial-positive-sequence truncation of the
// autocovariances. Returns NaN for degenerate (zero-variance) series; never
// exceeds the series length.
double ess(std::span<const double> x);

// Split potential-scale-reduction over >= 2 chains (each split in half).
// NaN when fewer than two chains or all variation vanishes.
double split_rhat(const std::vector<std::span<const double>>& chains);

// alpha/(alpha+1) - 1/2: death loading rescaled against the unit treatment
// loading. Zero means equal influence of the two outcomes; the map is
// strictly increasing on (-1, inf). alpha = -1 yields NaN (flagged missing).
double rescale_loading(double alpha_death);
std::vector<double> rescale_loadings(std::span<const double> alpha_death);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double q_lo = 0.0;
  double q_hi = 0.0;
  double ess = 0.0;
  double rhat = 0.0;  // NaN when unavailable (single chain)
};

struct PosteriorSummary {
  double level = 0.95;
  std::vector<SummaryRow> rows;
};

// Per-parameter summaries pooled over chains: mean and equal-tailed interval
// at `level` from the pooled draws, ESS summed per chain, split-Rhat across
// chains. Each chain is a draws x params matrix sharing `names`.
PosteriorSummary summarize(
    const std::vector<std::string>& names,
    const std::vector<const std::vector<std::vector<double>>*>& chains,
    double level);

// Derived per-unit series reconstructed draw by draw from the flat records:
// log standardized mortality ratio (log lambda_death), log standardized
// treatment rate ratio (log lambda_treatment), rescaled loading.
struct PerUnitSeries {
  int n = 0;
  std::vector<std::vector<double>> log_smr;   // [draw][unit]
  std::vector<std::vector<double>> log_trr;   // [draw][unit]
  std::vector<std::vector<double>> loading;   // [draw][unit]
  std::vector<std::vector<double>> nu;        // [draw][unit]
};

PerUnitSeries per_unit_rates(const std::vector<std::vector<double>>& draws,
                             int n, int p);

struct PerUnitRow {
  int unit = 0;
  double log_smr_mean, log_smr_lo, log_smr_hi;
  double log_trr_mean, log_trr_lo, log_trr_hi;
  double loading_mean, loading_lo, loading_hi;
  double nu_mean, nu_lo, nu_hi;
};

std::vector<PerUnitRow> summarize_per_unit(const PerUnitSeries& series,
                                           double level);

}  // namespace spfactor
