#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace spfactor {

// Column-wise standardization transform, kept so reports can map coefficients
// back to raw covariate scale. Sample sd uses the n-1 denominator.
struct Standardization {
  std::vector<double> means;
  std::vector<double> sds;
};

struct OffsetResult {
  double rate = 0.0;                // statewide average rate, counts / person
  std::vector<double> offsets;      // E_i = P_i * rate
};

// rate = sum(counts) / sum(populations); offsets are proportional allocation.
// Errors: zero total count, nonpositive population.
OffsetResult compute_offsets(std::span<const std::int64_t> populations,
                             std::span<const std::int64_t> counts);

// Standardize columns in place to mean 0, sd 1 (n-1 denominator).
// Errors: constant column (named).
Standardization standardize_covariates(std::vector<std::vector<double>>& cols,
                                       const std::vector<std::string>& names);

// Observed counts, censoring record, offsets, and the standardized design
// matrix of the latent-factor regression. Immutable after assembly.
//
// Censoring: censored[i] != 0 means the true treatment count lies in
// [treatments_lower[i], treatments_lower[i] + 9].
struct Dataset {
  int n = 0;
  int p = 0;
  std::vector<std::int64_t> deaths;
  std::vector<std::int64_t> treatments_lower;
  std::vector<std::uint8_t> censored;
  std::vector<std::int64_t> populations;
  std::vector<std::vector<double>> covariates;  // p columns, each length n
  std::vector<std::string> covariate_names;
  std::vector<double> offsets_death;
  std::vector<double> offsets_treatment;
  double rate_death = 0.0;
  double rate_treatment = 0.0;
  Standardization standardization;

  // Throws ValidationError on any broken invariant (dimension mismatch,
  // nonpositive offsets, unstandardized covariate column, negative counts).
  void validate() const;
};

// Assemble from raw pieces: computes both offsets (censored units contribute
// their observed lower bound to the treatment rate -- logged, documented
// choice) and standardizes the covariates.
Dataset assemble_dataset(int n, std::vector<std::int64_t> deaths,
                         std::vector<std::int64_t> treatments_lower,
                         std::vector<std::uint8_t> censored,
                         std::vector<std::int64_t> populations,
                         std::vector<std::vector<double>> raw_covariates,
                         std::vector<std::string> covariate_names);

// Assemble with caller-fixed offsets (generative checks need E held fixed).
// Covariate columns must already be standardized.
Dataset dataset_with_offsets(int n, std::vector<std::int64_t> deaths,
                             std::vector<std::int64_t> treatments_lower,
                             std::vector<std::uint8_t> censored,
                             std::vector<std::int64_t> populations,
                             std::vector<std::vector<double>> covariates,
                             std::vector<std::string> covariate_names,
                             std::vector<double> offsets_death,
                             std::vector<double> offsets_treatment);

// CSV ingestion. Data file header: unit_id,population,deaths,treatment_lower,
// censored. Covariate file header: unit_id,<name1>,...,<namep> with raw
// values. unit_id rows must be 0..n-1 in order.
struct DataRows {
  std::vector<std::int64_t> populations, deaths, treatments_lower;
  std::vector<std::uint8_t> censored;
};
DataRows load_data_csv(std::istream& in);

struct CovariateColumns {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
};
CovariateColumns load_covariates_csv(std::istream& in);

}  // namespace spfactor
