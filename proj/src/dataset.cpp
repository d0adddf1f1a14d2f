#include "spfactor/dataset.hpp"

#include <cmath>
#include <istream>
#include <utility>

#include "spfactor/csv.hpp"
#include "spfactor/errors.hpp"

namespace spfactor {

OffsetResult compute_offsets(std::span<const std::int64_t> populations,
                             std::span<const std::int64_t> counts) {
  if (populations.size() != counts.size() || populations.empty()) {
    throw ValidationError("compute_offsets: length mismatch or empty input");
  }
  double total_count = 0.0;
  double total_pop = 0.0;
  for (std::size_t i = 0; i < populations.size(); ++i) {
    if (populations[i] <= 0) {
      throw ValidationError("compute_offsets: nonpositive population at unit " +
                            std::to_string(i));
    }
    if (counts[i] < 0) {
      throw ValidationError("compute_offsets: negative count at unit " +
                            std::to_string(i));
    }
    total_count += static_cast<double>(counts[i]);
    total_pop += static_cast<double>(populations[i]);
  }
  if (total_count <= 0.0) {
    throw ValidationError("compute_offsets: total count is zero");
  }
  OffsetResult out;
  out.rate = total_count / total_pop;
  out.offsets.resize(populations.size());
  for (std::size_t i = 0; i < populations.size(); ++i) {
    out.offsets[i] = static_cast<double>(populations[i]) * out.rate;
  }
  return out;
}

Standardization standardize_covariates(std::vector<std::vector<double>>& cols,
                                       const std::vector<std::string>& names) {
  Standardization tf;
  tf.means.reserve(cols.size());
  tf.sds.reserve(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    auto& col = cols[c];
    const std::size_t n = col.size();
    if (n < 2) throw ValidationError("standardize: need at least 2 rows");
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      const std::string name =
          c < names.size() ? names[c] : std::to_string(c);
      throw ValidationError("covariate column '" + name +
                            "' is constant; cannot standardize");
    }
    for (double& v : col) v = (v - mean) / sd;
    tf.means.push_back(mean);
    tf.sds.push_back(sd);
  }
  return tf;
}

void Dataset::validate() const {
  const auto expect_len = [this](std::size_t len, const char* what) {
    if (len != static_cast<std::size_t>(n)) {
      throw ValidationError(std::string("dataset: ") + what +
                            " has length " + std::to_string(len) +
                            ", expected " + std::to_string(n));
    }
  };
  if (n <= 0) throw ValidationError("dataset: no units");
  expect_len(deaths.size(), "deaths");
  expect_len(treatments_lower.size(), "treatments_lower");
  expect_len(censored.size(), "censored");
  expect_len(populations.size(), "populations");
  expect_len(offsets_death.size(), "offsets_death");
  expect_len(offsets_treatment.size(), "offsets_treatment");
  if (covariates.size() != static_cast<std::size_t>(p)) {
    throw ValidationError("dataset: covariate column count mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (deaths[i] < 0 || treatments_lower[i] < 0) {
      throw ValidationError("dataset: negative count at unit " +
                            std::to_string(i));
    }
    if (populations[i] <= 0) {
      throw ValidationError("dataset: nonpositive population at unit " +
                            std::to_string(i));
    }
    if (!(offsets_death[i] > 0.0) || !(offsets_treatment[i] > 0.0) ||
        !std::isfinite(offsets_death[i]) ||
        !std::isfinite(offsets_treatment[i])) {
      throw ValidationError("dataset: nonpositive or non-finite offset at "
                            "unit " + std::to_string(i));
    }
    if (censored[i] > 1) {
      throw ValidationError("dataset: censored flag must be 0 or 1 at unit " +
                            std::to_string(i));
    }
  }
  for (int c = 0; c < p; ++c) {
    expect_len(covariates[c].size(), "covariate column");
    double mean = 0.0;
    for (double v : covariates[c]) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : covariates[c]) ss += (v - mean) * (v - mean);
    const double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    if (std::abs(mean) >= 1e-10 || std::abs(sd - 1.0) >= 1e-8) {
      const std::string name = c < static_cast<int>(covariate_names.size())
                                   ? covariate_names[c]
                                   : std::to_string(c);
      throw ValidationError("dataset: covariate column '" + name +
                            "' is not standardized");
    }
  }
}

Dataset assemble_dataset(int n, std::vector<std::int64_t> deaths,
                         std::vector<std::int64_t> treatments_lower,
                         std::vector<std::uint8_t> censored,
                         std::vector<std::int64_t> populations,
                         std::vector<std::vector<double>> raw_covariates,
                         std::vector<std::string> covariate_names) {
  Dataset d;
  d.n = n;
  d.p = static_cast<int>(raw_covariates.size());
  d.deaths = std::move(deaths);
  d.treatments_lower = std::move(treatments_lower);
  d.censored = std::move(censored);
  d.populations = std::move(populations);
  d.covariates = std::move(raw_covariates);
  d.covariate_names = std::move(covariate_names);

  auto death_off = compute_offsets(d.populations, d.deaths);
  // Censored units enter the statewide treatment rate at their observed lower
  // bound; the perturbation is at most 9 counts per censored unit.
  auto treat_off = compute_offsets(d.populations, d.treatments_lower);
  d.rate_death = death_off.rate;
  d.rate_treatment = treat_off.rate;
  d.offsets_death = std::move(death_off.offsets);
  d.offsets_treatment = std::move(treat_off.offsets);
  d.standardization = standardize_covariates(d.covariates, d.covariate_names);
  d.validate();
  return d;
}

Dataset dataset_with_offsets(int n, std::vector<std::int64_t> deaths,
                             std::vector<std::int64_t> treatments_lower,
                             std::vector<std::uint8_t> censored,
                             std::vector<std::int64_t> populations,
                             std::vector<std::vector<double>> covariates,
                             std::vector<std::string> covariate_names,
                             std::vector<double> offsets_death,
                             std::vector<double> offsets_treatment) {
  Dataset d;
  d.n = n;
  d.p = static_cast<int>(covariates.size());
  d.deaths = std::move(deaths);
  d.treatments_lower = std::move(treatments_lower);
  d.censored = std::move(censored);
  d.populations = std::move(populations);
  d.covariates = std::move(covariates);
  d.covariate_names = std::move(covariate_names);
  d.offsets_death = std::move(offsets_death);
  d.offsets_treatment = std::move(offsets_treatment);
  d.validate();
  return d;
}

DataRows load_data_csv(std::istream& in) {
  DataRows rows;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  std::int64_t expected_id = 0;
  while (csv::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (!saw_header) {
      const std::vector<std::string> want = {"unit_id", "population", "deaths",
                                             "treatment_lower", "censored"};
      if (f != want) {
        throw ValidationError(
            "data line 1: expected header "
            "'unit_id,population,deaths,treatment_lower,censored'");
      }
      saw_header = true;
      continue;
    }
    if (f.size() != 5) {
      throw ValidationError("data line " + std::to_string(lineno) +
                            ": expected 5 fields");
    }
    const long id = csv::parse_int(f[0], "data", lineno, "unit_id");
    if (id != expected_id) {
      throw ValidationError("data line " + std::to_string(lineno) +
                            ": unit_id must be " +
                            std::to_string(expected_id) + " (rows in order)");
    }
    ++expected_id;
    rows.populations.push_back(csv::parse_int(f[1], "data", lineno,
                                              "population"));
    rows.deaths.push_back(csv::parse_int(f[2], "data", lineno, "deaths"));
    rows.treatments_lower.push_back(
        csv::parse_int(f[3], "data", lineno, "treatment_lower"));
    const long c = csv::parse_int(f[4], "data", lineno, "censored");
    if (c != 0 && c != 1) {
      throw ValidationError("data line " + std::to_string(lineno) +
                            ": censored must be 0 or 1");
    }
    rows.censored.push_back(static_cast<std::uint8_t>(c));
  }
  if (!saw_header) throw ValidationError("data file is empty");
  if (rows.populations.empty()) throw ValidationError("data file has no rows");
  return rows;
}

CovariateColumns load_covariates_csv(std::istream& in) {
  CovariateColumns out;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  std::int64_t expected_id = 0;
  while (csv::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (!saw_header) {
      if (f.empty() || f[0] != "unit_id") {
        throw ValidationError(
            "covariates line 1: expected header 'unit_id,<name>,...'");
      }
      out.names.assign(f.begin() + 1, f.end());
      for (const auto& name : out.names) {
        if (name.empty()) {
          throw ValidationError("covariates line 1: empty column name");
        }
      }
      out.cols.assign(out.names.size(), {});
      saw_header = true;
      continue;
    }
    if (f.size() != out.names.size() + 1) {
      throw ValidationError("covariates line " + std::to_string(lineno) +
                            ": expected " +
                            std::to_string(out.names.size() + 1) + " fields");
    }
    const long id = csv::parse_int(f[0], "covariates", lineno, "unit_id");
    if (id != expected_id) {
      throw ValidationError("covariates line " + std::to_string(lineno) +
                            ": unit_id must be " +
                            std::to_string(expected_id) + " (rows in order)");
    }
    ++expected_id;
    for (std::size_t c = 0; c < out.names.size(); ++c) {
      out.cols[c].push_back(
          csv::parse_double(f[c + 1], "covariates", lineno, out.names[c]));
    }
  }
  if (!saw_header) throw ValidationError("covariates file is empty");
  return out;
}

}  // namespace spfactor
