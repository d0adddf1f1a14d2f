#include <doctest.h>

#include <cmath>

#include "spfactor/errors.hpp"
#include "spfactor/geweke.hpp"
#include "spfactor/recovery.hpp"

using namespace spfactor;

namespace {

SimulationSpec check_spec() {
  SimulationSpec spec;
  spec.lattice_rows = 2;
  spec.lattice_cols = 3;
  spec.beta = {0.3};
  spec.censored_units = {1};
  spec.pop_min = 1000;
  spec.pop_max = 4000;
  return spec;
}

}  // namespace

TEST_CASE("geweke with an identity kernel reduces to the forward simulator") {
  GewekeConfig cfg;
  cfg.kernel_steps = 0;
  cfg.forward_samples = 2000;
  cfg.chain_samples = 2000;
  cfg.min_ess = 1.0;
  cfg.seed = 3;
  const auto result = geweke_test(check_spec(), cfg);
  for (double z : result.z) CHECK(z == 0.0);
  CHECK(result.max_abs_z == 0.0);
}

TEST_CASE("geweke requires proper priors") {
  GewekeConfig cfg;
  cfg.priors = PriorSpec{};  // improper production priors
  CHECK_THROWS_AS(geweke_test(check_spec(), cfg), ValidationError);
}

TEST_CASE("geweke short smoke run stays in bounds") {
  GewekeConfig cfg;
  cfg.forward_samples = 20000;
  cfg.chain_samples = 20000;
  cfg.kernel_steps = 10;
  cfg.tune_iterations = 1000;
  cfg.min_ess = 150.0;
  cfg.seed = 7;
  const auto result = geweke_test(check_spec(), cfg);
  CHECK(result.enough_samples);
  CHECK(result.max_abs_z < 6.0);  // loose bound for a short run
  CHECK(result.names.size() == result.z.size());
  // battery includes parameter moments, quadforms, loglik, data sums
  CHECK(result.names.size() == 19);
}

TEST_CASE("recovery single-replicate smoke run emits one row per parameter") {
  SimulationSpec spec;
  spec.lattice_rows = 3;
  spec.lattice_cols = 3;
  spec.beta = {0.3};
  RecoveryConfig cfg;
  cfg.replicates = 1;
  cfg.threads = 1;
  cfg.fit.iterations = 1200;
  cfg.fit.burn_in = 400;
  cfg.fit.thin = 2;
  cfg.seed = 11;
  const auto result = recovery_study(spec, cfg);
  // beta + four variances
  CHECK(result.rows.size() == 5);
  CHECK(result.aggregate.size() == 5);
  for (const auto& a : result.aggregate) CHECK(a.total == 1);
  CHECK(result.aggregate[0].param == "beta.x1");
}

TEST_CASE("recovery calibration under a null signal covers near nominal") {
  SimulationSpec spec;
  spec.lattice_rows = 4;
  spec.lattice_cols = 4;
  spec.beta = {0.0};  // null: truth at the prior mean
  RecoveryConfig cfg;
  cfg.replicates = 8;
  cfg.threads = 2;
  cfg.fit.iterations = 2500;
  cfg.fit.burn_in = 1000;
  cfg.fit.thin = 3;
  cfg.seed = 13;
  const auto result = recovery_study(spec, cfg);
  int covered = 0;
  for (const auto& a : result.aggregate) {
    if (a.param == "beta.x1") covered = a.covered;
  }
  CHECK(covered >= 5);  // ~95% nominal; 8 replicates
}
