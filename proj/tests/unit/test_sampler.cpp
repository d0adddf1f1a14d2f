#include <doctest.h>

#include <cmath>

#include "spfactor/errors.hpp"
#include "spfactor/sampler.hpp"
#include "spfactor/simulator.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace spfactor;

namespace {

SamplerConfig prior_only_config(std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.likelihood_enabled = false;
  cfg.update_alpha = false;
  cfg.update_eps = false;
  cfg.update_intercepts = false;
  cfg.update_beta = false;
  cfg.update_variances = false;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("adapt applies the batch rule") {
  AdaptiveScale s;
  for (int i = 0; i < 50; ++i) adapt(s, true, 0.44, 50);
  CHECK(s.step() == doctest::Approx(std::exp(0.05)).epsilon(1e-12));
  CHECK(s.batch_count == 1);
  CHECK(s.proposal_count == 0);
  for (int i = 0; i < 50; ++i) adapt(s, false, 0.44, 50);
  CHECK(s.step() == doctest::Approx(1.0).epsilon(1e-12));
  // partial batch leaves the step untouched
  for (int i = 0; i < 49; ++i) adapt(s, true, 0.44, 50);
  CHECK(s.step() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("adaptation self-tunes to the target on a normal target") {
  // random-walk MH on a standard normal
  Rng rng(7);
  AdaptiveScale scale;
  scale.log_step = std::log(8.0);  // start far too wide
  double x = 0.0;
  std::int64_t accepted = 0, proposals = 0;
  const int total = 60000;
  for (int t = 0; t < total; ++t) {
    const double y = x + scale.step() * rng.normal();
    const bool acc = std::log(rng.uniform()) < 0.5 * (x * x - y * y);
    if (acc) x = y;
    if (t < total / 2) {
      adapt(scale, acc, 0.44, 50);
    } else {
      ++proposals;
      accepted += acc ? 1 : 0;
    }
  }
  const double rate = double(accepted) / double(proposals);
  CHECK(rate == doctest::Approx(0.44).epsilon(0.12));  // 0.44 +- ~0.05
}

TEST_CASE("init_state satisfies constraints and is seed-deterministic") {
  Rng rng1(5), rng2(5), rng3(6);
  const auto g = make_lattice(3, 3);
  Rng drng(1);
  const auto data = fixtures::random_dataset(9, 1, drng);
  const auto s1 = init_state(g, data, rng1);
  const auto s2 = init_state(g, data, rng2);
  const auto s3 = init_state(g, data, rng3);
  CHECK(s1.constraints_ok(1e-12));
  CHECK(s1.nu == s2.nu);
  CHECK(s1.nu != s3.nu);
  CHECK(s1.tau2 == 1.0);
  CHECK(s1.beta0_death == 0.0);
}

TEST_CASE("degenerate proposals leave the state unchanged") {
  Rng drng(2);
  const auto g = make_lattice(2, 3);
  const auto data = fixtures::random_dataset(6, 1, drng);
  SamplerConfig cfg;
  cfg.initial_step_nu = 1e-12;
  cfg.initial_step_alpha = 1e-12;
  cfg.initial_step_eps = 1e-12;
  cfg.initial_step_intercept = 1e-12;
  SamplerCore core(cfg, g, data);
  Rng rng(3);
  auto state = init_state(g, data, rng);
  const auto before = state;
  core.iterate(state, rng, false);
  for (int i = 0; i < 6; ++i) {
    CHECK(std::fabs(state.nu[i] - before.nu[i]) < 1e-9);
    CHECK(std::fabs(state.alpha_death[i] - before.alpha_death[i]) < 1e-9);
  }
  const auto rep = core.report();
  // near-zero steps accept essentially every proposal
  for (const auto& b : rep.blocks) {
    if (b.proposals == 0) continue;
    CHECK(double(b.accepts) / double(b.proposals) > 0.95);
  }
}

TEST_CASE("prior-only nu chain matches the ICAR trace identity") {
  // E[nu' Q nu] = (n-1) tau^2 under the centered prior (tau^2 = 1 here)
  const auto g = build_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  Rng drng(4);
  const auto data = fixtures::random_dataset(5, 0, drng);
  auto cfg = prior_only_config(11);
  cfg.iterations = 33000;
  cfg.burn_in = 3000;
  cfg.thin = 1;
  const auto run = run_chain(cfg, g, data);
  double acc = 0.0;
  for (const auto& draw : run.draws) {
    const auto st = ChainState::unflatten(draw, 5, data.p);
    acc += residual_quadform(g, st.nu);
  }
  acc /= double(run.draws.size());
  CHECK(acc == doctest::Approx(4.0).epsilon(0.10));
}

TEST_CASE("prior-only alpha chain is centered at one with ICAR spread") {
  const auto g = build_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  Rng drng(5);
  const auto data = fixtures::random_dataset(5, 0, drng);
  SamplerConfig cfg = prior_only_config(13);
  cfg.update_nu = false;
  cfg.update_alpha = true;
  cfg.iterations = 33000;
  cfg.burn_in = 3000;
  cfg.thin = 1;
  const auto run = run_chain(cfg, g, data);
  double acc = 0.0;
  for (const auto& draw : run.draws) {
    const auto st = ChainState::unflatten(draw, 5, data.p);
    std::vector<double> am1(st.alpha_death);
    for (double& a : am1) a -= 1.0;
    acc += residual_quadform(g, am1);
    CHECK(st.constraints_ok(1e-12));
  }
  acc /= double(run.draws.size());
  CHECK(acc == doctest::Approx(4.0).epsilon(0.10));
}

TEST_CASE("prior-only eps chain has the right stationary variance") {
  const auto g = make_lattice(2, 3);
  Rng drng(6);
  const auto data = fixtures::random_dataset(6, 0, drng);
  SamplerConfig cfg = prior_only_config(17);
  cfg.update_nu = false;
  cfg.update_eps = true;
  cfg.iterations = 22000;
  cfg.burn_in = 2000;
  cfg.thin = 1;
  const auto run = run_chain(cfg, g, data);
  double ss = 0.0;
  std::size_t count = 0;
  for (const auto& draw : run.draws) {
    const auto st = ChainState::unflatten(draw, 6, data.p);
    for (double e : st.eps_death) {
      ss += e * e;
      ++count;
    }
  }
  CHECK(ss / double(count) == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("chains are reproducible per seed and differ across seeds") {
  const auto g = make_lattice(2, 3);
  Rng drng(7);
  const auto data = fixtures::random_dataset(6, 1, drng);
  SamplerConfig cfg;
  cfg.iterations = 300;
  cfg.burn_in = 100;
  cfg.thin = 2;
  cfg.seed = 42;
  const auto r1 = run_chain(cfg, g, data);
  const auto r2 = run_chain(cfg, g, data);
  CHECK(r1.draws == r2.draws);  // bit-for-bit

  cfg.seed = 43;
  const auto r3 = run_chain(cfg, g, data);
  CHECK(r1.draws != r3.draws);

  // chain id selects a distinct substream
  const auto r4 = run_chain(cfg, g, data, 1);
  CHECK(r3.draws != r4.draws);
}

TEST_CASE("centering constraints hold exactly along a run") {
  const auto g = make_lattice(2, 3);
  Rng drng(8);
  const auto data = fixtures::random_dataset(6, 1, drng);
  SamplerConfig cfg;
  cfg.iterations = 600;
  cfg.burn_in = 100;
  cfg.thin = 1;
  cfg.seed = 9;
  const auto run = run_chain(cfg, g, data);
  double worst_nu = 0.0, worst_alpha = 0.0;
  for (const auto& draw : run.draws) {
    const auto st = ChainState::unflatten(draw, 6, data.p);
    double mn = 0.0, ma = 0.0;
    for (double v : st.nu) mn += v;
    for (double v : st.alpha_death) ma += v;
    worst_nu = std::max(worst_nu, std::fabs(mn / 6.0));
    worst_alpha = std::max(worst_alpha, std::fabs(ma / 6.0 - 1.0));
    CHECK(st.tau2 > 0.0);
    CHECK(st.sigma2_treatment > 0.0);
  }
  CHECK(worst_nu < 1e-12);
  CHECK(worst_alpha < 1e-12);
}

TEST_CASE("saving bookkeeping: burn_in + 1 iterations saves exactly one draw") {
  const auto g = make_lattice(2, 2);
  Rng drng(9);
  const auto data = fixtures::random_dataset(4, 0, drng);
  SamplerConfig cfg;
  cfg.iterations = 101;
  cfg.burn_in = 100;
  cfg.thin = 1;
  const auto run = run_chain(cfg, g, data);
  CHECK(run.draws.size() == 1);
  CHECK(run.saved_iterations == std::vector<std::int64_t>{100});
}

TEST_CASE("recentering proposals are reversible to rounding") {
  // cand = nu + delta * (e_i - 1/n); applying -delta returns the start
  const int n = 6;
  Rng rng(10);
  std::vector<double> nu(n);
  for (auto& v : nu) v = rng.normal();
  const int i = 2;
  const double delta = 0.8;
  std::vector<double> cand(n);
  for (int j = 0; j < n; ++j) cand[j] = nu[j] - delta / n;
  cand[i] += delta;
  std::vector<double> back(n);
  for (int j = 0; j < n; ++j) back[j] = cand[j] + delta / n;
  back[i] -= delta;
  for (int j = 0; j < n; ++j) {
    CHECK(back[j] == doctest::Approx(nu[j]).epsilon(1e-14));
  }
}

TEST_CASE("acceptance probabilities satisfy the detailed-balance identity") {
  Rng rng(11);
  const auto g = make_lattice(2, 3);
  const auto x = fixtures::random_covariates(6, 1, rng);
  const auto data = fixtures::random_dataset(6, 1, rng);
  for (int rep = 0; rep < 10; ++rep) {
    auto sx = fixtures::random_state(6, 1, rng);
    auto sy = sx;
    const double delta = 0.5 * rng.normal();
    for (int j = 0; j < 6; ++j) sy.nu[j] -= delta / 6.0;
    sy.nu[3] += delta;
    const double diff = logdensity_nu(sy, g, x, data) -
                        logdensity_nu(sx, g, x, data);
    const double a_xy = std::min(1.0, std::exp(diff));
    const double a_yx = std::min(1.0, std::exp(-diff));
    CHECK(std::log(a_xy / a_yx) == doctest::Approx(diff).epsilon(1e-10));
  }
}

TEST_CASE("non-finite state aborts with a diagnostic") {
  const auto g = make_lattice(2, 2);
  Rng drng(12);
  const auto data = fixtures::random_dataset(4, 0, drng);
  SamplerConfig cfg;
  SamplerCore core(cfg, g, data);
  Rng rng(1);
  auto state = init_state(g, data, rng);
  state.nu[0] = std::numeric_limits<double>::infinity();
  state.nu[1] = -std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(core.update_nu_sweep(state, rng, false), ComputeError);
}

TEST_CASE("run_chain reports a state dump on non-finite densities") {
  const auto g = make_lattice(2, 2);
  Rng drng(14);
  auto data = fixtures::random_dataset(4, 0, drng);
  // drives the treatment mean below the representable floor, tripping the
  // underflow guard during the eps sweep
  data.offsets_treatment[0] = 1e-295;
  SamplerConfig cfg;
  cfg.iterations = 10;
  cfg.burn_in = 1;
  try {
    run_chain(cfg, g, data);
    FAIL("expected ComputeError");
  } catch (const ComputeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("iteration") != std::string::npos);
    CHECK(msg.find("state dump") != std::string::npos);
    CHECK(msg.find("tau2=") != std::string::npos);
  }
}

TEST_CASE("intercept posterior concentrates near the generative truth") {
  SimulationSpec spec;
  spec.lattice_rows = 4;
  spec.lattice_cols = 4;
  spec.beta = {};
  spec.beta0_death = 0.3;
  spec.beta0_treatment = -0.2;
  spec.tau2 = 0.05;
  spec.tau2_death = 0.05;
  spec.sigma2_death = 0.02;
  spec.sigma2_treatment = 0.02;
  spec.seed = 3;
  const auto g = resolve_graph(spec);
  Rng rng(3);
  const auto sim = simulate_dataset(spec, g, rng);
  SamplerConfig cfg;
  cfg.iterations = 4000;
  cfg.burn_in = 1500;
  cfg.thin = 2;
  cfg.seed = 5;
  // fit against the true offsets so the intercepts are directly comparable
  const auto run = run_chain(cfg, g, sim.data);
  double b0d = 0.0, b0t = 0.0;
  for (const auto& flat : run.draws) {
    const auto st = ChainState::unflatten(flat, g.n, 0);
    b0d += st.beta0_death;
    b0t += st.beta0_treatment;
  }
  b0d /= double(run.draws.size());
  b0t /= double(run.draws.size());
  CHECK(std::fabs(b0d - 0.3) < 0.2);
  CHECK(std::fabs(b0t - (-0.2)) < 0.2);
}

TEST_CASE("config validation") {
  SamplerConfig cfg;
  cfg.iterations = 100;
  cfg.burn_in = 100;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.burn_in = 10;
  cfg.thin = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.thin = 1;
  cfg.adapt_target = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
