#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spfactor/diagnostics.hpp"
#include "spfactor/errors.hpp"
#include "spfactor/likelihood.hpp"
#include "spfactor/rng.hpp"
#include "support/fixtures.hpp"

using namespace spfactor;

TEST_CASE("quantiles interpolate order statistics") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile(x, 0.0) == 1.0);
  CHECK(quantile(x, 1.0) == 4.0);
  CHECK(quantile(x, 0.5) == doctest::Approx(2.5));
  CHECK(quantile(x, 0.25) == doctest::Approx(1.75));

  // sort-based oracle on random small chains
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> v(11 + rep);
    for (auto& a : v) a = rng.normal();
    std::vector<double> sorted(v);
    std::sort(sorted.begin(), sorted.end());
    for (double q : {0.025, 0.5, 0.975}) {
      const double h = q * (sorted.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(h);
      const double expect =
          lo + 1 < sorted.size()
              ? sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo])
              : sorted.back();
      CHECK(quantile(v, q) == doctest::Approx(expect).epsilon(1e-15));
    }
  }
}

TEST_CASE("ess on iid draws is close to the draw count and never above it") {
  Rng rng(5);
  const std::size_t n = 100000;
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  const double e = ess(x);
  CHECK(e <= double(n));
  CHECK(e == doctest::Approx(double(n)).epsilon(0.10));
}

TEST_CASE("ess shrinks with autocorrelation") {
  Rng rng(7);
  const std::size_t n = 50000;
  std::vector<double> x(n);
  double prev = 0.0;
  const double rho = 0.9;
  for (auto& v : x) {
    prev = rho * prev + std::sqrt(1 - rho * rho) * rng.normal();
    v = prev;
  }
  const double e = ess(x);
  // theoretical factor (1-rho)/(1+rho) ~ 0.0526
  CHECK(e < 0.12 * n);
  CHECK(e > 0.02 * n);
}

TEST_CASE("degenerate series flag") {
  const std::vector<double> constant(100, 3.14);
  CHECK(std::isnan(ess(constant)));
}

TEST_CASE("split rhat behavior") {
  Rng rng(9);
  std::vector<double> a(4000), b(4000);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  CHECK(std::isnan(split_rhat({a})));  // single chain: unavailable
  const double good = split_rhat({a, b});
  CHECK(good == doctest::Approx(1.0).epsilon(0.02));
  for (auto& v : b) v += 3.0;  // disjoint chains
  CHECK(split_rhat({a, b}) > 1.5);
}

TEST_CASE("rescaled loadings") {
  CHECK(rescale_loading(1.0) == 0.0);
  CHECK(rescale_loading(3.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(rescale_loading(1.0 / 3.0) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(std::isnan(rescale_loading(-1.0)));
  // strictly increasing on (-1, inf)
  double prev = -std::numeric_limits<double>::infinity();
  for (double a = -0.99; a < 6.0; a += 0.07) {
    const double v = rescale_loading(a);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(rescale_loading(100.0) < 0.5);
  CHECK(rescale_loading(0.001) > -0.5);
}

TEST_CASE("summarize on iid normal draws") {
  Rng rng(11);
  const std::size_t n = 100000;
  std::vector<std::vector<double>> draws(n, std::vector<double>(1));
  for (auto& row : draws) row[0] = rng.normal();
  const auto s = summarize({"z"}, {&draws}, 0.95);
  REQUIRE(s.rows.size() == 1);
  CHECK(std::fabs(s.rows[0].mean) < 0.02);
  CHECK(s.rows[0].q_lo == doctest::Approx(-1.959964).epsilon(0.03));
  CHECK(s.rows[0].q_hi == doctest::Approx(1.959964).epsilon(0.03));
  CHECK(s.rows[0].ess == doctest::Approx(double(n)).epsilon(0.10));
  CHECK(std::isnan(s.rows[0].rhat));  // single chain
}

TEST_CASE("summarize constant chain") {
  std::vector<std::vector<double>> draws(50, std::vector<double>{2.5});
  const auto s = summarize({"c"}, {&draws}, 0.95);
  CHECK(s.rows[0].mean == doctest::Approx(2.5));
  CHECK(s.rows[0].q_lo == 2.5);
  CHECK(s.rows[0].q_hi == 2.5);
  CHECK(std::isnan(s.rows[0].ess));  // degenerate, flagged
}

TEST_CASE("summarize is permutation invariant for mean and quantiles") {
  Rng rng(13);
  std::vector<std::vector<double>> draws(501, std::vector<double>(2));
  for (auto& row : draws) {
    row[0] = rng.normal();
    row[1] = rng.uniform();
  }
  const auto s1 = summarize({"a", "b"}, {&draws}, 0.9);
  std::vector<std::vector<double>> shuffled(draws);
  // deterministic shuffle
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
    std::swap(shuffled[i],
              shuffled[static_cast<std::size_t>(rng.uniform_int(0, i))]);
  }
  const auto s2 = summarize({"a", "b"}, {&shuffled}, 0.9);
  for (int j = 0; j < 2; ++j) {
    CHECK(s1.rows[j].mean == doctest::Approx(s2.rows[j].mean).epsilon(1e-12));
    CHECK(s1.rows[j].q_lo == s2.rows[j].q_lo);
    CHECK(s1.rows[j].q_hi == s2.rows[j].q_hi);
  }
}

TEST_CASE("summarize rejects empty and undersized input") {
  std::vector<std::vector<double>> draws(5, std::vector<double>{1.0});
  CHECK_THROWS_AS(summarize({"a"}, {&draws}, 0.95), ValidationError);
  CHECK_THROWS_AS(summarize({"a"}, {}, 0.95), ValidationError);
}

TEST_CASE("per-unit series reconstruct the link exactly") {
  Rng rng(17);
  const int n = 7, p = 2;
  std::vector<std::vector<double>> draws;
  std::vector<ChainState> states;
  for (int t = 0; t < 25; ++t) {
    auto st = fixtures::random_state(n, p, rng);
    std::vector<double> flat;
    st.flatten(flat);
    draws.push_back(flat);
    states.push_back(std::move(st));
  }
  const auto series = per_unit_rates(draws, n, p);
  REQUIRE(series.log_smr.size() == states.size());
  for (std::size_t t = 0; t < states.size(); ++t) {
    const LinkState link = link_from_state(states[t]);
    for (int i = 0; i < n; ++i) {
      CHECK(series.log_smr[t][i] == link.log_lambda_death[i]);
      CHECK(series.log_trr[t][i] == link.log_lambda_treatment[i]);
      CHECK(series.loading[t][i] ==
            doctest::Approx(rescale_loading(states[t].alpha_death[i]))
                .epsilon(1e-15));
    }
  }
}

TEST_CASE("zero parameters give unit relative risks") {
  ChainState st;
  st.nu.assign(4, 0.0);
  st.alpha_death.assign(4, 1.0);
  st.eps_death.assign(4, 0.0);
  st.eps_treatment.assign(4, 0.0);
  std::vector<double> flat;
  st.flatten(flat);
  const auto series = per_unit_rates({flat}, 4, 0);
  for (int i = 0; i < 4; ++i) {
    CHECK(series.log_smr[0][i] == 0.0);  // SMR = 1
    CHECK(series.log_trr[0][i] == 0.0);
    CHECK(series.loading[0][i] == 0.0);
  }
}

TEST_CASE("per-unit summaries have ordered intervals") {
  Rng rng(19);
  const int n = 5;
  std::vector<std::vector<double>> draws;
  for (int t = 0; t < 60; ++t) {
    auto st = fixtures::random_state(n, 0, rng);
    std::vector<double> flat;
    st.flatten(flat);
    draws.push_back(flat);
  }
  const auto rows = summarize_per_unit(per_unit_rates(draws, n, 0), 0.9);
  REQUIRE(rows.size() == n);
  for (const auto& r : rows) {
    CHECK(r.log_smr_lo <= r.log_smr_hi);
    CHECK(r.log_trr_lo <= r.log_trr_hi);
    CHECK(r.loading_lo <= r.loading_hi);
    CHECK(r.nu_lo <= r.nu_hi);
  }
}
