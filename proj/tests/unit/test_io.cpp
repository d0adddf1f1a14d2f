#include <doctest.h>

#include <sstream>

#include "spfactor/chain_io.hpp"
#include "spfactor/rng.hpp"
#include "spfactor/sha256.hpp"
#include "support/fixtures.hpp"

using namespace spfactor;

TEST_CASE("sha256 standard vectors") {
  CHECK(sha256_hex(std::string{}) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex(std::string{"abc"}) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex(std::string{
            "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"}) ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("chain file round trip is exact") {
  RunResult run;
  run.n = 3;
  run.p = 1;
  run.param_names = ChainState::flat_names(3, {"x"});
  Rng rng(5);
  for (int t = 0; t < 7; ++t) {
    auto st = fixtures::random_state(3, 1, rng);
    std::vector<double> flat;
    st.flatten(flat);
    run.draws.push_back(flat);
    run.saved_iterations.push_back(100 + 10 * t);
  }
  std::ostringstream os;
  write_chain_csv(os, run);

  std::istringstream is(os.str());
  const auto cf = read_chain_csv(is);
  CHECK(cf.param_names == run.param_names);
  CHECK(cf.iterations == run.saved_iterations);
  CHECK(cf.n == 3);
  CHECK(cf.p == 1);
  REQUIRE(cf.draws.size() == run.draws.size());
  for (std::size_t t = 0; t < cf.draws.size(); ++t) {
    CHECK(cf.draws[t] == run.draws[t]);  // bit-exact through %.17g
  }
}

TEST_CASE("summary and per-unit writers produce the documented headers") {
  PosteriorSummary s;
  s.level = 0.95;
  s.rows.push_back({"tau2", 0.4, 0.1, 0.9, 812.0, 1.01});
  std::ostringstream os;
  write_summary_csv(os, s);
  CHECK(os.str().rfind("name,mean,q025,q975,ess,rhat\n", 0) == 0);
  CHECK(os.str().find("tau2,") != std::string::npos);

  std::ostringstream pu;
  PerUnitRow row{};
  row.unit = 2;
  write_per_unit_csv(pu, {row});
  CHECK(pu.str().rfind("unit_id,log_smr_mean,log_smr_q025,log_smr_q975,", 0) ==
        0);
  CHECK(pu.str().find("\n2,") != std::string::npos);
}

TEST_CASE("format_double survives a parse round trip") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform_int(-12, 12));
    const double back = std::stod(format_double(v));
    CHECK(back == v);
  }
}
