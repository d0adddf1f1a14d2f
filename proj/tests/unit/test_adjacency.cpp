#include <doctest.h>

#include <Eigen/Dense>
#include <sstream>

#include "spfactor/adjacency.hpp"
#include "spfactor/errors.hpp"
#include "spfactor/rng.hpp"
#include "support/oracles.hpp"

using namespace spfactor;

namespace {

AdjacencyGraph path3() { return build_graph(3, {{0, 1}, {1, 2}}); }

AdjacencyGraph random_connected(int n, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) {
    edges.emplace_back(static_cast<int>(rng.uniform_int(0, i - 1)), i);
  }
  const int extra = n / 2;
  for (int e = 0; e < extra; ++e) {
    const int a = static_cast<int>(rng.uniform_int(0, n - 1));
    const int b = static_cast<int>(rng.uniform_int(0, n - 1));
    if (a != b) edges.emplace_back(a, b);
  }
  return build_graph(n, edges);
}

}  // namespace

TEST_CASE("edge list loading builds a validated graph") {
  std::istringstream in("from,to\n0,1\n1,2\n");
  const auto g = load_adjacency(in, 3);
  CHECK(g.n == 3);
  CHECK(g.degrees == std::vector<int>{1, 2, 1});
  CHECK(g.neighbor_lists[1] == std::vector<int>{0, 2});
  CHECK(g.num_edges() == 2);
}

TEST_CASE("duplicate and reversed edges collapse") {
  std::istringstream in("from,to\n0,1\n1,0\n");
  const auto g = load_adjacency(in, 2);
  CHECK(g.num_edges() == 1);
  CHECK(g.degrees == std::vector<int>{1, 1});
}

TEST_CASE("loader rejects bad input with line numbers") {
  {
    std::istringstream in("from,to\n0,0\n");
    CHECK_THROWS_WITH_AS(load_adjacency(in, 1),
                         doctest::Contains("self-loop"), ValidationError);
  }
  {
    std::istringstream in("from,to\n0,5\n");
    CHECK_THROWS_WITH_AS(load_adjacency(in, 3),
                         doctest::Contains("line 2"), ValidationError);
  }
  {
    std::istringstream in("from,to\n0,1\nx,2\n");
    CHECK_THROWS_WITH_AS(load_adjacency(in, 3),
                         doctest::Contains("line 3"), ValidationError);
  }
  {
    // unit 2 has no edges
    std::istringstream in("from,to\n0,1\n");
    CHECK_THROWS_WITH_AS(load_adjacency(in, 3),
                         doctest::Contains("isolated unit 2"),
                         ValidationError);
  }
  {
    std::istringstream in("a,b\n0,1\n");
    CHECK_THROWS_AS(load_adjacency(in, 2), ValidationError);
  }
}

TEST_CASE("precision quadform on the path graph") {
  const auto g = path3();
  const std::vector<double> zero(3, 0.0);
  CHECK(precision_quadform(g, std::vector<double>{1, 1, 1}, zero) == 0.0);
  CHECK(precision_quadform(g, std::vector<double>{0, 1, 0}, zero) == 2.0);
  const std::vector<double> u{0.3, -0.7, 2.2};
  CHECK(precision_quadform(g, u, u) == 0.0);
}

TEST_CASE("quadform is invariant to constant shifts") {
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 3 + static_cast<int>(rng.uniform_int(0, 12));
    const auto g = random_connected(n, rng);
    std::vector<double> u(n), m(n), us(n), ms(n);
    const double c = 4.0 * rng.normal();
    for (int i = 0; i < n; ++i) {
      u[i] = rng.normal();
      m[i] = rng.normal();
      us[i] = u[i] + c;
      ms[i] = m[i] + c;
    }
    CHECK(precision_quadform(g, us, ms) ==
          doctest::Approx(precision_quadform(g, u, m)).epsilon(1e-11));
  }
}

TEST_CASE("quadform matches the dense matrix oracle") {
  Rng rng(22);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 3 + static_cast<int>(rng.uniform_int(0, 17));
    const auto g = random_connected(n, rng);
    const Eigen::MatrixXd q = oracles::dense_precision(g);
    Eigen::VectorXd u(n), m(n);
    for (int i = 0; i < n; ++i) {
      u(i) = rng.normal();
      m(i) = rng.normal();
    }
    const Eigen::VectorXd r = u - m;
    const double dense = r.dot(q * r);
    std::vector<double> uv(u.data(), u.data() + n), mv(m.data(), m.data() + n);
    CHECK(precision_quadform(g, uv, mv) ==
          doctest::Approx(dense).epsilon(1e-12));
    // bilinear form against a second vector
    Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(
        n, [&rng](Eigen::Index) { return rng.normal(); });
    std::vector<double> wv(w.data(), w.data() + n);
    CHECK(cross_quadform(g, uv, wv) ==
          doctest::Approx(u.dot(q * w)).epsilon(1e-11));
  }
}

TEST_CASE("quadform reproduces degrees and adjacency entries") {
  Rng rng(23);
  const auto g = random_connected(9, rng);
  for (int i = 0; i < g.n; ++i) {
    std::vector<double> ei(g.n, 0.0);
    ei[i] = 1.0;
    CHECK(residual_quadform(g, ei) == doctest::Approx(g.degrees[i]));
    for (int j = 0; j < g.n; ++j) {
      if (j == i) continue;
      std::vector<double> ej(g.n, 0.0);
      ej[j] = 1.0;
      const bool adjacent =
          std::find(g.neighbor_lists[i].begin(), g.neighbor_lists[i].end(),
                    j) != g.neighbor_lists[i].end();
      CHECK(cross_quadform(g, ei, ej) ==
            doctest::Approx(adjacent ? -1.0 : 0.0));
    }
  }
}

TEST_CASE("conditional mean averages neighbor residuals") {
  const auto g = path3();
  const std::vector<double> zero(3, 0.0);
  CHECK(conditional_mean(g, 1, std::vector<double>{0, 99, 4}, zero) == 2.0);
  const std::vector<double> m{0.5, -1.0, 2.0};
  CHECK(conditional_mean(g, 1, m, m) == m[1]);

  const auto lat = make_lattice(2, 2);
  CHECK(lat.neighbor_lists[0] == std::vector<int>{1, 2});
  const std::vector<double> vals{-5.0, 1.0, 3.0, 0.0};
  CHECK(conditional_mean(lat, 0, vals, std::vector<double>(4, 0.0)) == 2.0);

  CHECK_THROWS_AS(conditional_mean(g, 7, zero, zero), ValidationError);
}

TEST_CASE("lattice construction and connectivity") {
  const auto g = make_lattice(3, 4);
  CHECK(g.n == 12);
  CHECK(g.num_edges() == 3 * 3 + 2 * 4);  // horizontal + vertical
  CHECK(is_connected(g));
  const auto two_parts = build_graph(4, {{0, 1}, {2, 3}});
  CHECK_FALSE(is_connected(two_parts));
}
