#include "spfactor/adjacency.hpp"

#include <algorithm>
#include <istream>
#include <set>
#include <string>
#include <vector>

#include "spfactor/csv.hpp"
#include "spfactor/errors.hpp"
#include "spfactor/kernels.hpp"

namespace spfactor {

AdjacencyGraph build_graph(int n,
                           const std::vector<std::pair<int, int>>& edges) {
  if (n <= 0) throw ValidationError("graph must have at least one unit");
  std::set<std::pair<int, int>> unique;
  for (const auto& [i, j] : edges) {
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw ValidationError("edge index out of range [0," +
                            std::to_string(n) + "): (" + std::to_string(i) +
                            "," + std::to_string(j) + ")");
    }
    if (i == j) {
      throw ValidationError("self-loop on unit " + std::to_string(i));
    }
    unique.emplace(std::min(i, j), std::max(i, j));
  }

  AdjacencyGraph g;
  g.n = n;
  g.neighbor_lists.assign(n, {});
  g.edge_a.reserve(unique.size());
  g.edge_b.reserve(unique.size());
  for (const auto& [i, j] : unique) {
    g.edge_a.push_back(i);
    g.edge_b.push_back(j);
    g.neighbor_lists[i].push_back(j);
    g.neighbor_lists[j].push_back(i);
  }
  g.degrees.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& nb = g.neighbor_lists[i];
    std::sort(nb.begin(), nb.end());
    g.degrees[i] = static_cast<int>(nb.size());
    if (g.degrees[i] == 0) {
      throw ValidationError("isolated unit " + std::to_string(i) +
                            " (every unit needs at least one neighbor)");
    }
  }
  return g;
}

AdjacencyGraph load_adjacency(std::istream& in, int n) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<int, int>> edges;
  bool saw_header = false;
  while (csv::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (!saw_header) {
      if (fields.size() != 2 || fields[0] != "from" || fields[1] != "to") {
        throw ValidationError("adjacency line 1: expected header 'from,to'");
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != 2) {
      throw ValidationError("adjacency line " + std::to_string(lineno) +
                            ": expected 2 fields, got " +
                            std::to_string(fields.size()));
    }
    const long i = csv::parse_int(fields[0], "adjacency", lineno, "from");
    const long j = csv::parse_int(fields[1], "adjacency", lineno, "to");
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw ValidationError("adjacency line " + std::to_string(lineno) +
                            ": index out of range [0," + std::to_string(n) +
                            ")");
    }
    if (i == j) {
      throw ValidationError("adjacency line " + std::to_string(lineno) +
                            ": self-loop on unit " + std::to_string(i));
    }
    edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }
  if (!saw_header) throw ValidationError("adjacency file is empty");
  return build_graph(n, edges);
}

AdjacencyGraph make_lattice(int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    throw ValidationError("lattice dimensions must be positive");
  }
  if (rows * cols < 2) {
    throw ValidationError("lattice needs at least two units");
  }
  std::vector<std::pair<int, int>> edges;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  }
  return build_graph(rows * cols, edges);
}

bool is_connected(const AdjacencyGraph& g) {
  std::vector<char> seen(g.n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j : g.neighbor_lists[i]) {
      if (!seen[j]) {
        seen[j] = 1;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == g.n;
}

double residual_quadform(const AdjacencyGraph& g, std::span<const double> r) {
  if (static_cast<int>(r.size()) != g.n) {
    throw ValidationError("residual_quadform: length mismatch");
  }
  return kernels::pairwise_sqdiff_sum(g.edge_a.data(), g.edge_b.data(),
                                      g.num_edges(), r.data());
}

double precision_quadform(const AdjacencyGraph& g, std::span<const double> u,
                          std::span<const double> m) {
  if (u.size() != m.size() || static_cast<int>(u.size()) != g.n) {
    throw ValidationError("precision_quadform: length mismatch");
  }
  std::vector<double> r(u.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = u[i] - m[i];
  return residual_quadform(g, r);
}

double cross_quadform(const AdjacencyGraph& g, std::span<const double> a,
                      std::span<const double> b) {
  if (a.size() != b.size() || static_cast<int>(a.size()) != g.n) {
    throw ValidationError("cross_quadform: length mismatch");
  }
  return kernels::pairwise_proddiff_sum(g.edge_a.data(), g.edge_b.data(),
                                        g.num_edges(), a.data(), b.data());
}

double conditional_mean(const AdjacencyGraph& g, int i,
                        std::span<const double> values,
                        std::span<const double> means) {
  if (i < 0 || i >= g.n) {
    throw ValidationError("conditional_mean: unit index out of range");
  }
  if (values.size() != means.size() ||
      static_cast<int>(values.size()) != g.n) {
    throw ValidationError("conditional_mean: length mismatch");
  }
  double acc = 0.0;
  for (int j : g.neighbor_lists[i]) acc += values[j] - means[j];
  return means[i] + acc / g.degrees[i];
}

}  // namespace spfactor
