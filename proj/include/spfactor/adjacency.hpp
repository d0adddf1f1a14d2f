#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace spfactor {

// Areal neighbor structure. The ICAR precision Q = D - W is never formed
// densely; quadratic forms go through the pairwise-difference identity
//   x'Qy = sum over edges (x_i - x_j)(y_i - y_j),
// which is exact because row sums of Q are zero.
//
// Immutable after construction; safe to share read-only across chains.
struct AdjacencyGraph {
  int n = 0;
  std::vector<std::vector<int>> neighbor_lists;  // sorted, no self, symmetric
  std::vector<int> degrees;                      // w_i+ = neighbor count
  std::vector<std::int32_t> edge_a, edge_b;      // undirected, a < b, deduped

  std::size_t num_edges() const { return edge_a.size(); }
};

// Build from undirected edges; duplicates and reversed pairs collapse.
// Rejects self loops, out-of-range indices, and isolated units.
AdjacencyGraph build_graph(int n,
                           const std::vector<std::pair<int, int>>& edges);

// Edge-list CSV with header "from,to", 0-based indices. Parse and validation
// failures carry the 1-based line number.
AdjacencyGraph load_adjacency(std::istream& in, int n);

// rows x cols grid, rook adjacency.
AdjacencyGraph make_lattice(int rows, int cols);

bool is_connected(const AdjacencyGraph& g);

// (u-m)'Q(u-m), computed as the sum of squared edge differences of (u-m).
double precision_quadform(const AdjacencyGraph& g, std::span<const double> u,
                          std::span<const double> m);

// Quadratic form of a single residual vector: r'Qr.
double residual_quadform(const AdjacencyGraph& g, std::span<const double> r);

// Bilinear form a'Qb.
double cross_quadform(const AdjacencyGraph& g, std::span<const double> a,
                      std::span<const double> b);

// ICAR conditional mean for unit i:
//   means_i + (1/w_i+) * sum_{j ~ i} (values_j - means_j).
// The paired conditional variance is tau^2 / w_i+.
double conditional_mean(const AdjacencyGraph& g, int i,
                        std::span<const double> values,
                        std::span<const double> means);

}  // namespace spfactor
