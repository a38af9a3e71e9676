#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <vector>

#include "partcolor/kernels.hpp"
#include "partcolor/rng.hpp"

namespace partcolor {

struct Edge {
  int u = 0;
  int v = 0;
  double w = 1.0;
};

// Undirected weighted multigraph, immutable after construction. Edge e has
// signed incidence row b_e = e_u − e_v and weight w_e > 0.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(int n, std::vector<Edge> edges);

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }

  Eigen::VectorXd weights() const;
  // |B|ᵀ w: weighted degree of every vertex.
  Eigen::VectorXd weighted_degrees() const;
  kernels::Csr incidence() const;  // m × n, rows b_e
  kernels::Csr laplacian() const;  // n × n, Bᵀ W B
  Eigen::MatrixXd dense_laplacian() const;
  double laplacian_quadratic(const Eigen::VectorXd& x) const;

  // Connected-component label per vertex; `count` receives the number of components.
  std::vector<int> components(int* count = nullptr) const;
  bool connected() const;
  // Side (0/1) of every vertex in a proper 2-coloring, or nothing if an odd cycle exists.
  std::optional<std::vector<int>> two_coloring() const;

  // Same edge list with w_e replaced by w_e · multiplier_e (multipliers must be positive).
  WeightedGraph scaled(const Eigen::VectorXd& multiplier) const;
  // Graph on the same vertex set keeping edges `ids` with the given absolute weights.
  WeightedGraph subgraph(const std::vector<int>& ids, const Eigen::VectorXd& weights) const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
};

// Whitespace edge list `u v w` with 0-indexed endpoints (w defaults to 1 when omitted).
// The vertex count is one more than the largest endpoint unless `min_vertices` is larger.
WeightedGraph read_edge_list(std::istream& in, int min_vertices = 0);
// Symmetric coordinate format: header `rows cols nnz`, then 1-indexed `i j v` entries of the
// weighted adjacency (or Laplacian) matrix. Diagonal entries are ignored, weights are |v|, and
// a pair listed in both triangles must carry equal values and yields one edge.
WeightedGraph read_coo(std::istream& in);
void write_edge_list(std::ostream& out, const WeightedGraph& g);

// Deterministic generators used by tests, benchmarks and the acceptance suite.
namespace gen {
WeightedGraph path(int n);
WeightedGraph cycle(int n);
WeightedGraph star(int leaves);
WeightedGraph complete(int n);
WeightedGraph complete_bipartite(int a, int b);
WeightedGraph grid(int rows, int cols);
// G(n, p); resamples until connected when `connected` is set.
WeightedGraph erdos_renyi(int n, double p, GaussianSource& rng, bool connected = true);
// Random bipartite multigraph-free graph between sides of size a and b with `m` distinct edges.
WeightedGraph random_bipartite(int a, int b, int m, GaussianSource& rng);
// Random tree on n vertices (random attachment).
WeightedGraph random_tree(int n, GaussianSource& rng);
}  // namespace gen

}  // namespace partcolor
