#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "partcolor/boxspec.hpp"
#include "partcolor/graph.hpp"
#include "partcolor/lap_solver.hpp"

namespace partcolor {

enum class RoutingKind { Electric, Tree };
RoutingKind parse_routing_kind(const std::string& s);  // "electric" or "tree"
std::string to_string(RoutingKind k);

// Linear map R from vertex demands to edge flows with BᵀR d = d for every demand that sums to
// zero on each connected component. Flows follow the orientation of the edge list: f_e > 0
// sends flow from edge(e).u to edge(e).v, and (Bᵀf)_v is the net outflow at v.
//   electric: R = W B L†, applied with one Laplacian solve
//   tree:     each demand is routed along a fixed maximum-weight spanning forest
// Application is thread-safe.
class ObliviousRouting {
 public:
  ObliviousRouting(const WeightedGraph& g, RoutingKind kind, double solver_accuracy = 1e-12,
                   int alpha_samples = 100, std::uint64_t alpha_seed = 0xa1fa);

  RoutingKind kind() const { return kind_; }
  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(w_.size()); }
  const Eigen::VectorXd& edge_weights() const { return w_; }
  // max over the sampled y of ‖W⁻¹RBᵀWy‖∞ / ‖y‖∞.
  double alpha() const { return alpha_; }

  Eigen::VectorXd route(const Eigen::VectorXd& demand) const;
  Eigen::VectorXd route_transpose(const Eigen::VectorXd& flow) const;
  // Bᵀf.
  Eigen::VectorXd divergence(const Eigen::VectorXd& flow) const;
  // Bφ.
  Eigen::VectorXd gradient(const Eigen::VectorXd& phi) const;
  // W⁻¹ R Bᵀ W y.
  Eigen::VectorXd edge_operator(const Eigen::VectorXd& y) const;
  double measure_alpha(int samples, GaussianSource& rng) const;

 private:
  RoutingKind kind_;
  int n_;
  std::vector<Edge> edges_;
  Eigen::VectorXd w_;
  double alpha_ = 0.0;
  // electric
  mutable std::unique_ptr<LapSolver> solver_;
  mutable std::mutex solver_mutex_;
  // tree: BFS order of the forest, parent edge per vertex (−1 at roots)
  std::vector<int> order_;
  std::vector<int> parent_edge_;
  std::vector<int> parent_;
};

struct CirculationConfig {
  double accuracy = 0.5;    // Δ
  int max_iterations = 0;   // 0 → ⌈α² log m / Δ²⌉, clipped to iteration_cap
  int iteration_cap = 400;
};

struct CirculationLinopt {
  Eigen::VectorXd x;
  double value = 0.0;     // ⟨c, x⟩
  bool degenerate = false;  // no circulation improves on 0
  int iterations = 0;
};

// Δ-approximate linear optimization over {x ∈ [−1,1]^m : BᵀW x = 0} through the projection
// A = W⁻¹(I − RBᵀ)W onto the circulation space. `routing` must outlive the oracle.
class CirculationOracle {
 public:
  CirculationOracle(const ObliviousRouting& routing, CirculationConfig config = {});

  double accuracy() const { return config_.accuracy; }
  double p() const { return p_; }
  int iterations() const { return iterations_; }
  const ObliviousRouting& routing() const { return routing_; }

  Eigen::VectorXd project(const Eigen::VectorXd& z) const;            // A z
  Eigen::VectorXd project_transpose(const Eigen::VectorXd& v) const;  // Aᵀ v
  // ℓ∞ steepest descent on ⟨c, Az⟩ + ½‖Az‖_p² with each iterate re-projected by A, then the
  // best iterate rescaled into the box.
  CirculationLinopt minimize(const Eigen::VectorXd& c) const;
  LinearOracle as_linear_oracle() const;

 private:
  const ObliviousRouting& routing_;
  CirculationConfig config_;
  double p_ = 2.0;
  int iterations_ = 1;
};

CirculationLinopt circulation_linopt(const CirculationOracle& oracle, const Eigen::VectorXd& c);

}  // namespace partcolor
