#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "partcolor/graph.hpp"
#include "partcolor/routing.hpp"
#include "partcolor/sparsify.hpp"

namespace partcolor {

struct DegreeConfig {
  SparsifyConfig base;
  CirculationConfig circulation;
  int bipartition_attempts = 0;  // 0 → 8⌈log₂ n⌉ + 8
  int fw_iterations = 200;       // Frank–Wolfe cap per regularized solve
  double beta_cap = 0.5;         // β = min(ρ_k, beta_cap)
  int stall_limit = 3;           // consecutive phases without removals before stopping
  int electric_edge_limit = 20000;
};

struct DegreePhaseReport {
  int phase = 0;
  int support_before = 0;
  int support_after = 0;
  int crossing = 0;
  int bipartition_attempts = 0;
  int near_tight = 0;
  int zeroed = 0;
  int attempts = 0;
  double rho = 0.0;
  double beta = 0.0;
  double alpha = 0.0;           // measured routing gain
  double rounding_norm = 0.0;   // ‖A([x − x̃]_S)‖
  double rounding_bound = 0.0;  // ρ_k·‖A(1)‖
  int solver_calls = 0;
  std::string routing;
};

struct DegreePreservingResult {
  SparsifierResult result;
  Eigen::VectorXd degrees_in;   // |B|ᵀ w_G
  Eigen::VectorXd degrees_out;  // |B|ᵀ (w ∘ w_G)
  double max_degree_residual = 0.0;
  std::vector<DegreePhaseReport> phase_log;
};

// Routing used when the caller does not choose: electric up to electric_edge_limit edges.
RoutingKind default_routing(int edges, const DegreeConfig& config = {});

// Sparsifier with |B|ᵀ(w ∘ w_G) = |B|ᵀ w_G. Each phase samples a vertex bipartition with at
// least a third of the live edges crossing, colors the crossing edges inside the circulation
// space, and rounds the near-tight ones with degree_round.
DegreePreservingResult degree_preserving_sparsify(const WeightedGraph& g, double eps, double delta,
                                                  RoutingKind routing, GaussianSource& rng,
                                                  const DegreeConfig& config = {});

}  // namespace partcolor
