#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "partcolor/graph.hpp"

namespace partcolor {

// One cycle cancellation: the cycle's edges with their orientation (+1 gains direction·Δ,
// −1 loses it), the chosen direction (±1), the step Δ ≥ 0 and the edge driven to a bound.
struct CancelStep {
  std::vector<std::pair<int, int>> cycle;
  int direction = 1;
  double delta = 0.0;
  int killed = -1;
  bool killed_at_upper = false;
};

struct DegreeRoundTrace {
  std::vector<CancelStep> steps;
  bool flipped = false;
};

struct DegreeRoundResult {
  Eigen::VectorXd w;  // absolute weights in ∏[0, 2 w_e]
  int zeros = 0;
  int cancel_steps = 0;
  bool flipped = false;        // the complement 2w_H − w was returned
  double degree_residual = 0;  // max_v |(|B|ᵀw − |B|ᵀw_H)_v| / (|B|ᵀw_H)_v
};

// Cycle-canceling rounding on a bipartite graph: each edge that closes a cycle in the forest of
// live edges pushes ±Δ alternately around the cycle until some edge reaches 0 or 2w_e, and that
// edge dies. Unsigned degrees are unchanged, at most n − 1 edges stay strictly inside their
// bounds, and the final flip makes at least ⌈(m − n + 1)/2⌉ weights exactly zero.
// Throws ArgumentError on non-bipartite input. `trace` records every cancellation.
DegreeRoundResult degree_round(const WeightedGraph& h, DegreeRoundTrace* trace = nullptr);

int degree_round_zero_bound(int m, int n);

// max_v |d_v − d'_v| / d'_v over vertices with d'_v > 0, where d = |B|ᵀw and d' = |B|ᵀw_H.
double relative_degree_residual(const WeightedGraph& h, const Eigen::VectorXd& w);

}  // namespace partcolor
