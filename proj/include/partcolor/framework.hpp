#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "partcolor/rng.hpp"

namespace partcolor {

// One call of the regularized subproblem min_{x ∈ X} f(x) + λ‖x − g‖² to additive error.
struct SolveRequest {
  double lambda = 0.0;
  const Eigen::VectorXd* anchor = nullptr;
  double additive_error = 0.0;
  const Eigen::VectorXd* warm_start = nullptr;  // previous solution, may be null
};

using RegularizedSolver = std::function<Eigen::VectorXd(const SolveRequest&, GaussianSource&)>;

// Returns A with f(x) ∈ [(1 − c)A, A].
using ValueQuery = std::function<double(const Eigen::VectorXd& x, double c, GaussianSource& rng)>;

// K = {x : f(x) ≤ ρ} for a symmetric convex f with f(0) = 0 and 0 ≤ f ≤ Θ on the box.
// A constrained body additionally restricts to a linear subspace that the solver enforces;
// the unconstrained upper initialization clip(g) is then replaced by a solver call.
struct DiscrepancyBody {
  int dim = 0;
  double rho = 0.0;
  double theta = 0.0;
  ValueQuery value;
  bool constrained = false;
};

struct FrameworkConfig {
  double c_tight = 0.02;
  int max_calls = 0;          // 0 → 4·(log₂(1/β) + log₂ log₂(Θ/ρ) + 8)
  int anchor_attempts = 16;
  bool concurrent_signs = false;
  bool warm_start = true;     // hand the nearest bracketing solution to the solver
};

bool check_anchor(const Eigen::VectorXd& g);
// Draws g ~ N(0, I_m), resampling until check_anchor passes (at most `attempts` draws).
Eigen::VectorXd draw_anchor(int m, GaussianSource& rng, int attempts = 16);

enum class SearchExit { DragDownInit, DragDownTest, Aggregate, CallCap, Degenerate };
std::string to_string(SearchExit e);

struct SearchStep {
  double lambda = 0.0;
  double value = 0.0;  // A (upper estimate of f)
  double dist2 = 0.0;  // ‖x − g‖²
};

struct SearchResult {
  Eigen::VectorXd x;
  double dist2 = 0.0;
  double tau = 0.0;
  double c = 0.0;
  double alpha = 1.0;   // aggregation weight (1 when no aggregation happened)
  double value_lo = 0.0, value_hi = 0.0;
  int solver_calls = 0;
  SearchExit exit = SearchExit::Degenerate;
  std::vector<SearchStep> trace;
  std::vector<std::string> diagnostics;
};

// Regularized binary search over λ ∈ [ρ/(8m), 4Θ/τ] on a lazy multiplicative grid with
// ratio (1 + c), c = τ/(64m), τ = c_tight·m·β²/4.
SearchResult binary_search_partial_color(const DiscrepancyBody& body, const Eigen::VectorXd& g, double beta,
                                         const RegularizedSolver& solver, GaussianSource& rng,
                                         const FrameworkConfig& config = {});

struct PartialColoring {
  Eigen::VectorXd x;
  Eigen::VectorXd anchor;          // the g of the selected run (−g_drawn for the negated run)
  int anchor_sign = 1;
  std::vector<int> near_tight;     // x_i ≤ −1 + β
  std::vector<int> abs_near_tight; // |x_i| ≥ 1 − β
  double beta = 0.0;
  double dist2 = 0.0;
  SearchResult selected;
  int counts[2] = {0, 0};          // near-tight counts of the +g and −g runs
  std::vector<std::string> diagnostics;
};

std::vector<int> near_tight_negative(const Eigen::VectorXd& x, double beta);
std::vector<int> near_tight_absolute(const Eigen::VectorXd& x, double beta);

// Runs the search for g and −g and keeps the run with more coordinates ≤ −1 + β.
PartialColoring two_sided_partial_color(const DiscrepancyBody& body, double beta, const RegularizedSolver& solver,
                                        GaussianSource& rng, const FrameworkConfig& config = {});

}  // namespace partcolor
