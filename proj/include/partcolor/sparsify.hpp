#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "partcolor/boxspec.hpp"
#include "partcolor/framework.hpp"
#include "partcolor/graph.hpp"
#include "partcolor/operator_family.hpp"

namespace partcolor {

struct SparsifyConfig {
  double c_tight = 0.02;
  double c_set = 2.0;
  double c_sparse = 64.0;
  double c_final = 96.0;
  double c_k = 12.0;            // warm-start oversampling constant
  int retries = 4;              // fresh anchors per phase before β is halved
  double beta = 0.0;            // 0 → 1/(20K)
  int phases = 0;               // K; 0 → enough phases for the warm-start support to reach the target
  double core_eps_divisor = 8.0;
  double eps_iso = 1e-3;
  double ultra_eps = 0.5;       // constant accuracy of the ultrasparsifier recursion
  double ultra_pre_eps = 0.5;   // constant accuracy of the m = O(n) preprocessing
  FlamBackend backend = FlamBackend::Auto;
  FWConfig fw;
  DualConfig dual;
  FrameworkConfig framework;
};

struct WarmStart {
  Eigen::VectorXd w;
  Eigen::VectorXd probabilities;
  long long draws = 0;
  bool sampled = false;
};

// Draws K = ⌈c_K·(τ/ε²)·log(n/δ)⌉ atoms i.i.d. with p_i ∝ Tr M_i and sets w_i = count_i/(K p_i).
// τ = Σ Tr M_i.
WarmStart leverage_warm_start(const OperatorFamily& family, double eps, double delta, GaussianSource& rng,
                              double c_k = 12.0);
long long warm_start_draws(double trace, int n, double eps, double delta, double c_k);

struct PhaseReport {
  int outer = 0;
  int phase = 0;
  int support_before = 0;
  int support_after = 0;
  int near_tight = 0;
  int attempts = 0;
  double rho = 0.0;
  double beta = 0.0;
  double norm_u = 0.0;  // ‖M(u_k)‖ after the phase
  double norm_step = 0.0;  // ‖M(u_k − u_{k−1})‖
  int solver_calls = 0;
  std::string exit;
};

struct SparsePlusSmall {
  Eigen::VectorXd v, w;
  WarmStart warm;
  int planned_phases = 0;
  double beta = 0.0;
  double rho_sum = 0.0;
  double norm_v = 0.0;
  bool terminated_early = false;  // input already within the sparsity target
  std::vector<PhaseReport> phases;
  std::vector<std::string> diagnostics;
};

// u = v + w with ‖M(u − 1)‖ ≤ ε, nnz(w) ≤ C_sparse·τ/ε², ‖M(v)‖ ≤ 1/10. trace_budget ≤ 0 uses τ = n.
SparsePlusSmall sparse_plus_small(const OperatorFamily& family, double eps, double delta, GaussianSource& rng,
                                  const SparsifyConfig& config = {}, double trace_budget = 0.0);

struct LinearSized {
  Eigen::VectorXd w;
  int outer_phases = 0;
  std::vector<double> eps_schedule;
  std::vector<PhaseReport> phases;
  std::vector<std::string> diagnostics;
};

// Outer recursion: ε_k = ε(1+c)^k, v̄_k = 10 v_k, w̄_k = w̄_{k−1} + 10^{−(k−1)} w_k.
LinearSized linear_sized_sparsify(const OperatorFamily& family, double eps, double delta, GaussianSource& rng,
                                  const SparsifyConfig& config = {}, double trace_budget = 0.0);

struct SparsifierResult {
  Eigen::VectorXd weights;  // multiplier per input edge; the output graph has weight w_e·w_G,e
  int n = 0;
  int m = 0;
  int nnz = 0;
  double eps_target = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool certified = false;
  int phases = 0;
  // ultrasparsifier extras
  double sigma = 0.0;
  double kappa = 0.0;
  double kappa_measured = 0.0;
  double trace_budget = 0.0;
  int tree_edges = 0;
  std::vector<PhaseReport> phase_log;
  std::vector<std::string> diagnostics;
};

SparsifierResult graph_sparsify(const WeightedGraph& g, double eps, double delta, GaussianSource& rng,
                                const SparsifyConfig& config = {});

using TreeBuilder = std::function<std::vector<int>(const WeightedGraph&)>;
TreeBuilder tree_builder_by_name(const std::string& name);  // "mst" or "bfs"

// Output weights are normalized so that L_H' ⪯ L_G; kappa_measured = λ_max/λ_min of (L_G, L_H')
// on range(L_G), so L_H' ⪯ L_G ⪯ kappa_measured·L_H'.
SparsifierResult ultrasparsify(const WeightedGraph& g, double ell, const TreeBuilder& tree_builder,
                               GaussianSource& rng, const SparsifyConfig& config = {});

int count_nonzero(const Eigen::VectorXd& w);

}  // namespace partcolor
