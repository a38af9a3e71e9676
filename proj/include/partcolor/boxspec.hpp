#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "partcolor/framework.hpp"
#include "partcolor/operator_family.hpp"

namespace partcolor {

// Δ-approximate linear optimization over a symmetric feasible set X ⊆ [−1,1]^m:
// returns z ∈ X with ⟨c, z⟩ ≤ (1 − Δ)·min_{x∈X} ⟨c, x⟩.
using LinearOracle = std::function<Eigen::VectorXd(const Eigen::VectorXd& c)>;

// Exact oracle for the box: z = −sign(c), with z_i = 0 where c_i = 0.
Eigen::VectorXd box_linopt(const Eigen::VectorXd& c);

struct FWConfig {
  double mu = 0.0;               // 0 → target/(3 log 2n) · mu_scale
  double mu_scale = 1.0;
  int iterations = 0;            // 0 → ⌈12 L / (target − μ log 2n)⌉ with L = 1/μ + 2λm
  int max_iterations = 1000000;
  int audit_stride = 0;          // 0 → ⌈N/32⌉; used only above dense_limit
  double linopt_accuracy = 0.0;  // Δ of the supplied oracle
  bool check_norm_bound = false; // assert ‖A(1)‖ ≤ 2 before solving
  int dense_limit = 2048;
  bool record_history = false;
};

struct DualConfig {
  int max_iterations = 4000;
};

struct FlamResult {
  Eigen::VectorXd x;
  double value = 0.0;      // f_λ(x) = ‖A(x)‖ + λ‖x − g‖², audited
  double gap_bound = 0.0;  // certified upper bound on f_λ(x) − min f_λ
  double mu = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> best_history;     // best audited f_λ after each iteration
  std::vector<double> smoothed_history; // F_μ(x_t) after each iteration
};

// f_λ(x) with an exact operator norm.
double flam_value(const OperatorFamily& family, const Eigen::VectorXd& g, double lambda, const Eigen::VectorXd& x);

// Frank–Wolfe on F_μ(x) = A_μ(x) + λ‖x − g‖² with step 2/(t+1). Stops once the Frank–Wolfe gap
// plus the smoothing bias μ log 2n certifies the target, or after the iteration budget.
// Returns the best audited iterate. linopt = nullptr means the box.
FlamResult solve_flam(const OperatorFamily& family, const Eigen::VectorXd& g, double lambda, double target,
                      const LinearOracle* linopt, const FWConfig& config = {},
                      const Eigen::VectorXd* warm_start = nullptr);

// Accelerated projected gradient ascent on the dual over block-diagonal density matrices,
// with x(Y) = clip(g − A*(Y₁ − Y₂)/(2λ)). The primal–dual gap certifies the result.
// Box constraint only.
FlamResult solve_flam_dual(const OperatorFamily& family, const Eigen::VectorXd& g, double lambda, double target,
                           const DualConfig& config = {});

enum class FlamBackend { Auto, FrankWolfe, Dual };
FlamBackend parse_flam_backend(const std::string& s);

struct FlamSolverStats {
  int calls = 0;
  int unconverged = 0;
  long long iterations = 0;
};

// Adapts solve_flam / solve_flam_dual to the framework's solver callback. Auto picks the dual
// method for the box and Frank–Wolfe when a linear oracle is supplied. `family` and `linopt`
// must outlive the returned callable.
RegularizedSolver make_flam_solver(const OperatorFamily& family, FlamBackend backend, FWConfig fw = {},
                                   DualConfig dual = {}, const LinearOracle* linopt = nullptr,
                                   FlamSolverStats* stats = nullptr);

// Body with f(x) = ‖A(x)‖_op: exact for n ≤ dense_limit, Lanczos estimate above.
DiscrepancyBody make_opnorm_body(const OperatorFamily& family, double rho, double theta, bool constrained = false,
                                 int dense_limit = 2048);

}  // namespace partcolor
