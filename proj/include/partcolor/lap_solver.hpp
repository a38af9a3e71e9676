#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "partcolor/graph.hpp"
#include "partcolor/kernels.hpp"

namespace partcolor {

enum class Preconditioner { Jacobi, IncompleteCholesky };

struct LapSolverOptions {
  double accuracy = 1e-8;  // ε_solve, relative error in the L norm
  Preconditioner preconditioner = Preconditioner::Jacobi;
  int max_iterations = 0;  // 0 → max(1000, 20n)
};

// Preconditioned conjugate gradient for L x = b on the component-wise
// mean-zero subspace. Stops when the Hestenes–Stiefel estimate of the
// energy-norm error drops below ε_solve·‖x‖_L, which is the contract
// ‖L x̃ − b‖_{L†} ≤ ε_solve ‖b‖_{L†}. Holds scratch buffers; use one
// instance per thread.
class LapSolver {
 public:
  explicit LapSolver(const WeightedGraph& g, LapSolverOptions options = {});

  Eigen::VectorXd solve(const Eigen::VectorXd& b);
  // Removes the mean of every connected component.
  void project(Eigen::VectorXd& x) const;

  int dim() const { return n_; }
  int num_components() const { return num_components_; }
  const std::vector<int>& component_labels() const { return comp_; }
  const LapSolverOptions& options() const { return options_; }
  std::string preconditioner_name() const;
  int last_iterations() const { return last_iterations_; }

 private:
  void apply_preconditioner(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;
  void build_incomplete_cholesky();

  int n_;
  LapSolverOptions options_;
  kernels::Csr lap_;
  Eigen::VectorXd inv_diag_;
  std::vector<int> comp_;
  std::vector<double> comp_size_;
  int num_components_ = 0;
  kernels::Csr ic_lower_;  // rows of the lower factor, diagonal stored last in each row
  int last_iterations_ = 0;
  Eigen::VectorXd r_, z_, p_, q_;
};

}  // namespace partcolor
