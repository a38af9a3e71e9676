#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "partcolor/framework.hpp"
#include "partcolor/kernels.hpp"
#include "partcolor/rng.hpp"

namespace partcolor {

// m sets (rows) over n elements (columns) with entries in [−1, 1].
class SetSystem {
 public:
  SetSystem() = default;
  explicit SetSystem(kernels::Csr a);
  static SetSystem from_dense(const Eigen::MatrixXd& a);

  int num_sets() const { return a_.rows; }
  int num_elements() const { return a_.cols; }
  const kernels::Csr& rows() const { return a_; }
  const kernels::Csr& columns() const { return at_; }  // transpose: row j lists the sets containing j
  double max_row_norm() const { return row_norm_; }    // R
  int max_column_nnz() const { return col_nnz_; }      // k
  double max_row_l1() const { return row_l1_; }
  double max_abs_entry() const { return max_abs_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;  // A x
  double discrepancy(const Eigen::VectorXd& x) const;     // ‖A x‖∞
  // Columns `keep` in the given order.
  SetSystem restrict_columns(const std::vector<int>& keep) const;
  Eigen::MatrixXd dense() const;

 private:
  kernels::Csr a_, at_;
  double row_norm_ = 0.0, row_l1_ = 0.0, max_abs_ = 0.0;
  int col_nnz_ = 0;
};

// Text format: header `m n nnz`, then nnz lines `i j v` with 0-indexed i < m, j < n.
SetSystem read_set_system(std::istream& in);
void write_set_system(std::ostream& out, const SetSystem& s);
// Each entry is 1 independently with probability p.
SetSystem random_set_system(int m, int n, double p, GaussianSource& rng);

// ρ = C_set · √(8 n log(m/n + 2)).
double spencer_radius(int m, int n, double c_set);

struct GameConfig {
  double c_t = 8.0;
  long long max_iterations = 0;  // 0 → no cap on T = ⌈c_T n R² log(2m) / ε²⌉
  int repetitions = 0;           // 0 → ⌈log₂(1/δ)⌉ + 1
};

struct GameResult {
  Eigen::VectorXd x;
  double value = 0.0;          // audited ‖Ax‖∞ + λ‖x − v‖² of the returned point
  double best_recorded = 0.0;  // best value over the repetitions
  long long iterations = 0;    // per repetition
  long long planned_iterations = 0;
  std::vector<double> values;  // audited value of every repetition
};

double l2l1_value(const SetSystem& s, const Eigen::VectorXd& v, double lambda, const Eigen::VectorXd& x);

// Stochastic mirror descent on min_{x ∈ [−1,1]^n} max_{y ∈ Δ^{2m}} yᵀ[A; −A]x + λ‖x − v‖².
// The simplex player samples a set ∝ y, the box player samples an element ∝ x², and the
// simplex weights live in a sum tree so each step touches one column. Returns the averaged
// iterate of the best of the independent repetitions.
GameResult l2l1_game_solve(const SetSystem& s, const Eigen::VectorXd& v, double lambda, double eps, double delta,
                           GaussianSource& rng, const GameConfig& config = {},
                           const Eigen::VectorXd* warm_start = nullptr);

struct RoundResult {
  Eigen::VectorXd x;
  int landed = 0;         // coordinates of S that ended exactly at ±1
  double increase = 0.0;  // ‖A(x′ − x)‖∞
  double bound = 0.0;     // √(2 log(4m) Σ_S slack²)
  int tries = 0;
  bool within_bound = true;
};

// Moves every x_i, i ∈ S, to sign(x_i) or 2x_i − sign(x_i) with probability 1/2 each.
// Requires 1 − |x_i| ≤ max_slack on S. Retries up to max_tries times while the increase
// exceeds the Hoeffding bound and keeps the smallest increase.
RoundResult round_near_tight(const SetSystem& s, const Eigen::VectorXd& x, const std::vector<int>& near_tight,
                             double max_slack, GaussianSource& rng, int max_tries = 8);

struct SpencerConfig {
  double c_set = 0.3;
  double c_tight = 0.02;
  GameConfig game{8.0, 2000, 1};
  double game_delta = 0.5;
  int exhaustive_threshold = 8;
  int max_rounds = 0;  // 0 → 4⌈log₂ n⌉ + 32
  FrameworkConfig framework;
};

struct SpencerRound {
  int active = 0;
  double rho = 0.0;
  double beta = 0.0;
  int near_tight = 0;
  int frozen = 0;
  double partial_disc = 0.0;    // ‖A_active y‖∞ of the partial coloring
  double round_increase = 0.0;  // ‖A(y′ − y)‖∞ of the randomized rounding
  double contribution = 0.0;    // ‖A_F x_F‖∞ of the coordinates frozen this round
  int solver_calls = 0;
  std::string exit;
};

struct SpencerResult {
  Eigen::VectorXd x;  // ±1
  double disc = 0.0;  // ‖Ax‖∞
  std::vector<SpencerRound> rounds;
  int exhaustive_tail = 0;
  double ledger_error = 0.0;  // ‖Σ_r A_{F_r} x_{F_r} − Ax‖∞
  bool failed = false;
  std::vector<std::string> diagnostics;
};

// Full coloring by repeated partial coloring of the unfrozen coordinates; the last
// exhaustive_threshold coordinates are colored exhaustively against the frozen part.
SpencerResult spencer_color(const SetSystem& s, GaussianSource& rng, const SpencerConfig& config = {});

}  // namespace partcolor
