#include "partcolor/lap_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "partcolor/errors.hpp"

namespace partcolor {

LapSolver::LapSolver(const WeightedGraph& g, LapSolverOptions options)
    : n_(g.num_vertices()), options_(options), lap_(g.laplacian()) {
  if (!(options_.accuracy > 0.0 && options_.accuracy < 1.0))
    throw ArgumentError("lap_solver: accuracy must lie in (0,1)");
  if (options_.max_iterations <= 0) options_.max_iterations = std::max(1000, 20 * n_);
  comp_ = g.components(&num_components_);
  comp_size_.assign(num_components_, 0.0);
  for (int c : comp_) comp_size_[c] += 1.0;
  inv_diag_ = Eigen::VectorXd::Zero(n_);
  for (int r = 0; r < n_; ++r)
    for (int k = lap_.ptr[r]; k < lap_.ptr[r + 1]; ++k)
      if (lap_.idx[k] == r && lap_.val[k] > 0.0) inv_diag_[r] = 1.0 / lap_.val[k];
  if (options_.preconditioner == Preconditioner::IncompleteCholesky) build_incomplete_cholesky();
}

std::string LapSolver::preconditioner_name() const {
  return options_.preconditioner == Preconditioner::Jacobi ? "jacobi" : "incomplete-cholesky";
}

void LapSolver::project(Eigen::VectorXd& x) const {
  std::vector<double> mean(num_components_, 0.0);
  for (int v = 0; v < n_; ++v) mean[comp_[v]] += x[v];
  for (int c = 0; c < num_components_; ++c) mean[c] /= comp_size_[c];
  for (int v = 0; v < n_; ++v) x[v] -= mean[comp_[v]];
}

void LapSolver::build_incomplete_cholesky() {
  // IC(0) of L + shift·diag(L); the shift makes the singular Laplacian definite.
  for (double shift = 1e-3; shift < 10.0; shift *= 4.0) {
    kernels::Csr lower;
    lower.rows = lower.cols = n_;
    lower.ptr.assign(n_ + 1, 0);
    bool ok = true;
    for (int i = 0; i < n_ && ok; ++i) {
      const int row_start = static_cast<int>(lower.idx.size());
      double diag = 0.0;
      for (int k = lap_.ptr[i]; k < lap_.ptr[i + 1]; ++k) {
        const int j = lap_.idx[k];
        if (j == i) diag = lap_.val[k] * (1.0 + shift);
        if (j >= i) continue;
        // l_ij = (a_ij − Σ_{t<j} l_it l_jt) / l_jj, restricted to the pattern of L
        double s = lap_.val[k];
        int a = row_start, b = lower.ptr[j];
        const int a_end = static_cast<int>(lower.idx.size()), b_end = lower.ptr[j + 1] - 1;
        while (a < a_end && b < b_end) {
          if (lower.idx[a] == lower.idx[b]) {
            s -= lower.val[a] * lower.val[b];
            ++a;
            ++b;
          } else if (lower.idx[a] < lower.idx[b]) {
            ++a;
          } else {
            ++b;
          }
        }
        lower.idx.push_back(j);
        lower.val.push_back(s / lower.val[lower.ptr[j + 1] - 1]);
      }
      double d = diag == 0.0 ? 1.0 : diag;
      for (int t = row_start; t < static_cast<int>(lower.idx.size()); ++t) d -= lower.val[t] * lower.val[t];
      if (!(d > 0.0)) {
        ok = false;
        break;
      }
      lower.idx.push_back(i);
      lower.val.push_back(std::sqrt(d));
      lower.ptr[i + 1] = static_cast<int>(lower.idx.size());
    }
    if (ok) {
      ic_lower_ = std::move(lower);
      return;
    }
  }
  throw ConvergenceError("incomplete Cholesky broke down for every tried shift", {});
}

void LapSolver::apply_preconditioner(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
  if (options_.preconditioner == Preconditioner::Jacobi) {
    z = r.cwiseProduct(inv_diag_);
    return;
  }
  Eigen::VectorXd y = r;
  for (int i = 0; i < n_; ++i) {
    double s = y[i];
    const int end = ic_lower_.ptr[i + 1] - 1;
    for (int k = ic_lower_.ptr[i]; k < end; ++k) s -= ic_lower_.val[k] * y[ic_lower_.idx[k]];
    y[i] = s / ic_lower_.val[end];
  }
  for (int i = n_ - 1; i >= 0; --i) {
    const int end = ic_lower_.ptr[i + 1] - 1;
    y[i] /= ic_lower_.val[end];
    for (int k = ic_lower_.ptr[i]; k < end; ++k) y[ic_lower_.idx[k]] -= ic_lower_.val[k] * y[i];
  }
  z = std::move(y);
}

Eigen::VectorXd LapSolver::solve(const Eigen::VectorXd& b_in) {
  if (b_in.size() != n_) throw ArgumentError("lap_solve: right-hand side has wrong length");
  Eigen::VectorXd b = b_in;
  project(b);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
  last_iterations_ = 0;
  const double bnorm = b.norm();
  if (bnorm == 0.0) return x;

  constexpr int kDelay = 6;
  const double eps2 = options_.accuracy * options_.accuracy / 4.0;
  r_ = b;
  apply_preconditioner(r_, z_);
  project(z_);
  p_ = z_;
  double rz = r_.dot(z_);
  std::deque<double> window;
  double window_sum = 0.0;
  std::vector<double> history{1.0};
  q_.resize(n_);
  for (int k = 0; k < options_.max_iterations; ++k) {
    kernels::spmv(lap_, p_.data(), q_.data());
    const double pq = p_.dot(q_);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    x.noalias() += alpha * p_;
    r_.noalias() -= alpha * q_;
    last_iterations_ = k + 1;
    const double contrib = alpha * rz;
    window.push_back(contrib);
    window_sum += contrib;
    if (static_cast<int>(window.size()) > kDelay) {
      window_sum -= window.front();
      window.pop_front();
    }
    const double rel = r_.norm() / bnorm;
    history.push_back(rel);
    const double energy = x.dot(b);
    if (rel <= 1e-15) return x;
    if (static_cast<int>(window.size()) == kDelay && window_sum <= eps2 * energy) {
      project(x);
      return x;
    }
    apply_preconditioner(r_, z_);
    project(z_);
    const double rz_new = r_.dot(z_);
    p_ = z_ + (rz_new / rz) * p_;
    rz = rz_new;
  }
  // Small systems can converge before the delay window fills.
  if (history.back() <= options_.accuracy * 1e-3) {
    project(x);
    return x;
  }
  throw ConvergenceError("lap_solve did not converge within " + std::to_string(options_.max_iterations) + " iterations",
                         std::move(history));
}

}  // namespace partcolor
