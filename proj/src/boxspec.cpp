#include "partcolor/boxspec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

#include "partcolor/errors.hpp"

namespace partcolor {

Eigen::VectorXd box_linopt(const Eigen::VectorXd& c) {
  Eigen::VectorXd z(c.size());
  for (int i = 0; i < c.size(); ++i) z[i] = c[i] > 0.0 ? -1.0 : (c[i] < 0.0 ? 1.0 : 0.0);
  return z;
}

double flam_value(const OperatorFamily& family, const Eigen::VectorXd& g, double lambda, const Eigen::VectorXd& x) {
  return exact_opnorm(family, x) + lambda * (x - g).squaredNorm();
}

FlamResult solve_flam(const OperatorFamily& family, const Eigen::VectorXd& g, double lambda, double target,
                      const LinearOracle* linopt, const FWConfig& config, const Eigen::VectorXd* warm_start) {
  const int n = family.dim(), m = family.size();
  if (g.size() != m) throw ArgumentError("solve_flam: anchor length differs from family size");
  if (!(lambda >= 0.0)) throw ArgumentError("solve_flam: lambda must be nonnegative");
  if (!(target > 0.0)) throw ArgumentError("solve_flam: target must be positive");
  const double log2n = std::log(2.0 * std::max(1, n));
  const double mu = config.mu > 0.0 ? config.mu : target / (3.0 * log2n) * config.mu_scale;
  if (mu < 1e-12 * std::max(lambda * m, 1e-300)) throw ConfigError("solve_flam: smoothing parameter underflows");
  if (config.check_norm_bound && m > 0 && exact_opnorm(family, Eigen::VectorXd::Ones(m)) > 2.0 + 1e-9)
    throw ArgumentError("solve_flam: family violates ‖A(1)‖ ≤ 2");
  const double bias = mu * log2n;
  const double smooth = 1.0 / mu + 2.0 * lambda * m;
  long long budget = config.iterations;
  if (budget <= 0) budget = static_cast<long long>(std::ceil(12.0 * smooth / std::max(target - bias, 1e-300)));
  budget = std::min<long long>(std::max<long long>(budget, 1), config.max_iterations);
  const double delta = config.linopt_accuracy;
  const long long stride = config.audit_stride > 0 ? config.audit_stride : 1;

  FlamResult res;
  res.mu = mu;
  Eigen::VectorXd x = warm_start && warm_start->size() == m ? *warm_start : Eigen::VectorXd::Zero(m);
  double best = std::numeric_limits<double>::infinity();
  double slack = std::numeric_limits<double>::infinity();  // min_t (gap_t + bias − f_λ(x_t))
  Eigen::VectorXd best_x = x;
  for (long long t = 1; t <= budget; ++t) {
    SmoothedValue sv = smoothed_value_grad(family, x, mu);
    const double reg = lambda * (x - g).squaredNorm();
    const double value = sv.opnorm + reg;
    if ((t - 1) % stride == 0 || t == budget) {
      if (value < best) {
        best = value;
        best_x = x;
      }
    }
    Eigen::VectorXd grad = sv.grad + 2.0 * lambda * (x - g);
    Eigen::VectorXd z = linopt ? (*linopt)(grad) : box_linopt(grad);
    if (z.size() != m || (z.array().abs() > 1.0 + 1e-9).any())
      throw ContractViolation("solve_flam: linear oracle returned a point outside the box");
    const double gz = grad.dot(z);
    const double gap = grad.dot(x) - (delta > 0.0 && gz < 0.0 ? gz / (1.0 - delta) : gz);
    slack = std::min(slack, gap + bias - value);
    res.iterations = static_cast<int>(t);
    if (config.record_history) {
      res.best_history.push_back(best);
      res.smoothed_history.push_back(sv.value + reg);
    }
    if (best + slack <= target) {
      res.converged = true;
      break;
    }
    const double eta = 2.0 / (t + 1.0);
    x = (1.0 - eta) * x + eta * z;
  }
  if (!res.converged) {
    const double value = flam_value(family, g, lambda, x);
    if (value < best) {
      best = value;
      best_x = x;
    }
  }
  res.x = std::move(best_x);
  res.value = best;
  res.gap_bound = std::max(0.0, best + slack);
  return res;
}

namespace {

// Euclidean projection onto {p ≥ 0, Σ p = 1}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

struct DualBlocks {
  Eigen::MatrixXd y1, y2;
};

// Projection onto {Y₁, Y₂ ⪰ 0, Tr Y₁ + Tr Y₂ = 1}.
DualBlocks project_density(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2) {
  const int n = static_cast<int>(p1.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(0.5 * (p1 + p1.transpose()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e2(0.5 * (p2 + p2.transpose()));
  Eigen::VectorXd lam(2 * n);
  lam << e1.eigenvalues(), e2.eigenvalues();
  Eigen::VectorXd p = project_simplex(lam);
  DualBlocks out;
  out.y1 = e1.eigenvectors() * p.head(n).asDiagonal() * e1.eigenvectors().transpose();
  out.y2 = e2.eigenvectors() * p.tail(n).asDiagonal() * e2.eigenvectors().transpose();
  return out;
}

double frobenius_sq_norm(const Atom& atom) {
  return std::visit(
      [](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, DenseAtom>) {
          return a.a.squaredNorm();
        } else if constexpr (std::is_same_v<T, IncidenceAtom>) {
          const double k = static_cast<double>(a.index.size());
          return a.scale * a.scale * k * k;
        } else {
          const double s = a.v.squaredNorm();
          return a.scale * a.scale * s * s;
        }
      },
      atom);
}

}  // namespace

FlamResult solve_flam_dual(const OperatorFamily& family, const Eigen::VectorXd& g, double lambda, double target,
                           const DualConfig& config) {
  const int n = family.dim(), m = family.size();
  if (g.size() != m) throw ArgumentError("solve_flam_dual: anchor length differs from family size");
  if (!(lambda > 0.0)) throw ArgumentError("solve_flam_dual: lambda must be positive");
  if (!(target > 0.0)) throw ArgumentError("solve_flam_dual: target must be positive");
  FlamResult res;
  if (n == 0 || m == 0) {
    res.x = g.cwiseMax(-1.0).cwiseMin(1.0);
    res.value = lambda * (res.x - g).squaredNorm();
    res.converged = true;
    return res;
  }

  struct Eval {
    Eigen::VectorXd x;
    double phi = 0.0;
    Eigen::MatrixXd grad;  // A(x(Y)); the dual gradient is (grad, −grad)
  };
  auto evaluate = [&](const DualBlocks& y) {
    Eval e;
    Eigen::VectorXd s = family.adjoint(y.y1 - y.y2);
    e.x = (g - s / (2.0 * lambda)).cwiseMax(-1.0).cwiseMin(1.0);
    e.phi = s.dot(e.x) + lambda * (e.x - g).squaredNorm();
    e.grad = family.assemble(e.x);
    return e;
  };

  double sigma2 = 0.0;
  for (const Atom& a : family.atoms()) sigma2 += frobenius_sq_norm(a);
  double lip = std::max(sigma2 / lambda / 64.0, 1e-12);

  DualBlocks y{Eigen::MatrixXd::Identity(n, n) / (2.0 * n), Eigen::MatrixXd::Identity(n, n) / (2.0 * n)};
  DualBlocks z = y;
  Eval ez = evaluate(z);
  double phi_y = ez.phi;
  double t_mom = 1.0;
  double best_primal = std::numeric_limits<double>::infinity(), best_dual = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = ez.x;

  for (int it = 1; it <= config.max_iterations; ++it) {
    DualBlocks y_next;
    Eval en;
    for (int bt = 0; bt < 60; ++bt) {
      y_next = project_density(z.y1 + ez.grad / lip, z.y2 - ez.grad / lip);
      en = evaluate(y_next);
      const Eigen::MatrixXd d1 = y_next.y1 - z.y1, d2 = y_next.y2 - z.y2;
      const double lin = (ez.grad.cwiseProduct(d1)).sum() - (ez.grad.cwiseProduct(d2)).sum();
      const double quad = d1.squaredNorm() + d2.squaredNorm();
      if (en.phi >= ez.phi + lin - 0.5 * lip * quad - 1e-13 * (1.0 + std::abs(ez.phi))) break;
      lip *= 2.0;
    }
    // Primal value of x(Y_next); en.grad = A(x) is already assembled.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(en.grad, Eigen::EigenvaluesOnly);
    const double primal = es.eigenvalues().cwiseAbs().maxCoeff() + lambda * (en.x - g).squaredNorm();
    if (primal < best_primal) {
      best_primal = primal;
      best_x = en.x;
    }
    best_dual = std::max(best_dual, en.phi);
    res.iterations = it;
    if (best_primal - best_dual <= target) {
      res.converged = true;
      break;
    }
    const double phi_next = en.phi;
    if (phi_next < phi_y) {
      // adaptive restart of the momentum sequence
      t_mom = 1.0;
      z = y_next;
      ez = std::move(en);
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
      const double w = (t_mom - 1.0) / t_next;
      z.y1 = y_next.y1 + w * (y_next.y1 - y.y1);
      z.y2 = y_next.y2 + w * (y_next.y2 - y.y2);
      t_mom = t_next;
      ez = w == 0.0 ? std::move(en) : evaluate(z);
    }
    phi_y = phi_next;
    y = std::move(y_next);
  }
  res.x = std::move(best_x);
  res.value = best_primal;
  res.gap_bound = std::max(0.0, best_primal - best_dual);
  return res;
}

FlamBackend parse_flam_backend(const std::string& s) {
  if (s == "auto") return FlamBackend::Auto;
  if (s == "fw" || s == "frank-wolfe") return FlamBackend::FrankWolfe;
  if (s == "dual") return FlamBackend::Dual;
  throw ArgumentError("unknown solver backend '" + s + "' (expected auto, fw or dual)");
}

RegularizedSolver make_flam_solver(const OperatorFamily& family, FlamBackend backend, FWConfig fw, DualConfig dual,
                                   const LinearOracle* linopt, FlamSolverStats* stats) {
  if (backend == FlamBackend::Dual && linopt)
    throw ArgumentError("the dual backend supports the box only; use Frank-Wolfe with a linear oracle");
  const bool use_dual = backend == FlamBackend::Dual || (backend == FlamBackend::Auto && !linopt);
  return [&family, use_dual, fw, dual, linopt, stats](const SolveRequest& req, GaussianSource&) {
    FlamResult r = use_dual ? solve_flam_dual(family, *req.anchor, req.lambda, req.additive_error, dual)
                            : solve_flam(family, *req.anchor, req.lambda, req.additive_error, linopt, fw,
                                         req.warm_start);
    if (stats) {
      ++stats->calls;
      stats->iterations += r.iterations;
      if (!r.converged) ++stats->unconverged;
    }
    return r.x;
  };
}

DiscrepancyBody make_opnorm_body(const OperatorFamily& family, double rho, double theta, bool constrained,
                                 int dense_limit) {
  DiscrepancyBody body;
  body.dim = family.size();
  body.rho = rho;
  body.theta = theta;
  body.constrained = constrained;
  const bool dense = family.dim() <= dense_limit;
  body.value = [&family, dense](const Eigen::VectorXd& x, double c, GaussianSource& rng) {
    if (dense) return exact_opnorm(family, x);
    return opnorm_estimate(family, x, c, 1e-3, rng).value;
  };
  return body;
}

}  // namespace partcolor
