#include "oracles.hpp"

#include "partcolor/boxspec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace oracle {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw BudgetError("oracle over budget: " + what);
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  return a.ldlt().solve(b);
}

// c_i = vᵀ A_i v
Eigen::VectorXd quadratic_forms(const partcolor::OperatorFamily& family, const Eigen::VectorXd& v) {
  return family.adjoint(v * v.transpose());
}

double box_clip_dist2(const Eigen::VectorXd& x, const Eigen::VectorXd& g) { return (x - g).squaredNorm(); }

}  // namespace

QpResult barrier_qp(const Eigen::MatrixXd& h_mat, const Eigen::VectorXd& q, const Eigen::MatrixXd& g,
                    const Eigen::VectorXd& h, const Eigen::VectorXd& z0, double gap) {
  const int k = static_cast<int>(g.rows());
  Eigen::VectorXd z = z0;
  Eigen::VectorXd s = h - g * z;
  if ((s.array() <= 0.0).any()) throw partcolor::ArgumentError("barrier_qp: start is not strictly feasible");
  auto objective = [&](const Eigen::VectorXd& y) { return 0.5 * y.dot(h_mat * y) + q.dot(y); };
  auto barrier = [&](const Eigen::VectorXd& y, double t, double& out) {
    const Eigen::VectorXd sl = h - g * y;
    if ((sl.array() <= 0.0).any()) return false;
    out = t * objective(y) - sl.array().log().sum();
    return true;
  };

  double t = 1.0;
  double decrement = 0.0;
  while (true) {
    for (int it = 0; it < 200; ++it) {
      s = h - g * z;
      const Eigen::VectorXd inv = s.cwiseInverse();
      const Eigen::VectorXd grad = t * (h_mat * z + q) + g.transpose() * inv;
      const Eigen::MatrixXd hess = t * h_mat + g.transpose() * inv.cwiseAbs2().asDiagonal() * g;
      const Eigen::VectorXd dz = -solve_spd(hess, grad);
      decrement = -grad.dot(dz);
      if (decrement <= 1e-14) break;
      double f0 = 0.0, f1 = 0.0;
      barrier(z, t, f0);
      double step = 1.0;
      while (step > 1e-20 && (!barrier(z + step * dz, t, f1) || f1 > f0 - 0.25 * step * decrement)) step *= 0.5;
      if (step <= 1e-20) break;
      z += step * dz;
    }
    if (k / t <= gap) break;
    t *= 10.0;
  }
  QpResult r;
  r.z = z;
  r.value = objective(z);
  // Duality gap of the approximate central point, with room for the residual decrement.
  r.lower = r.value - (2.0 * k + decrement) / t;
  return r;
}

NearestPoint nearest_point_linf(const Eigen::MatrixXd& a, double rho, const Eigen::VectorXd& g) {
  const int m = static_cast<int>(g.size());
  require(m <= Budget::projection_dim, "projection dimension " + std::to_string(m));
  require(a.cols() == m && rho > 0.0, "shape");
  const int rows = static_cast<int>(a.rows());
  Eigen::MatrixXd gm(2 * m + 2 * rows, m);
  Eigen::VectorXd hv(2 * m + 2 * rows);
  gm << Eigen::MatrixXd::Identity(m, m), -Eigen::MatrixXd::Identity(m, m), a, -a;
  hv << Eigen::VectorXd::Ones(2 * m), Eigen::VectorXd::Constant(2 * rows, rho);
  const QpResult qp = barrier_qp(Eigen::MatrixXd::Identity(m, m), -g, gm, hv, Eigen::VectorXd::Zero(m));
  NearestPoint r;
  r.x = qp.z;
  r.r2_upper = box_clip_dist2(r.x, g);
  r.r2_lower = std::min(r.r2_upper, 2.0 * qp.lower + g.squaredNorm());
  return r;
}

NearestPoint nearest_point_opnorm(const partcolor::OperatorFamily& family, double rho, const Eigen::VectorXd& g) {
  const int m = static_cast<int>(g.size());
  require(m <= Budget::projection_dim, "projection dimension " + std::to_string(m));
  require(family.dim() <= Budget::dense_dim, "operator dimension " + std::to_string(family.dim()));
  require(family.size() == m && rho > 0.0, "shape");
  std::vector<Eigen::VectorXd> cuts;
  NearestPoint best;
  best.r2_upper = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 400; ++round) {
    Eigen::MatrixXd gm(2 * m + static_cast<int>(cuts.size()), m);
    Eigen::VectorXd hv(gm.rows());
    gm.topRows(2 * m) << Eigen::MatrixXd::Identity(m, m), -Eigen::MatrixXd::Identity(m, m);
    hv.head(2 * m).setOnes();
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      gm.row(2 * m + c) = cuts[c].transpose();
      hv[2 * m + c] = rho;
    }
    const QpResult qp = barrier_qp(Eigen::MatrixXd::Identity(m, m), -g, gm, hv, Eigen::VectorXd::Zero(m));
    const double lower = 2.0 * qp.lower + g.squaredNorm();
    best.r2_lower = std::max(best.r2_lower, lower);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(family.assemble(qp.z));
    const double top = es.eigenvalues()(es.eigenvalues().size() - 1);
    const double bottom = es.eigenvalues()(0);
    const double norm = std::max(top, -bottom);
    const Eigen::VectorXd feasible = norm > rho ? Eigen::VectorXd(qp.z * (rho / norm)) : qp.z;
    const double upper = box_clip_dist2(feasible, g);
    if (upper < best.r2_upper) {
      best.r2_upper = upper;
      best.x = feasible;
    }
    if (best.r2_upper - best.r2_lower <= Budget::accuracy) break;
    if (top > rho) cuts.push_back(quadratic_forms(family, es.eigenvectors().col(es.eigenvalues().size() - 1)));
    if (-bottom > rho) cuts.push_back(-quadratic_forms(family, es.eigenvectors().col(0)));
  }
  best.r2_lower = std::min(best.r2_lower, best.r2_upper);
  return best;
}

ValueBracket flam_minimum(const partcolor::OperatorFamily& family, const Eigen::VectorXd& g, double lambda) {
  const int m = static_cast<int>(g.size());
  require(m <= Budget::dense_dim && family.dim() <= Budget::dense_dim, "dimension");
  double s_max = 1.0;
  for (int i = 0; i < m; ++i) s_max += partcolor::exact_opnorm(family, Eigen::VectorXd::Unit(m, i));
  // z = (x, s): minimize s + λ‖x − g‖² subject to the box, 0 ≤ s ≤ s_max and s ≥ ±vᵀA(x)v.
  Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(m + 1, m + 1);
  hm.topLeftCorner(m, m) = 2.0 * lambda * Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd q(m + 1);
  q << -2.0 * lambda * g, 1.0;
  const double constant = lambda * g.squaredNorm();
  std::vector<Eigen::VectorXd> cuts;
  ValueBracket best;
  best.lower = -std::numeric_limits<double>::infinity();
  best.upper = std::numeric_limits<double>::infinity();
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(m + 1);
  z0[m] = 1.0;
  for (int round = 0; round < 2000; ++round) {
    const int rows = 2 * m + 2 + static_cast<int>(cuts.size());
    Eigen::MatrixXd gm = Eigen::MatrixXd::Zero(rows, m + 1);
    Eigen::VectorXd hv = Eigen::VectorXd::Zero(rows);
    gm.topLeftCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
    gm.block(m, 0, m, m) = -Eigen::MatrixXd::Identity(m, m);
    hv.head(2 * m).setOnes();
    gm(2 * m, m) = 1.0;
    hv[2 * m] = s_max;
    gm(2 * m + 1, m) = -1.0;
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      gm.row(2 * m + 2 + c).head(m) = cuts[c].transpose();
      gm(2 * m + 2 + c, m) = -1.0;
    }
    const QpResult qp = barrier_qp(hm, q, gm, hv, z0, 1e-12);
    best.lower = std::max(best.lower, qp.lower + constant);
    const Eigen::VectorXd x = qp.z.head(m);
    const double value = partcolor::flam_value(family, g, lambda, x);
    if (value < best.upper) {
      best.upper = value;
      best.x = x;
    }
    if (best.upper - best.lower <= Budget::accuracy) break;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(family.assemble(x));
    const int n = static_cast<int>(es.eigenvalues().size());
    cuts.push_back(quadratic_forms(family, es.eigenvectors().col(n - 1)));
    cuts.push_back(-quadratic_forms(family, es.eigenvectors().col(0)));
  }
  best.lower = std::min(best.lower, best.upper);
  return best;
}

ValueBracket l2l1_minimum(const Eigen::MatrixXd& a, const Eigen::VectorXd& v, double lambda) {
  const int n = static_cast<int>(v.size());
  const int rows = static_cast<int>(a.rows());
  require(n <= Budget::dense_dim && rows <= Budget::dense_dim, "dimension");
  const double s_max = 2.0 + a.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(n + 1, n + 1);
  hm.topLeftCorner(n, n) = 2.0 * lambda * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd q(n + 1);
  q << -2.0 * lambda * v, 1.0;
  const int k = 2 * n + 1 + 2 * rows;
  Eigen::MatrixXd gm = Eigen::MatrixXd::Zero(k, n + 1);
  Eigen::VectorXd hv = Eigen::VectorXd::Zero(k);
  gm.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  gm.block(n, 0, n, n) = -Eigen::MatrixXd::Identity(n, n);
  hv.head(2 * n).setOnes();
  gm(2 * n, n) = 1.0;
  hv[2 * n] = s_max;
  gm.block(2 * n + 1, 0, rows, n) = a;
  gm.block(2 * n + 1 + rows, 0, rows, n) = -a;
  gm.block(2 * n + 1, n, 2 * rows, 1).setConstant(-1.0);
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(n + 1);
  z0[n] = 1.0;
  const QpResult qp = barrier_qp(hm, q, gm, hv, z0, 1e-12);
  ValueBracket r;
  r.x = qp.z.head(n);
  r.upper = (a * r.x).cwiseAbs().maxCoeff() + lambda * (r.x - v).squaredNorm();
  if (rows == 0) r.upper = lambda * (r.x - v).squaredNorm();
  r.lower = std::min(r.upper, qp.lower + lambda * v.squaredNorm());
  return r;
}

Exhaustive exhaustive_discrepancy(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.cols());
  require(n <= Budget::exhaustive_dim, "exhaustive dimension " + std::to_string(n));
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd y = a * x;
  Exhaustive best;
  best.x = x;
  best.disc = a.rows() ? y.cwiseAbs().maxCoeff() : 0.0;
  for (unsigned long k = 1; k < (1ul << n); ++k) {
    const int j = __builtin_ctzl(k);
    y -= 2.0 * x[j] * a.col(j);
    x[j] = -x[j];
    const double d = a.rows() ? y.cwiseAbs().maxCoeff() : 0.0;
    if (d < best.disc) {
      best.disc = d;
      best.x = x;
    }
  }
  best.disc = a.rows() ? (a * best.x).cwiseAbs().maxCoeff() : 0.0;
  return best;
}

Eigen::VectorXd dense_spectrum(const Eigen::MatrixXd& m) {
  require(m.rows() <= Budget::dense_dim && m.rows() == m.cols(), "dense dimension");
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues();
}

Eigen::MatrixXd dense_pinv(const Eigen::MatrixXd& l) {
  require(l.rows() <= Budget::dense_dim && l.rows() == l.cols(), "dense dimension");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (l + l.transpose()));
  const Eigen::VectorXd ev = es.eigenvalues();
  const double cut = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) > cut) inv[i] = 1.0 / ev[i];
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd dense_leverage(const partcolor::WeightedGraph& g) {
  const Eigen::MatrixXd p = dense_pinv(g.dense_laplacian());
  Eigen::VectorXd lev(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edge(e);
    lev[e] = ed.w * (p(ed.u, ed.u) + p(ed.v, ed.v) - 2.0 * p(ed.u, ed.v));
  }
  return lev;
}

RationalReplay rational_cancel_replay(const partcolor::WeightedGraph& h, const partcolor::DegreeRoundTrace& trace,
                                      const Eigen::VectorXd& float_w) {
  const int m = h.num_edges(), n = h.num_vertices();
  require(m <= Budget::dense_dim, "replay edge count " + std::to_string(m));
  RationalReplay r;
  std::vector<Rational> u(m);
  r.w.resize(m);
  for (int e = 0; e < m; ++e) {
    r.w[e] = Rational(h.edge(e).w);
    u[e] = 2 * r.w[e];
  }
  auto degrees = [&](const std::vector<Rational>& w) {
    std::vector<Rational> d(n, Rational(0));
    for (int e = 0; e < m; ++e) {
      d[h.edge(e).u] += w[e];
      d[h.edge(e).v] += w[e];
    }
    return d;
  };
  r.degrees_in = degrees(r.w);

  for (const partcolor::CancelStep& step : trace.steps) {
    Rational delta = -1;
    for (const auto& [e, orient] : step.cycle) {
      const Rational slack = step.direction * orient > 0 ? u[e] - r.w[e] : r.w[e];
      if (delta < 0 || slack < delta) delta = slack;
    }
    if (delta < 0) delta = 0;
    const double rel = std::abs(delta.convert_to<double>() - step.delta) / std::max(1.0, std::abs(step.delta));
    bool killed_on_cycle = false;
    for (const auto& [e, orient] : step.cycle) {
      r.w[e] += step.direction * orient * delta;
      if (e == step.killed) {
        killed_on_cycle = true;
        const bool at_bound = step.killed_at_upper ? r.w[e] == u[e] : r.w[e] == 0;
        if (!at_bound) ++r.mismatched_steps;
      }
    }
    if (!killed_on_cycle || rel > 1e-9) ++r.mismatched_steps;
  }
  if (trace.flipped)
    for (int e = 0; e < m; ++e) r.w[e] = u[e] - r.w[e];
  r.degrees_out = degrees(r.w);
  for (int e = 0; e < m; ++e) {
    r.zeros += r.w[e] == 0;
    const double gap = std::abs(float_w[e] - r.w[e].convert_to<double>()) / std::max(1.0, u[e].convert_to<double>());
    r.max_float_gap = std::max(r.max_float_gap, gap);
  }
  return r;
}

}  // namespace oracle
