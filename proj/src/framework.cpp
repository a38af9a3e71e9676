#include "partcolor/framework.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "partcolor/errors.hpp"

namespace partcolor {

bool check_anchor(const Eigen::VectorXd& g) {
  return g.norm() <= 2.0 * std::sqrt(static_cast<double>(g.size()));
}

Eigen::VectorXd draw_anchor(int m, GaussianSource& rng, int attempts) {
  for (int a = 0; a < std::max(1, attempts); ++a) {
    Eigen::VectorXd g = rng.normal_vector(m);
    if (check_anchor(g)) return g;
  }
  throw PhaseError("no Gaussian anchor with ‖g‖ ≤ 2√m after " + std::to_string(attempts) + " draws");
}

std::string to_string(SearchExit e) {
  switch (e) {
    case SearchExit::DragDownInit: return "drag-down-init";
    case SearchExit::DragDownTest: return "drag-down-test";
    case SearchExit::Aggregate: return "aggregate";
    case SearchExit::CallCap: return "call-cap";
    case SearchExit::Degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

Eigen::VectorXd clip_box(const Eigen::VectorXd& g) { return g.cwiseMax(-1.0).cwiseMin(1.0); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

SearchResult binary_search_partial_color(const DiscrepancyBody& body, const Eigen::VectorXd& g, double beta,
                                         const RegularizedSolver& solver, GaussianSource& rng,
                                         const FrameworkConfig& config) {
  const int m = body.dim;
  if (g.size() != m) throw ArgumentError("binary_search: anchor length differs from body dimension");
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("binary_search: beta must lie in (0,1)");
  if (!(body.rho > 0.0)) throw ArgumentError("binary_search: rho must be positive");
  if (m == 0) return SearchResult{Eigen::VectorXd(0), 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0, SearchExit::Degenerate, {}, {}};

  const double rho = body.rho;
  const double theta = std::max(body.theta, rho);
  SearchResult res;
  res.tau = config.c_tight * m * beta * beta / 4.0;
  res.c = res.tau / (64.0 * m);
  const double tau = res.tau, c = res.c;
  if (!check_anchor(g)) res.diagnostics.push_back("anchor exceeds 2√m; distance guarantees do not apply");

  int cap = config.max_calls;
  if (cap <= 0) {
    const double loglog = std::log2(std::max(2.0, std::log2(std::max(2.0, theta / rho))));
    cap = static_cast<int>(std::ceil(4.0 * (std::log2(1.0 / beta) + loglog + 8.0)));
  }

  auto dist2 = [&](const Eigen::VectorXd& x) { return (x - g).squaredNorm(); };
  auto call = [&](double lambda, const Eigen::VectorXd* warm) {
    SolveRequest req{lambda, &g, lambda * tau / 4.0, config.warm_start ? warm : nullptr};
    ++res.solver_calls;
    Eigen::VectorXd x = solver(req, rng);
    if (x.size() != m) throw ContractViolation("regularized solver returned a vector of the wrong length");
    if ((x.array().abs() > 1.0 + 1e-9).any()) throw ContractViolation("regularized solver left the box");
    return Eigen::VectorXd(clip_box(x));
  };
  auto finish = [&](Eigen::VectorXd x, SearchExit exit) {
    res.x = std::move(x);
    res.dist2 = dist2(res.x);
    res.exit = exit;
    return res;
  };

  const double lam_lo = rho / (8.0 * m);
  const double lam_hi = std::max(4.0 * theta / tau, lam_lo * (1.0 + c));

  // Upper end: x_g for the box, a solver call when the body is constrained.
  Eigen::VectorXd x_hi = body.constrained ? call(lam_hi, nullptr) : clip_box(g);
  double a_hi = body.value(x_hi, c, rng);
  res.trace.push_back({lam_hi, a_hi, dist2(x_hi)});
  if (a_hi <= (1.0 + c) * rho) {
    res.value_hi = a_hi;
    return finish(x_hi / (1.0 + c), SearchExit::DragDownInit);
  }

  Eigen::VectorXd x_lo = call(lam_lo, &x_hi);
  double a_lo = body.value(x_lo, c, rng);
  res.trace.push_back({lam_lo, a_lo, dist2(x_lo)});
  if (a_lo > rho) {
    res.diagnostics.push_back("lower initialization has f = " + fmt(a_lo) + " > rho = " + fmt(rho) +
                              "; solver missed its accuracy, scaling the point into K");
    x_lo *= rho / a_lo;
    a_lo = rho;
  }

  // Lazy grid λ_j = lam_lo·(1 + c)^j, j = 0..J.
  const long long grid_top =
      std::max<long long>(1, static_cast<long long>(std::ceil(std::log(lam_hi / lam_lo) / std::log1p(c))));
  long long lo = 0, hi = grid_top;
  auto lambda_at = [&](long long j) { return j == grid_top ? lam_hi : lam_lo * std::exp(j * std::log1p(c)); };
  const Eigen::VectorXd* last = &x_lo;

  while (hi - lo > 1) {
    if (res.solver_calls >= cap) {
      res.diagnostics.push_back("binary search hit its call cap of " + std::to_string(cap) +
                                " with " + std::to_string(hi - lo) + " grid intervals left");
      res.value_lo = a_lo;
      res.value_hi = a_hi;
      return finish(x_lo, SearchExit::CallCap);
    }
    const long long mid = lo + (hi - lo) / 2;
    const double lam = lambda_at(mid);
    Eigen::VectorXd x_t = call(lam, last);
    const double a_t = body.value(x_t, c, rng);
    res.trace.push_back({lam, a_t, dist2(x_t)});
    if (a_t >= rho && a_t <= (1.0 + c) * rho) {
      res.value_lo = res.value_hi = a_t;
      return finish(x_t / (1.0 + c), SearchExit::DragDownTest);
    }
    if (a_t < rho) {
      lo = mid;
      x_lo = std::move(x_t);
      a_lo = a_t;
      last = &x_lo;
    } else {
      hi = mid;
      x_hi = std::move(x_t);
      a_hi = a_t;
      last = &x_hi;
    }
  }

  const double ratio = lambda_at(hi) / lambda_at(lo);
  if (!(ratio < 1.0 + tau / (10.0 * m)))
    res.diagnostics.push_back("adjacent multipliers differ by " + fmt(ratio) + ", above the aggregation bound");
  res.alpha = 1.0 - (rho - a_lo) / (a_hi - a_lo);
  res.value_lo = a_lo;
  res.value_hi = a_hi;
  return finish(res.alpha * x_lo + (1.0 - res.alpha) * x_hi, SearchExit::Aggregate);
}

std::vector<int> near_tight_negative(const Eigen::VectorXd& x, double beta) {
  std::vector<int> s;
  for (int i = 0; i < x.size(); ++i)
    if (x[i] <= -1.0 + beta) s.push_back(i);
  return s;
}

std::vector<int> near_tight_absolute(const Eigen::VectorXd& x, double beta) {
  std::vector<int> s;
  for (int i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) >= 1.0 - beta) s.push_back(i);
  return s;
}

PartialColoring two_sided_partial_color(const DiscrepancyBody& body, double beta, const RegularizedSolver& solver,
                                        GaussianSource& rng, const FrameworkConfig& config) {
  Eigen::VectorXd g = draw_anchor(body.dim, rng, config.anchor_attempts);
  const Eigen::VectorXd neg = -g;
  GaussianSource rng_pos = rng.split(1), rng_neg = rng.split(2);

  struct Outcome {
    bool ok = false;
    SearchResult result;
    std::string error;
  };
  auto run = [&](const Eigen::VectorXd& anchor, GaussianSource& r) {
    Outcome o;
    try {
      o.result = binary_search_partial_color(body, anchor, beta, solver, r, config);
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    return o;
  };

  Outcome pos, negr;
  if (config.concurrent_signs) {
    auto fut = std::async(std::launch::async, [&] { return run(neg, rng_neg); });
    pos = run(g, rng_pos);
    negr = fut.get();
  } else {
    pos = run(g, rng_pos);
    negr = run(neg, rng_neg);
  }
  if (!pos.ok && !negr.ok)
    throw PhaseError("partial coloring failed for both anchor signs: [" + pos.error + "] [" + negr.error + "]");

  PartialColoring pc;
  pc.beta = beta;
  pc.counts[0] = pos.ok ? static_cast<int>(near_tight_negative(pos.result.x, beta).size()) : -1;
  pc.counts[1] = negr.ok ? static_cast<int>(near_tight_negative(negr.result.x, beta).size()) : -1;
  const bool take_neg = pc.counts[1] > pc.counts[0];
  Outcome& chosen = take_neg ? negr : pos;
  if (!pos.ok) pc.diagnostics.push_back("+g run failed: " + pos.error);
  if (!negr.ok) pc.diagnostics.push_back("-g run failed: " + negr.error);
  pc.anchor_sign = take_neg ? -1 : 1;
  pc.anchor = take_neg ? neg : g;
  pc.selected = std::move(chosen.result);
  pc.x = pc.selected.x;
  pc.dist2 = pc.selected.dist2;
  pc.near_tight = near_tight_negative(pc.x, beta);
  pc.abs_near_tight = near_tight_absolute(pc.x, beta);
  for (const auto& d : pc.selected.diagnostics) pc.diagnostics.push_back(d);
  return pc;
}

}  // namespace partcolor
