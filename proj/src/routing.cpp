#include "partcolor/routing.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "partcolor/errors.hpp"
#include "partcolor/isotropize.hpp"

namespace partcolor {

RoutingKind parse_routing_kind(const std::string& s) {
  if (s == "electric") return RoutingKind::Electric;
  if (s == "tree") return RoutingKind::Tree;
  throw ArgumentError("unknown routing '" + s + "' (expected electric or tree)");
}

std::string to_string(RoutingKind k) { return k == RoutingKind::Electric ? "electric" : "tree"; }

ObliviousRouting::ObliviousRouting(const WeightedGraph& g, RoutingKind kind, double solver_accuracy,
                                   int alpha_samples, std::uint64_t alpha_seed)
    : kind_(kind), n_(g.num_vertices()), edges_(g.edges()), w_(g.weights()) {
  if (kind_ == RoutingKind::Electric) {
    solver_ = std::make_unique<LapSolver>(g, LapSolverOptions{solver_accuracy, Preconditioner::Jacobi, 0});
  } else {
    const std::vector<int> tree = maximum_weight_spanning_tree(g);
    std::vector<std::vector<std::pair<int, int>>> adj(n_);
    for (int e : tree) {
      adj[edges_[e].u].push_back({edges_[e].v, e});
      adj[edges_[e].v].push_back({edges_[e].u, e});
    }
    parent_edge_.assign(n_, -1);
    parent_.assign(n_, -1);
    std::vector<char> seen(n_, 0);
    for (int r = 0; r < n_; ++r) {
      if (seen[r]) continue;
      std::queue<int> q;
      q.push(r);
      seen[r] = 1;
      while (!q.empty()) {
        const int v = q.front();
        q.pop();
        order_.push_back(v);
        for (auto [u, e] : adj[v])
          if (!seen[u]) {
            seen[u] = 1;
            parent_[u] = v;
            parent_edge_[u] = e;
            q.push(u);
          }
      }
    }
  }
  if (alpha_samples > 0 && !edges_.empty()) {
    GaussianSource rng(alpha_seed);
    alpha_ = measure_alpha(alpha_samples, rng);
  }
}

Eigen::VectorXd ObliviousRouting::divergence(const Eigen::VectorXd& flow) const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n_);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    d[edges_[e].u] += flow[e];
    d[edges_[e].v] -= flow[e];
  }
  return d;
}

Eigen::VectorXd ObliviousRouting::gradient(const Eigen::VectorXd& phi) const {
  Eigen::VectorXd g(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) g[e] = phi[edges_[e].u] - phi[edges_[e].v];
  return g;
}

Eigen::VectorXd ObliviousRouting::route(const Eigen::VectorXd& demand) const {
  if (demand.size() != n_) throw ArgumentError("route: demand has wrong length");
  const int m = num_edges();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
  if (kind_ == RoutingKind::Electric) {
    Eigen::VectorXd phi;
    {
      std::lock_guard<std::mutex> lock(solver_mutex_);
      phi = solver_->solve(demand);
    }
    for (int e = 0; e < m; ++e) f[e] = w_[e] * (phi[edges_[e].u] - phi[edges_[e].v]);
    return f;
  }
  Eigen::VectorXd supply = demand;
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    const int v = *it, e = parent_edge_[v];
    if (e < 0) continue;
    f[e] = edges_[e].u == v ? supply[v] : -supply[v];
    supply[parent_[v]] += supply[v];
  }
  return f;
}

Eigen::VectorXd ObliviousRouting::route_transpose(const Eigen::VectorXd& flow) const {
  if (flow.size() != num_edges()) throw ArgumentError("route_transpose: flow has wrong length");
  if (kind_ == RoutingKind::Electric) {
    Eigen::VectorXd b = divergence(flow.cwiseProduct(w_));
    std::lock_guard<std::mutex> lock(solver_mutex_);
    return solver_->solve(b);
  }
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n_);
  for (int v : order_) {
    const int e = parent_edge_[v];
    if (e < 0) continue;
    phi[v] = phi[parent_[v]] + (edges_[e].u == v ? flow[e] : -flow[e]);
  }
  return phi;
}

Eigen::VectorXd ObliviousRouting::edge_operator(const Eigen::VectorXd& y) const {
  return route(divergence(w_.cwiseProduct(y))).cwiseQuotient(w_);
}

double ObliviousRouting::measure_alpha(int samples, GaussianSource& rng) const {
  double alpha = 0.0;
  const int m = num_edges();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd y(m);
    for (int e = 0; e < m; ++e) y[e] = rng.coin() ? 1.0 : -1.0;
    alpha = std::max(alpha, edge_operator(y).lpNorm<Eigen::Infinity>());
  }
  return alpha;
}

CirculationOracle::CirculationOracle(const ObliviousRouting& routing, CirculationConfig config)
    : routing_(routing), config_(config) {
  if (!(config_.accuracy > 0.0 && config_.accuracy < 1.0))
    throw ArgumentError("circulation oracle: accuracy must lie in (0,1)");
  const int m = std::max(2, routing_.num_edges());
  p_ = std::max(2.0, std::ceil(5.0 * std::log(m) / config_.accuracy));
  if (config_.max_iterations > 0) {
    iterations_ = config_.max_iterations;
  } else {
    const double a = std::max(1.0, routing_.alpha());
    const double k = std::ceil(a * a * std::log(m) / (config_.accuracy * config_.accuracy));
    iterations_ = static_cast<int>(std::min<double>(k, config_.iteration_cap));
  }
}

Eigen::VectorXd CirculationOracle::project(const Eigen::VectorXd& z) const { return z - routing_.edge_operator(z); }

Eigen::VectorXd CirculationOracle::project_transpose(const Eigen::VectorXd& v) const {
  // Aᵀ = W (I − B Rᵀ) W⁻¹
  const Eigen::VectorXd& w = routing_.edge_weights();
  return v - w.cwiseProduct(routing_.gradient(routing_.route_transpose(v.cwiseQuotient(w))));
}

namespace {

// ‖y‖_p and the gradient of ½‖y‖_p², computed with |y_i|/‖y‖_p ≤ 1 to stay finite for large p.
double pnorm(const Eigen::VectorXd& y, double p) {
  const double top = y.lpNorm<Eigen::Infinity>();
  if (top == 0.0) return 0.0;
  double s = 0.0;
  for (int i = 0; i < y.size(); ++i) s += std::pow(std::abs(y[i]) / top, p);
  return top * std::pow(s, 1.0 / p);
}

Eigen::VectorXd half_pnorm_sq_grad(const Eigen::VectorXd& y, double p, double norm) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(y.size());
  if (norm == 0.0) return g;
  for (int i = 0; i < y.size(); ++i) {
    const double r = std::abs(y[i]) / norm;
    g[i] = (y[i] < 0 ? -norm : norm) * std::pow(r, p - 1.0);
  }
  return g;
}

}  // namespace

CirculationLinopt CirculationOracle::minimize(const Eigen::VectorXd& c) const {
  const int m = routing_.num_edges();
  if (c.size() != m) throw ArgumentError("circulation_linopt: cost has wrong length");
  CirculationLinopt out;
  out.x = Eigen::VectorXd::Zero(m);
  if (m == 0 || c.lpNorm<Eigen::Infinity>() == 0.0) {
    out.degenerate = true;
    return out;
  }
  const double a = 1.0 + routing_.alpha();
  double lip = (p_ - 1.0) * a * a * std::exp(2.0 * config_.accuracy / 5.0);
  auto objective = [&](const Eigen::VectorXd& y, double* norm) {
    *norm = pnorm(y, p_);
    return c.dot(y) + 0.5 * (*norm) * (*norm);
  };

  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  double ynorm = 0.0;
  double phi = 0.0;
  Eigen::VectorXd best = Eigen::VectorXd::Zero(m);
  double best_ratio = 0.0;
  int it = 0;
  for (; it < iterations_; ++it) {
    const Eigen::VectorXd grad = project_transpose(c + half_pnorm_sq_grad(y, p_, ynorm));
    const double g1 = grad.lpNorm<1>();
    if (g1 <= 1e-14 * c.lpNorm<1>()) break;
    Eigen::VectorXd sgn = grad.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
    bool accepted = false;
    for (int bt = 0; bt < 40 && !accepted; ++bt) {
      Eigen::VectorXd cand = project(y - (g1 / lip) * sgn);
      double cnorm = 0.0;
      const double cphi = objective(cand, &cnorm);
      if (cphi <= phi - g1 * g1 / (2.0 * lip) * 0.5 || bt == 39) {
        accepted = cphi < phi;
        if (accepted) {
          y = std::move(cand);
          ynorm = cnorm;
          phi = cphi;
        }
        break;
      }
      lip *= 2.0;
    }
    if (!accepted) break;
    lip = std::max(lip / 2.0, 1e-12);
    const double top = y.lpNorm<Eigen::Infinity>();
    if (top > 0.0) {
      const double ratio = c.dot(y) / top;
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best = y / top;
      }
    }
  }
  out.iterations = it;
  if (!(best_ratio < -1e-14 * c.lpNorm<1>())) {
    out.degenerate = true;
    return out;
  }
  out.x = best.cwiseMax(-1.0).cwiseMin(1.0);
  out.value = c.dot(out.x);
  return out;
}

LinearOracle CirculationOracle::as_linear_oracle() const {
  return [this](const Eigen::VectorXd& c) { return minimize(c).x; };
}

CirculationLinopt circulation_linopt(const CirculationOracle& oracle, const Eigen::VectorXd& c) {
  return oracle.minimize(c);
}

}  // namespace partcolor
