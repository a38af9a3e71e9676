#include "partcolor/isotropize.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "partcolor/errors.hpp"

namespace partcolor {

Eigen::MatrixXd isotropic_factor(const WeightedGraph& reference, double accuracy, Preconditioner pre) {
  const int n = reference.num_vertices();
  LapSolver solver(reference, {accuracy, pre, 0});
  const int rank = n - solver.num_components();
  Eigen::MatrixXd p(n, n);
  Eigen::VectorXd e(n);
  for (int j = 0; j < n; ++j) {
    e.setZero();
    e[j] = 1.0;
    p.col(j) = solver.solve(e);
  }
  p = 0.5 * (p + p.transpose());
  const int m = reference.num_edges();
  Eigen::MatrixXd phi(m, n);
  for (int k = 0; k < m; ++k) {
    const Edge& ed = reference.edge(k);
    phi.row(k) = std::sqrt(ed.w) * (p.row(ed.u) - p.row(ed.v));
  }
  if (rank == 0) return Eigen::MatrixXd(0, n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
  Eigen::MatrixXd r = qr.matrixR().topRows(std::min<Eigen::Index>(rank, phi.rows())).triangularView<Eigen::Upper>();
  Eigen::MatrixXd f = r * qr.colsPermutation().transpose();
  if (f.rows() < rank) {
    // fewer edges than the rank can only happen for inconsistent input; pad with zeros
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(rank, n);
    padded.topRows(f.rows()) = f;
    f = padded;
  }
  return f;
}

OperatorFamily edge_family(const Eigen::MatrixXd& factor, const WeightedGraph& atoms) {
  if (factor.cols() != atoms.num_vertices()) throw ArgumentError("edge_family: factor and graph disagree on n");
  std::vector<Atom> out;
  out.reserve(atoms.num_edges());
  for (const Edge& ed : atoms.edges()) {
    VectorAtom a;
    a.scale = 1.0;
    a.v = std::sqrt(ed.w) * (factor.col(ed.u) - factor.col(ed.v));
    out.emplace_back(std::move(a));
  }
  return OperatorFamily(static_cast<int>(factor.rows()), std::move(out));
}

OperatorFamily isotropize(const WeightedGraph& g, double eps_iso, bool per_component) {
  if (!per_component && !g.connected()) throw ArgumentError("isotropize: graph is disconnected");
  if (!(eps_iso > 0.0 && eps_iso < 1.0)) throw ArgumentError("isotropize: eps_iso must lie in (0,1)");
  return edge_family(isotropic_factor(g, eps_iso), g);
}

namespace {

std::pair<double, double> dense_extremes(const WeightedGraph& g, const WeightedGraph& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(g.dense_laplacian());
  const Eigen::VectorXd& lam = eg.eigenvalues();
  const double top = lam.size() ? lam.maxCoeff() : 0.0;
  std::vector<int> keep;
  for (int i = 0; i < lam.size(); ++i)
    if (lam[i] > 1e-9 * top) keep.push_back(i);
  if (keep.empty()) return {1.0, 1.0};
  Eigen::MatrixXd s(g.num_vertices(), keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) s.col(k) = eg.eigenvectors().col(keep[k]) / std::sqrt(lam[keep[k]]);
  Eigen::MatrixXd m = s.transpose() * h.dense_laplacian() * s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return {em.eigenvalues().minCoeff(), em.eigenvalues().maxCoeff()};
}

std::pair<double, double> lanczos_extremes(const WeightedGraph& g, const WeightedGraph& h) {
  LapSolver solver(g, {1e-10, Preconditioner::Jacobi, 0});
  kernels::Csr lg = g.laplacian(), lh = h.laplacian();
  const int n = g.num_vertices();
  const int k_max = std::min(300, n - solver.num_components());
  GaussianSource rng(0x5eed, 17);
  auto gdot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd t(n);
    kernels::spmv(lg, b.data(), t.data());
    return a.dot(t);
  };
  Eigen::MatrixXd q(n, k_max + 1);
  Eigen::VectorXd v = rng.normal_vector(n);
  solver.project(v);
  q.col(0) = v / std::sqrt(gdot(v, v));
  std::vector<double> alpha, beta;
  Eigen::VectorXd hv(n), w;
  for (int j = 0; j < k_max; ++j) {
    Eigen::VectorXd qj = q.col(j);
    kernels::spmv(lh, qj.data(), hv.data());
    alpha.push_back(qj.dot(hv));
    w = solver.solve(hv);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) w -= gdot(q.col(i), w) * q.col(i);
    // Rounding leaves a kernel component that the division by b amplifies at every step.
    solver.project(w);
    const double b = std::sqrt(std::max(0.0, gdot(w, w)));
    if (b <= 1e-12) break;
    beta.push_back(b);
    q.col(j + 1) = w / b;
  }
  Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), alpha.size());
  Eigen::VectorXd sub = Eigen::Map<Eigen::VectorXd>(beta.data(), alpha.size() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  tri.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return {tri.eigenvalues().minCoeff(), tri.eigenvalues().maxCoeff()};
}

}  // namespace

std::pair<double, double> generalized_extremes(const WeightedGraph& g, const WeightedGraph& h, int dense_limit) {
  if (g.num_vertices() != h.num_vertices()) throw ArgumentError("generalized_extremes: vertex counts differ");
  if (g.num_vertices() <= dense_limit) return dense_extremes(g, h);
  return lanczos_extremes(g, h);
}

SandwichCertificate certify_sandwich(const WeightedGraph& g, const Eigen::VectorXd& w, double eps, double tol,
                                     int dense_limit) {
  if (w.size() != g.num_edges()) throw ArgumentError("certify_sandwich: weight vector length mismatch");
  for (int e = 0; e < w.size(); ++e)
    if (!(w[e] >= 0.0)) throw ArgumentError("certify_sandwich: negative weight on edge " + std::to_string(e));
  std::vector<int> ids;
  std::vector<double> ws;
  for (int e = 0; e < w.size(); ++e)
    if (w[e] > 0.0) {
      ids.push_back(e);
      ws.push_back(w[e] * g.edge(e).w);
    }
  WeightedGraph h = g.subgraph(ids, Eigen::Map<Eigen::VectorXd>(ws.data(), ws.size()));
  auto [lo, hi] = generalized_extremes(g, h, dense_limit);
  SandwichCertificate cert;
  cert.lambda_min = lo;
  cert.lambda_max = hi;
  cert.ok = lo >= 1.0 - eps - tol && hi <= 1.0 + eps + tol;
  return cert;
}

std::vector<int> maximum_weight_spanning_tree(const WeightedGraph& g) {
  std::vector<int> order(g.num_edges());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g.edge(a).w > g.edge(b).w; });
  std::vector<int> parent(g.num_vertices());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::vector<int> tree;
  for (int e : order) {
    int a = find(g.edge(e).u), b = find(g.edge(e).v);
    if (a == b) continue;
    parent[a] = b;
    tree.push_back(e);
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

std::vector<int> bfs_spanning_tree(const WeightedGraph& g) {
  std::vector<std::vector<std::pair<int, int>>> adj(g.num_vertices());
  for (int e = 0; e < g.num_edges(); ++e) {
    adj[g.edge(e).u].push_back({g.edge(e).v, e});
    adj[g.edge(e).v].push_back({g.edge(e).u, e});
  }
  std::vector<char> seen(g.num_vertices(), 0);
  std::vector<int> tree;
  for (int s = 0; s < g.num_vertices(); ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int a = q.front();
      q.pop();
      for (auto [b, e] : adj[a])
        if (!seen[b]) {
          seen[b] = 1;
          tree.push_back(e);
          q.push(b);
        }
    }
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

Eigen::VectorXd tree_resistances(const WeightedGraph& g, const std::vector<int>& tree) {
  const int n = g.num_vertices();
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (int e : tree) {
    const Edge& ed = g.edge(e);
    adj[ed.u].push_back({ed.v, 1.0 / ed.w});
    adj[ed.v].push_back({ed.u, 1.0 / ed.w});
  }
  int levels = 1;
  while ((1 << levels) < n) ++levels;
  std::vector<std::vector<int>> up(levels, std::vector<int>(n, -1));
  std::vector<int> depth(n, -1), root(n, -1);
  std::vector<double> dist(n, 0.0);
  for (int s = 0; s < n; ++s) {
    if (depth[s] >= 0) continue;
    depth[s] = 0;
    root[s] = s;
    up[0][s] = s;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int a = q.front();
      q.pop();
      for (auto [b, r] : adj[a])
        if (depth[b] < 0) {
          depth[b] = depth[a] + 1;
          dist[b] = dist[a] + r;
          root[b] = s;
          up[0][b] = a;
          q.push(b);
        }
    }
  }
  for (int l = 1; l < levels; ++l)
    for (int v = 0; v < n; ++v) up[l][v] = up[l - 1][up[l - 1][v]];
  auto lca = [&](int a, int b) {
    if (depth[a] < depth[b]) std::swap(a, b);
    for (int l = levels - 1; l >= 0; --l)
      if (depth[a] - (1 << l) >= depth[b]) a = up[l][a];
    if (a == b) return a;
    for (int l = levels - 1; l >= 0; --l)
      if (up[l][a] != up[l][b]) {
        a = up[l][a];
        b = up[l][b];
      }
    return up[0][a];
  };
  Eigen::VectorXd res(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    if (root[ed.u] != root[ed.v]) throw ArgumentError("tree does not span the endpoints of edge " + std::to_string(e));
    res[e] = dist[ed.u] + dist[ed.v] - 2.0 * dist[lca(ed.u, ed.v)];
  }
  return res;
}

double tree_distortion(const WeightedGraph& g, const std::vector<int>& tree) {
  return g.weights().dot(tree_resistances(g, tree));
}

}  // namespace partcolor
