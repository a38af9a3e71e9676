#include "partcolor/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>

#include "partcolor/errors.hpp"
#include "partcolor/text_io.hpp"

namespace partcolor {

WeightedGraph::WeightedGraph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n < 0) throw ArgumentError("graph: negative vertex count");
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    if (ed.u < 0 || ed.u >= n || ed.v < 0 || ed.v >= n)
      throw ArgumentError("graph: edge " + std::to_string(e) + " has an endpoint out of range");
    if (ed.u == ed.v) throw ArgumentError("graph: edge " + std::to_string(e) + " is a self-loop");
    if (!(ed.w > 0.0) || !std::isfinite(ed.w))
      throw ArgumentError("graph: edge " + std::to_string(e) + " has a non-positive weight");
  }
}

Eigen::VectorXd WeightedGraph::weights() const {
  Eigen::VectorXd w(num_edges());
  for (int e = 0; e < num_edges(); ++e) w[e] = edges_[e].w;
  return w;
}

Eigen::VectorXd WeightedGraph::weighted_degrees() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n_);
  for (const Edge& e : edges_) {
    d[e.u] += e.w;
    d[e.v] += e.w;
  }
  return d;
}

kernels::Csr WeightedGraph::incidence() const {
  std::vector<kernels::Csr::Entry> entries;
  entries.reserve(2 * edges_.size());
  for (int e = 0; e < num_edges(); ++e) {
    entries.push_back({e, edges_[e].u, 1.0});
    entries.push_back({e, edges_[e].v, -1.0});
  }
  return kernels::Csr::from_entries(num_edges(), n_, std::move(entries));
}

kernels::Csr WeightedGraph::laplacian() const {
  std::vector<kernels::Csr::Entry> entries;
  entries.reserve(4 * edges_.size());
  for (const Edge& e : edges_) {
    entries.push_back({e.u, e.u, e.w});
    entries.push_back({e.v, e.v, e.w});
    entries.push_back({e.u, e.v, -e.w});
    entries.push_back({e.v, e.u, -e.w});
  }
  return kernels::Csr::from_entries(n_, n_, std::move(entries));
}

Eigen::MatrixXd WeightedGraph::dense_laplacian() const {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n_, n_);
  for (const Edge& e : edges_) {
    l(e.u, e.u) += e.w;
    l(e.v, e.v) += e.w;
    l(e.u, e.v) -= e.w;
    l(e.v, e.u) -= e.w;
  }
  return l;
}

double WeightedGraph::laplacian_quadratic(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (const Edge& e : edges_) s += e.w * (x[e.u] - x[e.v]) * (x[e.u] - x[e.v]);
  return s;
}

std::vector<int> WeightedGraph::components(int* count) const {
  std::vector<int> parent(n_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const Edge& e : edges_) parent[find(e.u)] = find(e.v);
  std::vector<int> label(n_, -1), root_label(n_, -1);
  int c = 0;
  for (int v = 0; v < n_; ++v) {
    int r = find(v);
    if (root_label[r] < 0) root_label[r] = c++;
    label[v] = root_label[r];
  }
  if (count) *count = c;
  return label;
}

bool WeightedGraph::connected() const {
  int c = 0;
  components(&c);
  return c <= 1;
}

std::optional<std::vector<int>> WeightedGraph::two_coloring() const {
  std::vector<std::vector<int>> adj(n_);
  for (const Edge& e : edges_) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<int> side(n_, -1);
  for (int s = 0; s < n_; ++s) {
    if (side[s] >= 0) continue;
    side[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int a = q.front();
      q.pop();
      for (int b : adj[a]) {
        if (side[b] < 0) {
          side[b] = 1 - side[a];
          q.push(b);
        } else if (side[b] == side[a]) {
          return std::nullopt;
        }
      }
    }
  }
  return side;
}

WeightedGraph WeightedGraph::scaled(const Eigen::VectorXd& multiplier) const {
  if (multiplier.size() != num_edges()) throw ArgumentError("scaled: multiplier length mismatch");
  std::vector<Edge> out = edges_;
  for (int e = 0; e < num_edges(); ++e) out[e].w *= multiplier[e];
  return WeightedGraph(n_, std::move(out));
}

WeightedGraph WeightedGraph::subgraph(const std::vector<int>& ids, const Eigen::VectorXd& weights) const {
  if (static_cast<Eigen::Index>(ids.size()) != weights.size()) throw ArgumentError("subgraph: length mismatch");
  std::vector<Edge> out;
  out.reserve(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    Edge e = edges_.at(ids[k]);
    e.w = weights[k];
    out.push_back(e);
  }
  return WeightedGraph(n_, std::move(out));
}

WeightedGraph read_edge_list(std::istream& in, int min_vertices) {
  text::LineReader reader(in);
  std::vector<std::string_view> tok;
  std::vector<Edge> edges;
  int n = min_vertices;
  while (reader.next(tok)) {
    if (tok.size() != 2 && tok.size() != 3) reader.fail("expected `u v w`");
    long long u = reader.to_int(tok[0]);
    long long v = reader.to_int(tok[1]);
    double w = tok.size() == 3 ? reader.to_double(tok[2]) : 1.0;
    if (u < 0 || v < 0 || u > 100000000 || v > 100000000) reader.fail("vertex index out of range");
    if (u == v) reader.fail("self-loop");
    if (!(w > 0.0) || !std::isfinite(w)) reader.fail("edge weight must be positive");
    edges.push_back({static_cast<int>(u), static_cast<int>(v), w});
    n = std::max<int>(n, static_cast<int>(std::max(u, v)) + 1);
  }
  return WeightedGraph(n, std::move(edges));
}

WeightedGraph read_coo(std::istream& in) {
  text::LineReader reader(in);
  std::vector<std::string_view> tok;
  if (!reader.next(tok)) throw ParseError("empty matrix file", reader.line());
  if (tok.size() != 3) reader.fail("header must be `rows cols nnz`");
  long long rows = reader.to_int(tok[0]), cols = reader.to_int(tok[1]), nnz = reader.to_int(tok[2]);
  if (rows != cols || rows < 0) reader.fail("matrix must be square");
  if (nnz < 0) reader.fail("negative entry count");
  std::map<std::pair<int, int>, double> pairs;
  std::vector<std::pair<int, int>> order;
  for (long long k = 0; k < nnz; ++k) {
    if (!reader.next(tok)) throw ParseError("expected " + std::to_string(nnz) + " entries", reader.line());
    if (tok.size() != 3) reader.fail("expected `i j v`");
    long long i = reader.to_int(tok[0]), j = reader.to_int(tok[1]);
    double v = reader.to_double(tok[2]);
    if (i < 1 || j < 1 || i > rows || j > cols) reader.fail("entry index out of range");
    if (!std::isfinite(v)) reader.fail("non-finite entry");
    if (i == j || v == 0.0) continue;
    auto key = std::make_pair(static_cast<int>(std::min(i, j) - 1), static_cast<int>(std::max(i, j) - 1));
    auto it = pairs.find(key);
    if (it == pairs.end()) {
      pairs.emplace(key, std::abs(v));
      order.push_back(key);
    } else if (it->second != std::abs(v)) {
      reader.fail("symmetric pair listed with different values");
    }
  }
  if (reader.next(tok)) reader.fail("more entries than announced in the header");
  std::vector<Edge> edges;
  edges.reserve(order.size());
  for (const auto& key : order) edges.push_back({key.first, key.second, pairs[key]});
  return WeightedGraph(static_cast<int>(rows), std::move(edges));
}

void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << ' ' << text::format_double(e.w) << '\n';
}

namespace gen {

WeightedGraph path(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
  return WeightedGraph(n, std::move(e));
}

WeightedGraph cycle(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n, 1.0});
  return WeightedGraph(n, std::move(e));
}

WeightedGraph star(int leaves) {
  std::vector<Edge> e;
  for (int i = 1; i <= leaves; ++i) e.push_back({0, i, 1.0});
  return WeightedGraph(leaves + 1, std::move(e));
}

WeightedGraph complete(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.push_back({i, j, 1.0});
  return WeightedGraph(n, std::move(e));
}

WeightedGraph complete_bipartite(int a, int b) {
  std::vector<Edge> e;
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j) e.push_back({i, a + j, 1.0});
  return WeightedGraph(a + b, std::move(e));
}

WeightedGraph grid(int rows, int cols) {
  std::vector<Edge> e;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) e.push_back({id(r, c), id(r, c + 1), 1.0});
      if (r + 1 < rows) e.push_back({id(r, c), id(r + 1, c), 1.0});
    }
  return WeightedGraph(rows * cols, std::move(e));
}

WeightedGraph erdos_renyi(int n, double p, GaussianSource& rng, bool connected) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform() < p) e.push_back({i, j, 1.0});
    WeightedGraph g(n, std::move(e));
    if (!connected || g.connected()) return g;
  }
  throw ArgumentError("erdos_renyi: could not sample a connected graph");
}

WeightedGraph random_bipartite(int a, int b, int m, GaussianSource& rng) {
  if (m > a * b) throw ArgumentError("random_bipartite: too many edges");
  std::set<std::pair<int, int>> seen;
  std::vector<Edge> e;
  while (static_cast<int>(e.size()) < m) {
    int i = static_cast<int>(rng.uniform_index(a));
    int j = static_cast<int>(rng.uniform_index(b));
    if (seen.insert({i, j}).second) e.push_back({i, a + j, 1.0});
  }
  return WeightedGraph(a + b, std::move(e));
}

WeightedGraph random_tree(int n, GaussianSource& rng) {
  std::vector<Edge> e;
  for (int v = 1; v < n; ++v) e.push_back({static_cast<int>(rng.uniform_index(v)), v, 1.0});
  return WeightedGraph(n, std::move(e));
}

}  // namespace gen

}  // namespace partcolor
