#include "partcolor/degree_round.hpp"

#include <algorithm>
#include <cmath>

#include "partcolor/errors.hpp"
#include "partcolor/link_cut.hpp"

namespace partcolor {

int degree_round_zero_bound(int m, int n) { return std::max(0, (m - (n - 1) + 1) / 2); }

double relative_degree_residual(const WeightedGraph& h, const Eigen::VectorXd& w) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(h.num_vertices());
  for (int e = 0; e < h.num_edges(); ++e) {
    d[h.edge(e).u] += w[e];
    d[h.edge(e).v] += w[e];
  }
  const Eigen::VectorXd ref = h.weighted_degrees();
  double worst = 0.0;
  for (int v = 0; v < ref.size(); ++v)
    if (ref[v] > 0.0) worst = std::max(worst, std::abs(d[v] - ref[v]) / ref[v]);
  return worst;
}

DegreeRoundResult degree_round(const WeightedGraph& h, DegreeRoundTrace* trace) {
  const auto side = h.two_coloring();
  if (!side) throw ArgumentError("degree_round: input graph has an odd cycle");
  const int n = h.num_vertices(), m = h.num_edges();
  Eigen::VectorXd w = h.weights();
  const Eigen::VectorXd u = 2.0 * w;
  std::vector<int> anchor(m), other(m);
  std::vector<char> live(m, 0);
  LinkCutForest forest(n, m);
  DegreeRoundResult res;

  auto kill = [&](int e, bool upper) {
    w[e] = upper ? u[e] : 0.0;
    if (live[e]) {
      forest.cut_edge(e, anchor[e], other[e]);
      live[e] = 0;
    }
  };

  for (int e = 0; e < m; ++e) {
    const Edge& ed = h.edge(e);
    if (ed.u == ed.v) throw ArgumentError("degree_round: self-loop");
    anchor[e] = (*side)[ed.u] == 0 ? ed.u : ed.v;
    other[e] = anchor[e] == ed.u ? ed.v : ed.u;
    if (!(w[e] > 0.0)) {
      w[e] = 0.0;
      continue;
    }
    const int a = anchor[e], b = other[e];
    if (!forest.connected(a, b)) {
      forest.link_edge(e, a, b, w[e], u[e]);
      live[e] = 1;
      continue;
    }
    // Root at the side-0 endpoint a. Path edges from a to b alternate +,−,…,+ and the closing
    // edge (traversed b → a) carries −1.
    forest.evert(a);
    const LinkCutForest::PathSummary s = forest.expose(b);
    const double pos = std::max(0.0, std::min({s.up[0].value, s.lo[1].value, w[e]}));
    const double neg = std::max(0.0, std::min({s.lo[0].value, s.up[1].value, u[e] - w[e]}));
    const int dir = pos <= neg ? 1 : -1;
    const double delta = dir > 0 ? pos : neg;

    // Which constraint binds: the closing edge or a path edge (and at which bound).
    int killed = e;
    bool at_upper = dir < 0;
    const double closing_slack = dir > 0 ? w[e] : u[e] - w[e];
    if (closing_slack > delta) {
      const LinkCutForest::PathMin& up = s.up[dir > 0 ? 0 : 1];
      const LinkCutForest::PathMin& lo = s.lo[dir > 0 ? 1 : 0];
      if (up.value <= lo.value) {
        killed = up.node - n;
        at_upper = true;
      } else {
        killed = lo.node - n;
        at_upper = false;
      }
    }

    if (trace) {
      CancelStep step;
      step.cycle = forest.path_edges(b);
      step.cycle.push_back({e, -1});
      step.direction = dir;
      step.delta = delta;
      step.killed = killed;
      step.killed_at_upper = at_upper;
      trace->steps.push_back(std::move(step));
    }
    forest.path_add(b, dir * delta);
    w[e] -= dir * delta;
    ++res.cancel_steps;

    if (killed == e) {
      kill(e, at_upper);
    } else {
      forest.set_weight(killed, at_upper ? u[killed] : 0.0);
      kill(killed, at_upper);
      if (w[e] <= 0.0 || w[e] >= u[e]) {
        kill(e, w[e] >= u[e]);
      } else {
        forest.link_edge(e, a, b, w[e], u[e]);
        live[e] = 1;
      }
    }
  }

  for (int e = 0; e < m; ++e)
    if (live[e]) w[e] = std::clamp(forest.weight(e), 0.0, u[e]);
  int zeros = 0, uppers = 0;
  for (int e = 0; e < m; ++e) {
    zeros += w[e] == 0.0;
    uppers += w[e] == u[e] && u[e] > 0.0;
  }
  if (uppers > zeros) {
    w = u - w;
    res.flipped = true;
    zeros = uppers;
  }
  if (trace) trace->flipped = res.flipped;
  res.w = std::move(w);
  res.zeros = zeros;
  res.degree_residual = relative_degree_residual(h, res.w);
  return res;
}

}  // namespace partcolor
