#include "partcolor/degree_preserving.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "partcolor/boxspec.hpp"
#include "partcolor/degree_round.hpp"
#include "partcolor/errors.hpp"
#include "partcolor/isotropize.hpp"

namespace partcolor {

RoutingKind default_routing(int edges, const DegreeConfig& config) {
  return edges <= config.electric_edge_limit ? RoutingKind::Electric : RoutingKind::Tree;
}

DegreePreservingResult degree_preserving_sparsify(const WeightedGraph& g, double eps, double delta,
                                                  RoutingKind routing, GaussianSource& rng,
                                                  const DegreeConfig& config) {
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("degree_preserving_sparsify: eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("degree_preserving_sparsify: delta must lie in (0,1)");
  const SparsifyConfig& base = config.base;
  const int n = g.num_vertices(), m = g.num_edges();
  DegreePreservingResult out;
  SparsifierResult& res = out.result;
  res.n = n;
  res.m = m;
  res.eps_target = eps;
  res.weights = Eigen::VectorXd::Ones(m);
  out.degrees_in = g.weighted_degrees();
  const Eigen::VectorXd wg = g.weights();

  const double target = base.c_sparse * n / (eps * eps);
  if (m > target) {
    const OperatorFamily family = isotropize(g, base.eps_iso, true);
    const double budget = std::max(1.0, family.traces().sum());
    const double shrink = -std::log(1.0 - base.c_tight / 4.0);
    const int plan = base.phases > 0 ? base.phases
                                     : std::max(1, static_cast<int>(std::ceil(std::log(m / target) / shrink)));
    const int phase_cap = 4 * plan + 16;
    const int bip_cap = config.bipartition_attempts > 0
                            ? config.bipartition_attempts
                            : 8 * static_cast<int>(std::ceil(std::log2(std::max(2, n)))) + 8;
    FrameworkConfig fcfg = base.framework;
    fcfg.c_tight = base.c_tight;
    Eigen::VectorXd& w = res.weights;
    int stall = 0;

    for (int k = 1;; ++k) {
      std::vector<int> active;
      for (int e = 0; e < m; ++e)
        if (w[e] > 0.0) active.push_back(e);
      const int mk = static_cast<int>(active.size());
      if (mk <= target) break;
      if (k > phase_cap) {
        res.diagnostics.push_back("stopped after " + std::to_string(phase_cap) + " phases with support " +
                                  std::to_string(mk));
        break;
      }
      GaussianSource phase_rng = rng.split(static_cast<std::uint64_t>(k));

      // Vertex bipartition with at least a third of the live edges crossing.
      std::vector<int> side(n), crossing;
      int bip_attempts = 0;
      GaussianSource bip_rng = phase_rng.split(0xb1);
      while (true) {
        if (bip_attempts == bip_cap) {
          std::ostringstream os;
          os << "phase " << k << ": no bipartition with " << (mk + 2) / 3 << " crossing edges in " << bip_cap
             << " attempts";
          throw PhaseError(os.str());
        }
        ++bip_attempts;
        for (int v = 0; v < n; ++v) side[v] = bip_rng.coin() ? 1 : 0;
        crossing.clear();
        for (int e : active)
          if (side[g.edge(e).u] != side[g.edge(e).v]) crossing.push_back(e);
        if (3 * static_cast<long long>(crossing.size()) >= mk) break;
      }
      const int mc = static_cast<int>(crossing.size());

      const int left = plan - k + 1;
      const double second = left >= 1 ? eps / (left * std::pow(std::log(left + 1.0), 2)) : eps;
      const double rho = std::max(2.0 * base.c_set * std::sqrt(budget / mk), second);
      const double beta = std::min(rho, config.beta_cap);

      // Crossing edges oriented from side 0 to side 1, so Bᵀ-neutral updates are also
      // neutral for unsigned degrees.
      Eigen::VectorXd wk(mc);
      std::vector<Edge> oriented(mc);
      for (int j = 0; j < mc; ++j) {
        const Edge& ed = g.edge(crossing[j]);
        wk[j] = w[crossing[j]];
        oriented[j] = side[ed.u] == 0 ? Edge{ed.u, ed.v, wk[j] * ed.w} : Edge{ed.v, ed.u, wk[j] * ed.w};
      }
      const WeightedGraph hk(n, oriented);
      const OperatorFamily fam_k = family.reweighted(crossing, wk);
      const ObliviousRouting router(hk, routing);
      const CirculationOracle oracle(router, config.circulation);
      const LinearOracle linopt = oracle.as_linear_oracle();
      FWConfig fw = base.fw;
      fw.linopt_accuracy = config.circulation.accuracy;
      fw.max_iterations = std::min(fw.max_iterations, config.fw_iterations);
      FlamSolverStats stats;
      RegularizedSolver solver = make_flam_solver(fam_k, FlamBackend::FrankWolfe, fw, base.dual, &linopt, &stats);
      const double theta = exact_opnorm(fam_k, Eigen::VectorXd::Ones(mc));
      DiscrepancyBody body = make_opnorm_body(fam_k, rho, theta, true);
      const int needed = static_cast<int>(std::ceil(base.c_tight / 4.0 * mc));

      PartialColoring best;
      bool accepted = false;
      int attempts = 0;
      double beta_used = beta;
      for (int a = 0; a <= base.retries && !accepted; ++a) {
        beta_used = a < base.retries ? beta : beta / 2.0;
        GaussianSource attempt_rng = phase_rng.split(static_cast<std::uint64_t>(a));
        PartialColoring pc = two_sided_partial_color(body, beta_used, solver, attempt_rng, fcfg);
        ++attempts;
        if (static_cast<int>(pc.near_tight.size()) >= needed) accepted = true;
        if (accepted || pc.near_tight.size() >= best.near_tight.size()) best = std::move(pc);
      }
      if (!accepted) {
        std::ostringstream os;
        os << "phase " << k << " failed after " << attempts << " attempts: crossing " << mc << ", rho " << rho
           << ", best near-tight count " << best.near_tight.size() << " < " << needed;
        throw PhaseError(os.str());
      }

      const Eigen::VectorXd& x = best.x;
      std::vector<char> in_s(mc, 0);
      for (int j : best.near_tight) in_s[j] = 1;
      // Round the near-tight edges at their post-coloring weights.
      std::vector<int> round_ids;
      std::vector<Edge> round_edges;
      for (int j = 0; j < mc; ++j) {
        const double h = wk[j] * (1.0 + x[j]) * g.edge(crossing[j]).w;
        if (in_s[j] && h > 0.0) {
          round_ids.push_back(j);
          round_edges.push_back({oriented[j].u, oriented[j].v, h});
        }
      }
      const DegreeRoundResult dr = degree_round(WeightedGraph(n, round_edges));
      Eigen::VectorXd x_tilde = x;
      for (int j = 0; j < mc; ++j) {
        if (in_s[j]) {
          w[crossing[j]] = 0.0;
          x_tilde[j] = -1.0;
        } else {
          w[crossing[j]] = std::max(0.0, wk[j] * (1.0 + x[j]));
        }
      }
      for (std::size_t r = 0; r < round_ids.size(); ++r) {
        const int j = round_ids[r];
        w[crossing[j]] = dr.w[r] / g.edge(crossing[j]).w;
        x_tilde[j] = w[crossing[j]] / wk[j] - 1.0;
      }

      DegreePhaseReport rep;
      rep.phase = k;
      rep.support_before = mk;
      rep.support_after = count_nonzero(w);
      rep.crossing = mc;
      rep.bipartition_attempts = bip_attempts;
      rep.near_tight = static_cast<int>(best.near_tight.size());
      rep.zeroed = mk - rep.support_after;
      rep.attempts = attempts;
      rep.rho = rho;
      rep.beta = beta_used;
      rep.alpha = router.alpha();
      rep.routing = to_string(routing);
      rep.rounding_norm = exact_opnorm(fam_k, x - x_tilde);
      rep.rounding_bound = rho * theta;
      rep.solver_calls = stats.calls;
      if (rep.rounding_norm > rep.rounding_bound * (1.0 + 1e-9))
        res.diagnostics.push_back("phase " + std::to_string(k) + ": rounding moved ‖A(x − x̃)‖ beyond ρ‖A(1)‖");
      for (const auto& d : best.diagnostics) res.diagnostics.push_back("phase " + std::to_string(k) + ": " + d);
      out.phase_log.push_back(rep);

      PhaseReport pr;
      pr.phase = k;
      pr.support_before = mk;
      pr.support_after = rep.support_after;
      pr.near_tight = rep.near_tight;
      pr.attempts = attempts;
      pr.rho = rho;
      pr.beta = beta_used;
      pr.norm_step = exact_opnorm(fam_k, x_tilde);
      pr.norm_u = exact_opnorm(family, w);
      pr.solver_calls = stats.calls;
      pr.exit = to_string(best.selected.exit);
      res.phase_log.push_back(pr);

      stall = rep.zeroed > 0 ? 0 : stall + 1;
      if (stall >= config.stall_limit) {
        res.diagnostics.push_back("no edges removed in " + std::to_string(stall) + " consecutive phases; stopping");
        break;
      }
    }
  }

  res.phases = static_cast<int>(out.phase_log.size());
  res.nnz = count_nonzero(res.weights);
  out.degrees_out = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < m; ++e) {
    const double we = res.weights[e] * wg[e];
    out.degrees_out[g.edge(e).u] += we;
    out.degrees_out[g.edge(e).v] += we;
  }
  for (int v = 0; v < n; ++v)
    if (out.degrees_in[v] > 0.0)
      out.max_degree_residual =
          std::max(out.max_degree_residual, std::abs(out.degrees_out[v] - out.degrees_in[v]) / out.degrees_in[v]);
  const SandwichCertificate cert = certify_sandwich(g, res.weights, eps);
  res.lambda_min = cert.lambda_min;
  res.lambda_max = cert.lambda_max;
  res.certified = cert.ok && res.nnz <= base.c_final * n / (eps * eps) && out.max_degree_residual <= 1e-8;
  return out;
}

}  // namespace partcolor
