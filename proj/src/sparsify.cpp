#include "partcolor/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "partcolor/errors.hpp"
#include "partcolor/isotropize.hpp"

namespace partcolor {

int count_nonzero(const Eigen::VectorXd& w) {
  int c = 0;
  for (int i = 0; i < w.size(); ++i) c += w[i] != 0.0;
  return c;
}

long long warm_start_draws(double trace, int n, double eps, double delta, double c_k) {
  const double k = c_k * (trace / (eps * eps)) * std::log(std::max(1, n) / delta);
  return std::max<long long>(1, static_cast<long long>(std::ceil(k)));
}

WarmStart leverage_warm_start(const OperatorFamily& family, double eps, double delta, GaussianSource& rng,
                              double c_k) {
  if (!(eps > 0.0)) throw ArgumentError("leverage_warm_start: eps must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("leverage_warm_start: delta must lie in (0,1)");
  const Eigen::VectorXd traces = family.traces();
  const double total = traces.sum();
  if (!(total > 0.0)) throw ArgumentError("leverage_warm_start: every atom has zero trace");
  WarmStart ws;
  ws.probabilities = traces / total;
  ws.draws = warm_start_draws(total, family.dim(), eps, delta, c_k);
  ws.sampled = true;
  std::vector<double> cumulative(traces.size());
  double acc = 0.0;
  for (int i = 0; i < traces.size(); ++i) cumulative[i] = acc += traces[i];
  std::vector<long long> count(traces.size(), 0);
  for (long long d = 0; d < ws.draws; ++d) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    int i = static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(), traces.size() - 1));
    while (traces[i] == 0.0 && i > 0) --i;  // guards u landing on a zero-width slot
    ++count[i];
  }
  ws.w = Eigen::VectorXd::Zero(traces.size());
  for (int i = 0; i < traces.size(); ++i)
    if (count[i]) ws.w[i] = static_cast<double>(count[i]) / (static_cast<double>(ws.draws) * ws.probabilities[i]);
  return ws;
}

namespace {

std::vector<int> support(const Eigen::VectorXd& w) {
  std::vector<int> s;
  for (int i = 0; i < w.size(); ++i)
    if (w[i] != 0.0) s.push_back(i);
  return s;
}

Eigen::VectorXd gather(const Eigen::VectorXd& w, const std::vector<int>& ids) {
  Eigen::VectorXd out(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) out[k] = w[ids[k]];
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

SparsePlusSmall sparse_plus_small(const OperatorFamily& family, double eps, double delta, GaussianSource& rng,
                                  const SparsifyConfig& config, double trace_budget) {
  if (!(eps > 0.0)) throw ArgumentError("sparse_plus_small: eps must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("sparse_plus_small: delta must lie in (0,1)");
  eps = std::min(eps, 0.999);
  const int m = family.size(), n = family.dim();
  const double budget = trace_budget > 0.0 ? trace_budget : std::max(1, n);
  const double target = config.c_sparse * budget / (eps * eps);

  SparsePlusSmall res;
  res.v = Eigen::VectorXd::Zero(m);
  res.w = Eigen::VectorXd::Ones(m);
  if (m <= target) {
    res.terminated_early = true;
    return res;
  }

  const double total_trace = family.traces().sum();
  const long long draws = warm_start_draws(total_trace, n, eps, delta, config.c_k);
  if (draws >= m) {
    res.diagnostics.push_back("warm start skipped: " + std::to_string(draws) + " draws for " + std::to_string(m) +
                              " atoms");
    res.warm.w = res.w;
    res.warm.draws = draws;
  } else {
    GaussianSource warm_rng = rng.split(0x3a3a);
    res.warm = leverage_warm_start(family, eps, delta, warm_rng, config.c_k);
    res.w = res.warm.w;
  }
  const int m0 = count_nonzero(res.w);
  if (m0 <= target) {
    res.terminated_early = true;
    return res;
  }

  const double shrink = -std::log(1.0 - config.c_tight / 4.0);
  const int plan = config.phases > 0 ? config.phases
                                     : std::max(1, static_cast<int>(std::ceil(std::log(m0 / target) / shrink)));
  res.planned_phases = plan;
  res.beta = config.beta > 0.0 ? config.beta : 1.0 / (20.0 * plan);
  FrameworkConfig fcfg = config.framework;
  fcfg.c_tight = config.c_tight;
  const int phase_cap = 4 * plan + 16;

  for (int k = 1;; ++k) {
    const std::vector<int> active = support(res.w);
    const int mk = static_cast<int>(active.size());
    if (mk <= target) break;
    if (k > phase_cap) {
      res.diagnostics.push_back("stopped after " + std::to_string(phase_cap) + " phases with support " +
                                std::to_string(mk) + " above the target " + num(target));
      break;
    }
    const int left = plan - k + 1;
    const double second = left >= 1 ? eps / (left * std::pow(std::log(left + 1.0), 2)) : eps;
    const double rho = std::max(2.0 * config.c_set * std::sqrt(budget / mk), second);

    OperatorFamily fam_k = family.reweighted(active, gather(res.w, active));
    const double theta = exact_opnorm(fam_k, Eigen::VectorXd::Ones(mk));
    DiscrepancyBody body = make_opnorm_body(fam_k, rho, theta);
    FlamSolverStats stats;
    RegularizedSolver solver = make_flam_solver(fam_k, config.backend, config.fw, config.dual, nullptr, &stats);
    const int needed = static_cast<int>(std::ceil(config.c_tight / 4.0 * mk));

    GaussianSource phase_rng = rng.split(static_cast<std::uint64_t>(k));
    PartialColoring best;
    bool accepted = false;
    int attempts = 0;
    double beta_used = res.beta;
    for (int a = 0; a <= config.retries && !accepted; ++a) {
      beta_used = a < config.retries ? res.beta : res.beta / 2.0;
      GaussianSource attempt_rng = phase_rng.split(static_cast<std::uint64_t>(a));
      PartialColoring pc = two_sided_partial_color(body, beta_used, solver, attempt_rng, fcfg);
      ++attempts;
      if (static_cast<int>(pc.near_tight.size()) >= needed) accepted = true;
      if (accepted || pc.near_tight.size() >= best.near_tight.size()) best = std::move(pc);
    }
    if (!accepted) {
      std::ostringstream os;
      os << "phase " << k << " failed after " << attempts << " attempts: support " << mk << ", rho " << rho
         << ", beta " << beta_used << ", best near-tight count " << best.near_tight.size() << " < " << needed;
      throw PhaseError(os.str());
    }

    const Eigen::VectorXd& x = best.x;
    double clamped = 0.0;
    std::vector<char> in_s(mk, 0);
    for (int idx : best.near_tight) in_s[idx] = 1;
    for (int j = 0; j < mk; ++j) {
      const int i = active[j];
      const double nw = res.w[i] * (1.0 + x[j]);
      if (nw < 0.0) clamped = std::max(clamped, -nw);
      if (in_s[j]) {
        res.v[i] += std::max(0.0, nw);
        res.w[i] = 0.0;
      } else {
        res.w[i] = std::max(0.0, nw);
      }
    }
    if (clamped > 0.0) res.diagnostics.push_back("phase " + std::to_string(k) + " clamped weights by " + num(clamped));

    PhaseReport rep;
    rep.phase = k;
    rep.support_before = mk;
    rep.support_after = count_nonzero(res.w);
    rep.near_tight = static_cast<int>(best.near_tight.size());
    rep.attempts = attempts;
    rep.rho = rho;
    rep.beta = beta_used;
    rep.norm_step = exact_opnorm(fam_k, x);
    rep.norm_u = exact_opnorm(family, res.v + res.w);
    rep.solver_calls = stats.calls;
    rep.exit = to_string(best.selected.exit);
    if (rep.norm_u > 2.0) res.diagnostics.push_back("phase " + std::to_string(k) + ": ‖M(u)‖ = " + num(rep.norm_u) + " > 2");
    if (stats.unconverged)
      res.diagnostics.push_back("phase " + std::to_string(k) + ": " + std::to_string(stats.unconverged) + " of " +
                                std::to_string(stats.calls) + " solver calls stopped at their iteration cap");
    for (const auto& d : best.diagnostics) res.diagnostics.push_back("phase " + std::to_string(k) + ": " + d);
    res.rho_sum += rho;
    res.phases.push_back(rep);
  }
  res.norm_v = exact_opnorm(family, res.v);
  if (res.norm_v > 0.1) res.diagnostics.push_back("‖M(v)‖ = " + num(res.norm_v) + " exceeds 1/10");
  return res;
}

LinearSized linear_sized_sparsify(const OperatorFamily& family, double eps, double delta, GaussianSource& rng,
                                  const SparsifyConfig& config, double trace_budget) {
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("linear_sized_sparsify: eps must lie in (0,1)");
  const int m = family.size();
  LinearSized res;
  const int outer = std::max(1, static_cast<int>(std::ceil(std::log10(1.0 / eps))));
  double c = 0.1;
  while (eps * std::pow(1.0 + c, outer) >= 1.0) c /= 2.0;
  Eigen::VectorXd vbar = Eigen::VectorXd::Ones(m);
  res.w = Eigen::VectorXd::Zero(m);
  for (int k = 1; k <= outer; ++k) {
    const std::vector<int> s = support(vbar);
    if (s.empty()) break;
    const double eps_k = eps * std::pow(1.0 + c, k);
    res.eps_schedule.push_back(eps_k);
    OperatorFamily fam = family.reweighted(s, gather(vbar, s));
    GaussianSource level_rng = rng.split(0x100 + static_cast<std::uint64_t>(k));
    SparsePlusSmall sps = sparse_plus_small(fam, eps_k, delta / outer, level_rng, config, trace_budget);
    const double scale = std::pow(10.0, -(k - 1));
    vbar.setZero();
    for (std::size_t j = 0; j < s.size(); ++j) {
      vbar[s[j]] = 10.0 * sps.v[j];
      res.w[s[j]] += scale * sps.w[j];
    }
    for (auto rep : sps.phases) {
      rep.outer = k;
      res.phases.push_back(rep);
    }
    for (const auto& d : sps.diagnostics) res.diagnostics.push_back("level " + std::to_string(k) + ": " + d);
    res.outer_phases = k;
  }
  return res;
}

SparsifierResult graph_sparsify(const WeightedGraph& g, double eps, double delta, GaussianSource& rng,
                                const SparsifyConfig& config) {
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("graph_sparsify: eps must lie in (0,1)");
  SparsifierResult res;
  res.n = g.num_vertices();
  res.m = g.num_edges();
  res.eps_target = eps;
  if (g.num_edges() == 0) {
    res.certified = true;
    res.lambda_min = res.lambda_max = 1.0;
    return res;
  }
  OperatorFamily fam = isotropize(g, config.eps_iso, true);
  LinearSized lin = linear_sized_sparsify(fam, eps / config.core_eps_divisor, delta, rng, config);
  res.weights = lin.w;
  res.nnz = count_nonzero(lin.w);
  res.phases = static_cast<int>(lin.phases.size());
  res.phase_log = lin.phases;
  res.diagnostics = lin.diagnostics;
  SandwichCertificate cert = certify_sandwich(g, lin.w, eps);
  res.lambda_min = cert.lambda_min;
  res.lambda_max = cert.lambda_max;
  res.certified = cert.ok && res.nnz <= config.c_final * res.n / (eps * eps);
  return res;
}

TreeBuilder tree_builder_by_name(const std::string& name) {
  if (name == "mst") return maximum_weight_spanning_tree;
  if (name == "bfs") return bfs_spanning_tree;
  throw ArgumentError("unknown tree builder '" + name + "' (expected mst or bfs)");
}

SparsifierResult ultrasparsify(const WeightedGraph& g, double ell, const TreeBuilder& tree_builder,
                               GaussianSource& rng, const SparsifyConfig& config) {
  if (!(ell >= 1.0)) throw ArgumentError("ultrasparsify: ell must be at least 1");
  const int n = g.num_vertices();
  SparsifierResult res;
  res.n = n;
  res.m = g.num_edges();
  res.eps_target = config.ultra_eps;
  if (g.num_edges() == 0) {
    res.certified = true;
    return res;
  }

  // m = O(n) preprocessing at constant accuracy.
  GaussianSource pre_rng = rng.split(1);
  SparsifierResult pre = graph_sparsify(g, config.ultra_pre_eps, 0.1, pre_rng, config);
  std::vector<int> kept;
  std::vector<double> kept_w;
  for (int e = 0; e < g.num_edges(); ++e)
    if (pre.weights[e] > 0.0) {
      kept.push_back(e);
      kept_w.push_back(pre.weights[e] * g.edge(e).w);
    }
  WeightedGraph g1 = g.subgraph(kept, Eigen::Map<Eigen::VectorXd>(kept_w.data(), kept_w.size()));
  for (const auto& d : pre.diagnostics) res.diagnostics.push_back("preprocess: " + d);

  const std::vector<int> tree = tree_builder(g1);
  res.tree_edges = static_cast<int>(tree.size());
  res.sigma = tree_distortion(g1, tree);  // throws when the tree does not span
  res.kappa = std::max(1.0, res.sigma * ell / n);

  // Reference Laplacian κL_H + L_G1 as a graph with the tree edges doubled.
  std::vector<Edge> ref_edges = g1.edges();
  for (int e : tree) {
    Edge ed = g1.edge(e);
    ed.w *= res.kappa;
    ref_edges.push_back(ed);
  }
  WeightedGraph reference(n, std::move(ref_edges));
  OperatorFamily fam = edge_family(isotropic_factor(reference, config.eps_iso), g1);
  res.trace_budget = fam.traces().sum();

  GaussianSource core_rng = rng.split(2);
  LinearSized lin = linear_sized_sparsify(fam, config.ultra_eps, 0.1, core_rng, config, res.trace_budget);
  res.phases = static_cast<int>(lin.phases.size());
  res.phase_log = lin.phases;
  for (const auto& d : lin.diagnostics) res.diagnostics.push_back(d);

  Eigen::VectorXd mult1 = lin.w;
  for (int e : tree) mult1[e] += res.kappa;
  res.weights = Eigen::VectorXd::Zero(g.num_edges());
  for (std::size_t k = 0; k < kept.size(); ++k) res.weights[kept[k]] = pre.weights[kept[k]] * mult1[k];

  SandwichCertificate raw = certify_sandwich(g, res.weights, 0.0);
  const double hi = raw.lambda_max, lo = raw.lambda_min;
  if (!(hi > 0.0)) throw ContractViolation("ultrasparsify: output graph is empty");
  res.weights /= hi;
  res.lambda_min = lo / hi;
  res.lambda_max = 1.0;
  res.kappa_measured = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  res.nnz = count_nonzero(res.weights);
  res.certified = std::isfinite(res.kappa_measured) && res.nnz <= (n - 1) + config.c_final * n / ell;
  return res;
}

}  // namespace partcolor
