#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "partcolor/degree_preserving.hpp"
#include "partcolor/errors.hpp"
#include "partcolor/graph.hpp"
#include "partcolor/isotropize.hpp"
#include "partcolor/sparsify.hpp"
#include "partcolor/spencer.hpp"
#include "partcolor/text_io.hpp"

using namespace partcolor;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kCertified = 0;
constexpr int kError = 1;
constexpr int kBoundNotMet = 2;

struct RunConfig {
  std::string input;
  std::string format = "edges";
  double eps = 0.25;
  double ell = 4.0;
  double delta = 0.1;
  std::uint64_t seed = 1;
  std::string routing = "auto";
  std::string tree = "mst";
  std::string weights;
  double c_tight = 0.02;
  double c_set = -1.0;  // < 0 → module default
  double c_sparse = 64.0;
  double c_final = 96.0;
  double c_k = 12.0;
  int retries = 4;
  long long game_iterations = -1;
  int fw_iterations = 200;
  int fw_iters = 0;
  double fw_mu_scale = 1.0;
  int audit_stride = 0;
  std::string out;
  std::string summary;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open input file '" + path + "'");
  return in;
}

WeightedGraph load_graph(const RunConfig& rc) {
  std::ifstream in = open_input(rc.input);
  if (rc.format == "edges") return read_edge_list(in);
  if (rc.format == "coo") return read_coo(in);
  throw ArgumentError("unknown graph format '" + rc.format + "' (expected edges or coo)");
}

// Lines `edge_index weight` with absolute output weights; edges not listed get weight 0.
// Returns the multiplier w_e / w_G,e per edge.
Eigen::VectorXd load_weights(const std::string& path, const WeightedGraph& g) {
  std::ifstream in = open_input(path);
  text::LineReader reader(in);
  std::vector<std::string_view> tok;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(g.num_edges());
  while (reader.next(tok)) {
    if (tok.size() != 2) reader.fail("expected `edge_index weight`");
    const long long e = reader.to_int(tok[0]);
    if (e < 0 || e >= g.num_edges()) reader.fail("edge index " + std::to_string(e) + " out of range");
    const double v = reader.to_double(tok[1]);
    if (!(v >= 0.0)) reader.fail("weights must be nonnegative");
    w[e] = v / g.edge(static_cast<int>(e)).w;
  }
  return w;
}

SparsifyConfig sparsify_config(const RunConfig& rc) {
  SparsifyConfig c;
  c.c_tight = rc.c_tight;
  if (rc.c_set >= 0.0) c.c_set = rc.c_set;
  c.c_sparse = rc.c_sparse;
  c.c_final = rc.c_final;
  c.c_k = rc.c_k;
  c.retries = rc.retries;
  c.fw.iterations = rc.fw_iters;
  c.fw.mu_scale = rc.fw_mu_scale;
  c.fw.audit_stride = rc.audit_stride;
  return c;
}

Json config_json(const std::string& command, const RunConfig& rc) {
  Json j;
  j["command"] = command;
  j["input"] = rc.input;
  j["format"] = rc.format;
  j["seed"] = rc.seed;
  j["delta"] = rc.delta;
  j["c_tight"] = rc.c_tight;
  if (command == "spencer") {
    const SpencerConfig d;
    j["c_set"] = rc.c_set >= 0.0 ? rc.c_set : d.c_set;
    j["game_iterations"] = rc.game_iterations >= 0 ? rc.game_iterations : d.game.max_iterations;
    return j;
  }
  j["eps"] = rc.eps;
  const SparsifyConfig s = sparsify_config(rc);
  j["c_set"] = s.c_set;
  j["c_sparse"] = s.c_sparse;
  j["c_final"] = s.c_final;
  j["c_k"] = s.c_k;
  j["retries"] = s.retries;
  j["fw_iters"] = s.fw.iterations;
  j["fw_mu_scale"] = s.fw.mu_scale;
  j["solver_audit_stride"] = s.fw.audit_stride;
  if (command == "ultrasparsify") {
    j["ell"] = rc.ell;
    j["tree"] = rc.tree;
  }
  if (command == "degree-sparsify") {
    j["routing"] = rc.routing;
    j["fw_iterations"] = rc.fw_iterations;
  }
  if (command == "certify") j["weights"] = rc.weights.empty() ? "ones" : rc.weights;
  return j;
}

Json phases_json(const std::vector<PhaseReport>& log) {
  Json arr = Json::array();
  for (const PhaseReport& p : log) {
    Json j;
    j["outer"] = p.outer;
    j["phase"] = p.phase;
    j["support_before"] = p.support_before;
    j["support_after"] = p.support_after;
    j["near_tight"] = p.near_tight;
    j["attempts"] = p.attempts;
    j["rho"] = p.rho;
    j["beta"] = p.beta;
    j["solver_calls"] = p.solver_calls;
    j["exit"] = p.exit;
    arr.push_back(j);
  }
  return arr;
}

Json sparsifier_json(const SparsifierResult& r, std::uint64_t seed) {
  Json j;
  j["n"] = r.n;
  j["m"] = r.m;
  j["nnz"] = r.nnz;
  j["seed"] = seed;
  j["eps_target"] = r.eps_target;
  j["lambda_min"] = r.lambda_min;
  j["lambda_max"] = r.lambda_max;
  j["phases"] = r.phases;
  j["phase_log"] = phases_json(r.phase_log);
  j["diagnostics"] = r.diagnostics;
  return j;
}

void write_output_graph(const std::string& path, const WeightedGraph& g, const Eigen::VectorXd& w) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot open output file '" + path + "'");
  for (int e = 0; e < g.num_edges(); ++e) {
    if (w[e] == 0.0) continue;
    out << e << ' ' << text::format_double(w[e] * g.edge(e).w) << '\n';
  }
}

int run_sparsify(const RunConfig& rc, Json& summary) {
  const WeightedGraph g = load_graph(rc);
  GaussianSource rng(rc.seed);
  const SparsifierResult r = graph_sparsify(g, rc.eps, rc.delta, rng, sparsify_config(rc));
  write_output_graph(rc.out, g, r.weights);
  summary["result"] = sparsifier_json(r, rc.seed);
  summary["certified"] = r.certified;
  return r.certified ? kCertified : kBoundNotMet;
}

int run_ultrasparsify(const RunConfig& rc, Json& summary) {
  if (!(rc.ell >= 1.0)) throw ArgumentError("--ell must be at least 1");
  const WeightedGraph g = load_graph(rc);
  GaussianSource rng(rc.seed);
  const SparsifierResult r = ultrasparsify(g, rc.ell, tree_builder_by_name(rc.tree), rng, sparsify_config(rc));
  write_output_graph(rc.out, g, r.weights);
  Json j = sparsifier_json(r, rc.seed);
  j["tree_edges"] = r.tree_edges;
  j["sigma"] = r.sigma;
  j["kappa"] = r.kappa;
  j["kappa_measured"] = r.kappa_measured;
  j["trace_budget"] = r.trace_budget;
  j["edge_bound"] = g.num_vertices() - 1 + rc.c_final * g.num_vertices() / rc.ell;
  summary["result"] = j;
  summary["certified"] = r.certified;
  return r.certified ? kCertified : kBoundNotMet;
}

int run_degree(const RunConfig& rc, Json& summary) {
  const WeightedGraph g = load_graph(rc);
  DegreeConfig cfg;
  cfg.base = sparsify_config(rc);
  cfg.fw_iterations = rc.fw_iterations;
  const RoutingKind kind =
      rc.routing == "auto" ? default_routing(g.num_edges(), cfg) : parse_routing_kind(rc.routing);
  GaussianSource rng(rc.seed);
  const DegreePreservingResult r = degree_preserving_sparsify(g, rc.eps, rc.delta, kind, rng, cfg);
  write_output_graph(rc.out, g, r.result.weights);
  Json j = sparsifier_json(r.result, rc.seed);
  j["routing"] = to_string(kind);
  j["max_degree_residual"] = r.max_degree_residual;
  Json phases = Json::array();
  for (const DegreePhaseReport& p : r.phase_log) {
    Json q;
    q["phase"] = p.phase;
    q["crossing"] = p.crossing;
    q["near_tight"] = p.near_tight;
    q["zeroed"] = p.zeroed;
    q["alpha"] = p.alpha;
    q["rounding_norm"] = p.rounding_norm;
    q["rounding_bound"] = p.rounding_bound;
    phases.push_back(q);
  }
  j["degree_phases"] = phases;
  summary["result"] = j;
  summary["certified"] = r.result.certified;
  return r.result.certified ? kCertified : kBoundNotMet;
}

int run_spencer(const RunConfig& rc, Json& summary) {
  std::ifstream in = open_input(rc.input);
  const SetSystem s = read_set_system(in);
  SpencerConfig cfg;
  cfg.c_tight = rc.c_tight;
  if (rc.c_set >= 0.0) cfg.c_set = rc.c_set;
  if (rc.game_iterations >= 0) cfg.game.max_iterations = rc.game_iterations;
  GaussianSource rng(rc.seed);
  const SpencerResult r = spencer_color(s, rng, cfg);
  if (!rc.out.empty()) {
    std::ofstream out(rc.out);
    if (!out) throw ArgumentError("cannot open output file '" + rc.out + "'");
    for (Eigen::Index i = 0; i < r.x.size(); ++i) out << static_cast<int>(r.x[i]) << '\n';
  }
  const int n = s.num_elements();
  const double bound = 12.0 * std::sqrt(static_cast<double>(n));
  Json j;
  j["m"] = s.num_sets();
  j["n"] = n;
  j["seed"] = rc.seed;
  j["disc_inf"] = r.disc;
  j["bound"] = bound;
  j["rounds"] = static_cast<int>(r.rounds.size());
  j["exhaustive_tail"] = r.exhaustive_tail;
  j["ledger_error"] = r.ledger_error;
  j["diagnostics"] = r.diagnostics;
  summary["result"] = j;
  const bool ok = !r.failed && r.disc <= bound;
  summary["certified"] = ok;
  return ok ? kCertified : kBoundNotMet;
}

int run_certify(const RunConfig& rc, Json& summary) {
  const WeightedGraph g = load_graph(rc);
  const Eigen::VectorXd w =
      rc.weights.empty() ? Eigen::VectorXd::Ones(g.num_edges()) : load_weights(rc.weights, g);
  const SandwichCertificate c = certify_sandwich(g, w, rc.eps);
  Json j;
  j["n"] = g.num_vertices();
  j["m"] = g.num_edges();
  j["nnz"] = count_nonzero(w);
  j["lambda_min"] = c.lambda_min;
  j["lambda_max"] = c.lambda_max;
  summary["result"] = j;
  summary["certified"] = c.ok;
  return c.ok ? kCertified : kBoundNotMet;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partial coloring sparsifiers and discrepancy minimization"};
  app.require_subcommand(1);
  RunConfig rc;

  auto common = [&rc](CLI::App* sub, bool graph) {
    sub->add_option("input", rc.input, "input file")->required();
    sub->add_option("--seed", rc.seed, "random seed")->capture_default_str();
    sub->add_option("--delta", rc.delta, "failure probability")->capture_default_str()->check(CLI::Range(1e-12, 0.999999));
    sub->add_option("--c-tight", rc.c_tight, "near-tight fraction constant")->capture_default_str();
    sub->add_option("--c-set", rc.c_set, "body radius constant (default: module default)");
    sub->add_option("--out", rc.out, "output path (graph: `edge_index weight` per kept edge; spencer: one sign per line)");
    sub->add_option("--summary", rc.summary, "JSON summary path (default: stdout)");
    if (graph) {
      sub->add_option("--format", rc.format, "graph format: edges or coo")->capture_default_str();
      sub->add_option("--eps", rc.eps, "accuracy")->capture_default_str()->check(CLI::Range(1e-9, 1.0 - 1e-9));
      sub->add_option("--c-sparse", rc.c_sparse, "sparsity target constant")->capture_default_str();
      sub->add_option("--c-final", rc.c_final, "certified edge bound constant")->capture_default_str();
      sub->add_option("--c-k", rc.c_k, "warm-start oversampling constant")->capture_default_str();
      sub->add_option("--retries", rc.retries, "fresh anchors per phase")->capture_default_str();
      sub->add_option("--fw-iters", rc.fw_iters, "Frank-Wolfe iterations (0: from the accuracy target)")->capture_default_str();
      sub->add_option("--fw-mu-scale", rc.fw_mu_scale, "smoothing multiplier")->capture_default_str();
      sub->add_option("--solver-audit-stride", rc.audit_stride, "audit stride (0: N/32)")->capture_default_str();
    }
  };

  CLI::App* sparsify = app.add_subcommand("sparsify", "linear-sized spectral sparsifier");
  common(sparsify, true);
  CLI::App* ultra = app.add_subcommand("ultrasparsify", "tree plus O(n/ell) edges");
  common(ultra, true);
  ultra->add_option("--ell", rc.ell, "sparsity ratio")->capture_default_str();
  ultra->add_option("--tree", rc.tree, "spanning tree: mst or bfs")->capture_default_str();
  CLI::App* degree = app.add_subcommand("degree-sparsify", "sparsifier that keeps every weighted degree");
  common(degree, true);
  degree->add_option("--routing", rc.routing, "auto, electric or tree")->capture_default_str();
  degree->add_option("--fw-iterations", rc.fw_iterations, "Frank-Wolfe cap per solve")->capture_default_str();
  CLI::App* spencer = app.add_subcommand("spencer", "low-discrepancy coloring of a set system");
  common(spencer, false);
  spencer->add_option("--game-iterations", rc.game_iterations, "mirror-descent iteration cap (0: uncapped)");
  CLI::App* certify = app.add_subcommand("certify", "spectral sandwich check of reweighted edges");
  common(certify, true);
  certify->add_option("--weights", rc.weights, "`edge_index weight` lines, e.g. a sparsify --out file (default: input weights)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  Json summary;
  summary["schema"] = 1;
  summary["config"] = config_json(command, rc);
  int code = kError;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (command == "sparsify") code = run_sparsify(rc, summary);
    else if (command == "ultrasparsify") code = run_ultrasparsify(rc, summary);
    else if (command == "degree-sparsify") code = run_degree(rc, summary);
    else if (command == "spencer") code = run_spencer(rc, summary);
    else code = run_certify(rc, summary);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    summary["error"] = e.what();
    summary["certified"] = false;
    code = kError;
  }
  summary["exit_code"] = code;
  summary["runtime_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  const std::string text = summary.dump(2) + "\n";
  if (rc.summary.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(rc.summary);
    if (!out) {
      std::cerr << "error: cannot open summary file '" << rc.summary << "'\n";
      return kError;
    }
    out << text;
  }
  return code;
}
