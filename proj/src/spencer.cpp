#include "partcolor/spencer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "partcolor/errors.hpp"
#include "partcolor/text_io.hpp"

namespace partcolor {

SetSystem::SetSystem(kernels::Csr a) : a_(std::move(a)) {
  at_ = a_.transpose();
  for (int i = 0; i < a_.rows; ++i) {
    double sq = 0.0, l1 = 0.0;
    for (int k = a_.ptr[i]; k < a_.ptr[i + 1]; ++k) {
      sq += a_.val[k] * a_.val[k];
      l1 += std::abs(a_.val[k]);
      max_abs_ = std::max(max_abs_, std::abs(a_.val[k]));
    }
    row_norm_ = std::max(row_norm_, std::sqrt(sq));
    row_l1_ = std::max(row_l1_, l1);
  }
  for (int j = 0; j < at_.rows; ++j) col_nnz_ = std::max(col_nnz_, at_.ptr[j + 1] - at_.ptr[j]);
  if (max_abs_ > 1.0) throw ArgumentError("set system entries must lie in [-1, 1]");
}

SetSystem SetSystem::from_dense(const Eigen::MatrixXd& a) {
  std::vector<kernels::Csr::Entry> entries;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0) entries.push_back({i, j, a(i, j)});
  return SetSystem(kernels::Csr::from_entries(static_cast<int>(a.rows()), static_cast<int>(a.cols()), entries));
}

Eigen::VectorXd SetSystem::apply(const Eigen::VectorXd& x) const {
  if (x.size() != num_elements()) throw ArgumentError("set system: coloring has wrong length");
  Eigen::VectorXd y(num_sets());
  kernels::spmv(a_, x.data(), y.data());
  return y;
}

double SetSystem::discrepancy(const Eigen::VectorXd& x) const {
  return num_sets() ? apply(x).lpNorm<Eigen::Infinity>() : 0.0;
}

SetSystem SetSystem::restrict_columns(const std::vector<int>& keep) const {
  std::vector<kernels::Csr::Entry> entries;
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const int j = keep[c];
    for (int k = at_.ptr[j]; k < at_.ptr[j + 1]; ++k) entries.push_back({at_.idx[k], static_cast<int>(c), at_.val[k]});
  }
  return SetSystem(kernels::Csr::from_entries(num_sets(), static_cast<int>(keep.size()), std::move(entries)));
}

Eigen::MatrixXd SetSystem::dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(num_sets(), num_elements());
  for (int i = 0; i < a_.rows; ++i)
    for (int k = a_.ptr[i]; k < a_.ptr[i + 1]; ++k) d(i, a_.idx[k]) = a_.val[k];
  return d;
}

SetSystem read_set_system(std::istream& in) {
  text::LineReader reader(in);
  std::vector<std::string_view> tok;
  if (!reader.next(tok)) throw ParseError("missing header 'm n nnz'", reader.line());
  if (tok.size() != 3) reader.fail("header must be 'm n nnz'");
  const long long m = reader.to_int(tok[0]), n = reader.to_int(tok[1]), nnz = reader.to_int(tok[2]);
  if (m < 0 || n < 0 || nnz < 0) reader.fail("negative size in header");
  std::vector<kernels::Csr::Entry> entries;
  entries.reserve(nnz);
  for (long long k = 0; k < nnz; ++k) {
    if (!reader.next(tok)) throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(k),
                                            reader.line() + 1);
    if (tok.size() != 3) reader.fail("entry must be 'i j v'");
    const long long i = reader.to_int(tok[0]), j = reader.to_int(tok[1]);
    const double v = reader.to_double(tok[2]);
    if (i < 0 || i >= m || j < 0 || j >= n) reader.fail("entry index out of range");
    if (!(std::abs(v) <= 1.0)) reader.fail("entry outside [-1, 1]");
    entries.push_back({static_cast<int>(i), static_cast<int>(j), v});
  }
  if (reader.next(tok)) reader.fail("trailing data after " + std::to_string(nnz) + " entries");
  return SetSystem(kernels::Csr::from_entries(static_cast<int>(m), static_cast<int>(n), std::move(entries)));
}

void write_set_system(std::ostream& out, const SetSystem& s) {
  const kernels::Csr& a = s.rows();
  out << a.rows << ' ' << a.cols << ' ' << a.nnz() << '\n';
  for (int i = 0; i < a.rows; ++i)
    for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k)
      out << i << ' ' << a.idx[k] << ' ' << text::format_double(a.val[k]) << '\n';
}

SetSystem random_set_system(int m, int n, double p, GaussianSource& rng) {
  std::vector<kernels::Csr::Entry> entries;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (rng.uniform() < p) entries.push_back({i, j, 1.0});
  return SetSystem(kernels::Csr::from_entries(m, n, std::move(entries)));
}

double spencer_radius(int m, int n, double c_set) {
  if (m < 1 || n < 1) throw ArgumentError("spencer_radius: m and n must be positive");
  return c_set * std::sqrt(8.0 * n * std::log(static_cast<double>(m) / n + 2.0));
}

double l2l1_value(const SetSystem& s, const Eigen::VectorXd& v, double lambda, const Eigen::VectorXd& x) {
  return s.discrepancy(x) + lambda * (x - v).squaredNorm();
}

namespace {

// Complete binary tree of partial sums over nonnegative leaves.
class SumTree {
 public:
  explicit SumTree(int leaves) {
    size_ = 1;
    while (size_ < leaves) size_ *= 2;
    node_.assign(2 * size_, 0.0);
  }
  void set(int i, double v) {
    int k = i + size_;
    node_[k] = v;
    for (k /= 2; k >= 1; k /= 2) node_[k] = node_[2 * k] + node_[2 * k + 1];
  }
  void rebuild(const std::vector<double>& leaves) {
    std::fill(node_.begin(), node_.end(), 0.0);
    for (std::size_t i = 0; i < leaves.size(); ++i) node_[size_ + i] = leaves[i];
    for (int k = size_ - 1; k >= 1; --k) node_[k] = node_[2 * k] + node_[2 * k + 1];
  }
  double total() const { return node_[1]; }
  int sample(double u) const {
    int k = 1;
    while (k < size_) {
      if (u < node_[2 * k] || node_[2 * k + 1] <= 0.0) {
        k = 2 * k;
      } else {
        u -= node_[2 * k];
        k = 2 * k + 1;
      }
    }
    return k - size_;
  }

 private:
  int size_;
  std::vector<double> node_;
};

struct GameRun {
  Eigen::VectorXd x;
  double value = 0.0;
};

GameRun run_game(const SetSystem& s, const Eigen::VectorXd& v, double lambda, long long iterations,
                 GaussianSource& rng, const Eigen::VectorXd* warm_start) {
  const int m = s.num_sets(), n = s.num_elements();
  const kernels::Csr& rows = s.rows();
  const kernels::Csr& cols = s.columns();
  Eigen::VectorXd x = warm_start ? warm_start->cwiseMax(-1.0).cwiseMin(1.0).eval() : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd xbar = Eigen::VectorXd::Zero(n);

  double colmax2 = 0.0;
  for (int j = 0; j < n; ++j) {
    double c = 0.0;
    for (int k = cols.ptr[j]; k < cols.ptr[j + 1]; ++k) c = std::max(c, cols.val[k] * cols.val[k]);
    colmax2 += c;
  }
  const double t_sqrt = std::sqrt(static_cast<double>(iterations));
  const double gx = s.max_row_norm() + 2.0 * lambda * (std::sqrt(static_cast<double>(n)) + v.norm());
  const double gy = std::sqrt(n * std::max(colmax2, 1e-300));
  const double eta_x = 2.0 * std::sqrt(static_cast<double>(n)) / (gx * t_sqrt);
  const double eta_y = std::sqrt(std::log(std::max(2.0, 2.0 * m))) / (gy * t_sqrt);

  // Simplex weights y_k ∝ exp(η_y Σ ĝ_k), kept as scaled leaves of a sum tree.
  std::vector<double> leaf(2 * m, 1.0);
  SumTree tree(2 * m);
  tree.rebuild(leaf);
  auto renormalize = [&] {
    const double top = *std::max_element(leaf.begin(), leaf.end());
    for (double& l : leaf) l /= top;
    tree.rebuild(leaf);
  };
  Eigen::VectorXd grad(n);

  for (long long t = 0; t < iterations; ++t) {
    const int i_signed = tree.sample(rng.uniform() * tree.total());
    const int i = i_signed < m ? i_signed : i_signed - m;
    const double sgn = i_signed < m ? 1.0 : -1.0;

    // Element j ∝ x_j² and the importance-weighted column estimate of [A; −A]x.
    const double xx = x.squaredNorm();
    int j = -1;
    if (xx > 0.0) {
      double u = rng.uniform() * xx;
      for (j = 0; j < n - 1; ++j) {
        u -= x[j] * x[j];
        if (u < 0.0) break;
      }
      while (j > 0 && x[j] == 0.0) --j;
    }
    const double xj = j >= 0 ? x[j] : 0.0;

    xbar += x;
    grad = 2.0 * lambda * (x - v);
    for (int k = rows.ptr[i]; k < rows.ptr[i + 1]; ++k) grad[rows.idx[k]] += sgn * rows.val[k];
    x = (x - eta_x * grad).cwiseMax(-1.0).cwiseMin(1.0);

    if (j >= 0 && xj != 0.0) {
      const double coef = eta_y * xx / xj;
      const double up = std::exp(coef), down = 1.0 / up;
      bool overflow = false;
      for (int k = cols.ptr[j]; k < cols.ptr[j + 1]; ++k) {
        const double a = cols.val[k];
        const double f = a == 1.0 ? up : (a == -1.0 ? down : std::exp(coef * a));
        const int r = cols.idx[k];
        leaf[r] *= f;
        leaf[m + r] /= f;
        overflow |= leaf[r] > 1e250 || leaf[m + r] > 1e250;
        tree.set(r, leaf[r]);
        tree.set(m + r, leaf[m + r]);
      }
      if (overflow || tree.total() < 1e-250) renormalize();
    }
  }
  GameRun run;
  run.x = xbar / static_cast<double>(std::max<long long>(1, iterations));
  run.value = l2l1_value(s, v, lambda, run.x);
  return run;
}

}  // namespace

GameResult l2l1_game_solve(const SetSystem& s, const Eigen::VectorXd& v, double lambda, double eps, double delta,
                           GaussianSource& rng, const GameConfig& config, const Eigen::VectorXd* warm_start) {
  if (!(eps > 0.0)) throw ArgumentError("l2l1_game_solve: eps must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("l2l1_game_solve: delta must lie in (0,1)");
  if (!(lambda >= 0.0)) throw ArgumentError("l2l1_game_solve: lambda must be nonnegative");
  const int m = s.num_sets(), n = s.num_elements();
  if (v.size() != n) throw ArgumentError("l2l1_game_solve: anchor has wrong length");
  GameResult res;
  if (n == 0 || m == 0 || s.max_row_norm() == 0.0) {
    // A = 0: the box projection of v is the exact minimizer.
    res.x = v.cwiseMax(-1.0).cwiseMin(1.0);
    res.value = res.best_recorded = l2l1_value(s, v, lambda, res.x);
    res.values = {res.value};
    return res;
  }
  const double r = s.max_row_norm();
  const double planned = std::ceil(config.c_t * n * r * r * std::log(std::max(2.0, 2.0 * m)) / (eps * eps));
  res.planned_iterations = static_cast<long long>(std::min(planned, 1e15));
  res.iterations = config.max_iterations > 0 ? std::min(res.planned_iterations, config.max_iterations)
                                             : res.planned_iterations;
  const int reps = config.repetitions > 0 ? config.repetitions
                                          : static_cast<int>(std::ceil(std::log2(1.0 / delta))) + 1;
  std::vector<GaussianSource> streams;
  for (int k = 0; k < reps; ++k) streams.push_back(rng.split(static_cast<std::uint64_t>(k)));
  std::vector<GameRun> runs(reps);
#pragma omp parallel for schedule(static) if (reps > 1)
  for (int k = 0; k < reps; ++k) runs[k] = run_game(s, v, lambda, res.iterations, streams[k], warm_start);
  int best = 0;
  for (int k = 0; k < reps; ++k) {
    res.values.push_back(runs[k].value);
    if (runs[k].value < runs[best].value) best = k;
  }
  res.x = std::move(runs[best].x);
  res.value = runs[best].value;
  res.best_recorded = *std::min_element(res.values.begin(), res.values.end());
  return res;
}

RoundResult round_near_tight(const SetSystem& s, const Eigen::VectorXd& x, const std::vector<int>& near_tight,
                             double max_slack, GaussianSource& rng, int max_tries) {
  if (x.size() != s.num_elements()) throw ArgumentError("round_near_tight: coloring has wrong length");
  double var = 0.0;
  for (int i : near_tight) {
    const double slack = 1.0 - std::abs(x[i]);
    if (slack > max_slack + 1e-12 || slack < -1e-12)
      throw ArgumentError("round_near_tight: coordinate " + std::to_string(i) + " has slack " + std::to_string(slack) +
                          " above " + std::to_string(max_slack));
    var += slack * slack;
  }
  RoundResult best;
  best.bound = std::sqrt(2.0 * std::log(4.0 * std::max(1, s.num_sets())) * var);
  best.increase = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= std::max(1, max_tries); ++t) {
    Eigen::VectorXd y = x;
    int landed = 0;
    for (int i : near_tight) {
      const double sg = x[i] >= 0.0 ? 1.0 : -1.0;
      const bool up = rng.coin();
      if (std::abs(x[i]) >= 1.0 || up) {
        y[i] = sg;
        ++landed;
      } else {
        y[i] = 2.0 * x[i] - sg;
      }
    }
    const double inc = s.discrepancy(y - x);
    if (inc < best.increase) {
      best.x = std::move(y);
      best.increase = inc;
      best.landed = landed;
    }
    best.tries = t;
    if (inc <= best.bound) break;
  }
  best.within_bound = best.increase <= best.bound;
  return best;
}

namespace {

// Signs z for the columns `cols` minimizing ‖base + A_cols z‖∞ over all 2^k patterns.
Eigen::VectorXd exhaustive_tail(const SetSystem& s, const std::vector<int>& cols, const Eigen::VectorXd& base) {
  const int k = static_cast<int>(cols.size());
  const Eigen::MatrixXd dense = s.dense();
  Eigen::MatrixXd sub(s.num_sets(), k);
  for (int c = 0; c < k; ++c) sub.col(c) = dense.col(cols[c]);
  Eigen::VectorXd cur = base - sub.rowwise().sum();  // all −1
  Eigen::VectorXd best_z = -Eigen::VectorXd::Ones(k), z = best_z;
  double best = cur.size() ? cur.lpNorm<Eigen::Infinity>() : 0.0;
  // Gray code walk flips one sign per step.
  for (std::uint64_t g = 1; g < (std::uint64_t{1} << k); ++g) {
    const int bit = __builtin_ctzll(g);
    z[bit] = -z[bit];
    cur += 2.0 * z[bit] * sub.col(bit);
    const double d = cur.size() ? cur.lpNorm<Eigen::Infinity>() : 0.0;
    if (d < best) {
      best = d;
      best_z = z;
    }
  }
  return best_z;
}

Eigen::VectorXd greedy_tail(const SetSystem& s, const std::vector<int>& cols, Eigen::VectorXd cur) {
  const Eigen::MatrixXd dense = s.dense();
  Eigen::VectorXd z(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const Eigen::VectorXd col = dense.col(cols[c]);
    const double plus = (cur + col).lpNorm<Eigen::Infinity>(), minus = (cur - col).lpNorm<Eigen::Infinity>();
    z[c] = plus <= minus ? 1.0 : -1.0;
    cur += z[c] * col;
  }
  return z;
}

}  // namespace

SpencerResult spencer_color(const SetSystem& s, GaussianSource& rng, const SpencerConfig& config) {
  const int m = s.num_sets(), n = s.num_elements();
  SpencerResult res;
  if (m == 0) {
    res.x = Eigen::VectorXd::Ones(n);
    return res;
  }
  res.x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ledger = Eigen::VectorXd::Zero(m);
  std::vector<int> active(n);
  for (int j = 0; j < n; ++j) active[j] = j;
  const int max_rounds =
      config.max_rounds > 0 ? config.max_rounds : 4 * static_cast<int>(std::ceil(std::log2(std::max(2, n)))) + 32;
  const double beta = std::min(0.9, 1.0 / std::sqrt(std::max(std::log(std::max(1, m)), 1e-9)));
  FrameworkConfig fcfg = config.framework;
  fcfg.c_tight = config.c_tight;

  auto add_columns = [&](const std::vector<int>& cols, const Eigen::VectorXd& signs) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (std::size_t c = 0; c < cols.size(); ++c) full[cols[c]] = signs[c];
    const Eigen::VectorXd contrib = m ? s.apply(full) : Eigen::VectorXd();
    if (m) ledger += contrib;
    for (std::size_t c = 0; c < cols.size(); ++c) res.x[cols[c]] = signs[c];
    return m ? contrib.lpNorm<Eigen::Infinity>() : 0.0;
  };

  int round = 0;
  while (static_cast<int>(active.size()) > config.exhaustive_threshold) {
    if (round == max_rounds) {
      res.failed = true;
      res.diagnostics.push_back("round cap of " + std::to_string(max_rounds) + " reached with " +
                                std::to_string(active.size()) + " active coordinates");
      break;
    }
    ++round;
    const int na = static_cast<int>(active.size());
    const SetSystem sub = s.restrict_columns(active);
    SpencerRound rep;
    rep.active = na;
    rep.beta = beta;
    if (sub.max_row_l1() == 0.0) {
      add_columns(active, Eigen::VectorXd::Ones(na));
      active.clear();
      res.rounds.push_back(rep);
      break;
    }
    rep.rho = spencer_radius(m, na, config.c_set);

    DiscrepancyBody body;
    body.dim = na;
    body.rho = rep.rho;
    body.theta = sub.max_row_l1();
    body.value = [&sub](const Eigen::VectorXd& y, double, GaussianSource&) { return sub.discrepancy(y); };
    int calls = 0;
    RegularizedSolver solver = [&](const SolveRequest& req, GaussianSource& r) {
      ++calls;
      return l2l1_game_solve(sub, *req.anchor, req.lambda, std::max(req.additive_error, 1e-12), config.game_delta, r,
                             config.game, req.warm_start)
          .x;
    };
    GaussianSource round_rng = rng.split(static_cast<std::uint64_t>(round));
    PartialColoring pc;
    try {
      pc = two_sided_partial_color(body, beta, solver, round_rng, fcfg);
    } catch (const PhaseError& e) {
      res.failed = true;
      res.diagnostics.push_back("round " + std::to_string(round) + ": " + e.what());
      break;
    }
    rep.solver_calls = calls;
    rep.exit = to_string(pc.selected.exit);
    rep.partial_disc = sub.discrepancy(pc.x);
    rep.near_tight = static_cast<int>(pc.abs_near_tight.size());

    Eigen::VectorXd y = pc.x;
    if (pc.abs_near_tight.empty()) {
      int i = 0;
      y.cwiseAbs().maxCoeff(&i);
      y[i] = y[i] >= 0.0 ? 1.0 : -1.0;
      res.diagnostics.push_back("round " + std::to_string(round) + ": no near-tight coordinate; froze the largest");
    } else {
      GaussianSource rr = round_rng.split(0x70);
      RoundResult rounded = round_near_tight(sub, y, pc.abs_near_tight, beta, rr);
      rep.round_increase = rounded.increase;
      if (!rounded.within_bound)
        res.diagnostics.push_back("round " + std::to_string(round) + ": rounding increase " +
                                  std::to_string(rounded.increase) + " above the Hoeffding bound " +
                                  std::to_string(rounded.bound));
      y = std::move(rounded.x);
    }

    std::vector<int> frozen_cols, rest;
    std::vector<double> frozen_signs;
    for (int c = 0; c < na; ++c) {
      if (std::abs(y[c]) == 1.0) {
        frozen_cols.push_back(active[c]);
        frozen_signs.push_back(y[c]);
      } else {
        rest.push_back(active[c]);
      }
    }
    rep.frozen = static_cast<int>(frozen_cols.size());
    rep.contribution = add_columns(frozen_cols, Eigen::Map<Eigen::VectorXd>(frozen_signs.data(), frozen_signs.size()));
    res.rounds.push_back(rep);
    active = std::move(rest);
  }

  if (!active.empty()) {
    res.exhaustive_tail = static_cast<int>(active.size());
    const Eigen::VectorXd z = active.size() <= 16 ? exhaustive_tail(s, active, ledger) : greedy_tail(s, active, ledger);
    add_columns(active, z);
  }
  const Eigen::VectorXd ax = m ? s.apply(res.x) : Eigen::VectorXd();
  res.disc = m ? ax.lpNorm<Eigen::Infinity>() : 0.0;
  res.ledger_error = m ? (ledger - ax).lpNorm<Eigen::Infinity>() : 0.0;
  return res;
}

}  // namespace partcolor
