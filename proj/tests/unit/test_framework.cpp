#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "partcolor/boxspec.hpp"
#include "partcolor/errors.hpp"
#include "partcolor/framework.hpp"
#include "partcolor/spencer.hpp"

using namespace partcolor;

namespace {

Eigen::VectorXd clip(const Eigen::VectorXd& g) { return g.cwiseMax(-1.0).cwiseMin(1.0); }

// Body {x : ‖Ax‖∞ ≤ ρ} with an exact value query.
DiscrepancyBody linf_body(const SetSystem& s, double rho) {
  DiscrepancyBody b;
  b.dim = s.num_elements();
  b.rho = rho;
  b.theta = std::max(s.max_row_l1(), 1e-12);
  b.value = [&s](const Eigen::VectorXd& x, double, GaussianSource&) { return s.discrepancy(x); };
  return b;
}

// Solves the regularized subproblem exactly with the epigraph QP oracle.
RegularizedSolver exact_linf_solver(const Eigen::MatrixXd& a) {
  return [a](const SolveRequest& req, GaussianSource&) {
    return Eigen::VectorXd(clip(oracle::l2l1_minimum(a, *req.anchor, req.lambda).x));
  };
}

RegularizedSolver never_called() {
  return [](const SolveRequest&, GaussianSource&) -> Eigen::VectorXd {
    throw ContractViolation("solver should not run");
  };
}

}  // namespace

TEST_CASE("check_anchor examples") {
  CHECK(check_anchor(Eigen::VectorXd::Zero(16)));
  const int m = 16;
  Eigen::VectorXd far = Eigen::VectorXd::Zero(m);
  far[0] = 3.0 * std::sqrt(double(m));
  CHECK_FALSE(check_anchor(far));
}

TEST_CASE("check_anchor rejects few Gaussian draws at m = 64") {
  GaussianSource rng(1);
  int rejected = 0;
  for (int t = 0; t < 1000; ++t) rejected += check_anchor(rng.normal_vector(64)) ? 0 : 1;
  CHECK(rejected <= 10);
}

TEST_CASE("draw_anchor returns an accepted anchor") {
  GaussianSource rng(2);
  CHECK(check_anchor(draw_anchor(32, rng)));
}

TEST_CASE("radius above the value range returns the clipped anchor") {
  const SetSystem s = SetSystem::from_dense(Eigen::MatrixXd::Ones(3, 6));
  DiscrepancyBody body = linf_body(s, 100.0);
  GaussianSource rng(3);
  const Eigen::VectorXd g = rng.normal_vector(6);
  const SearchResult r = binary_search_partial_color(body, g, 0.2, never_called(), rng);
  CHECK(r.exit == SearchExit::DragDownInit);
  CHECK(r.solver_calls == 0);
  CHECK((r.x - clip(g) / (1.0 + r.c)).norm() <= 1e-15);
  const double box_dist2 = (clip(g) - g).squaredNorm();
  CHECK(r.dist2 <= box_dist2 + r.tau);
}

TEST_CASE("distance certificate against the exact projection on small set systems") {
  GaussianSource rng(4);
  int aggregated = 0;
  for (int t = 0; t < 12; ++t) {
    const int m = 6 + t % 5;
    const SetSystem s = random_set_system(m, m, 0.5, rng);
    if (s.max_row_l1() == 0.0) continue;
    const double rho = 0.35 * s.max_row_l1();
    const DiscrepancyBody body = linf_body(s, rho);
    const Eigen::VectorXd g = draw_anchor(m, rng);
    const double beta = 0.2;
    const SearchResult r = binary_search_partial_color(body, g, beta, exact_linf_solver(s.dense()), rng);
    const oracle::NearestPoint star = oracle::nearest_point_linf(s.dense(), rho, g);
    CAPTURE(t);
    CAPTURE(to_string(r.exit));
    CHECK(r.x.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    CHECK(s.discrepancy(r.x) <= rho * (1.0 + 2.0 * r.c));
    CHECK(r.dist2 <= star.r2_upper + r.tau);
    CHECK(r.tau == doctest::Approx(0.02 * m * beta * beta / 4.0));
    if (r.exit == SearchExit::Aggregate) {
      ++aggregated;
      CHECK(r.alpha >= 0.0);
      CHECK(r.alpha <= 1.0);
      CHECK(r.alpha * r.value_lo + (1.0 - r.alpha) * r.value_hi == doctest::Approx(rho).epsilon(1e-12));
    }
    CHECK(r.exit != SearchExit::CallCap);
  }
  CHECK(aggregated >= 1);
}

TEST_CASE("distance certificate on an operator-norm body") {
  GaussianSource rng(5);
  for (int t = 0; t < 4; ++t) {
    const int m = 6;
    std::vector<Atom> atoms;
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd u = rng.normal_vector(3);
      atoms.push_back(DenseAtom{u * u.transpose() / 3.0});
    }
    const OperatorFamily fam(3, atoms);
    const double theta = fam.assemble(Eigen::VectorXd::Ones(m)).norm();
    const double rho = 0.3 * theta;
    const DiscrepancyBody body = make_opnorm_body(fam, rho, theta);
    const Eigen::VectorXd g = draw_anchor(m, rng);
    const RegularizedSolver solver = [&fam](const SolveRequest& req, GaussianSource&) {
      return Eigen::VectorXd(clip(oracle::flam_minimum(fam, *req.anchor, req.lambda).x));
    };
    const SearchResult r = binary_search_partial_color(body, g, 0.25, solver, rng);
    const oracle::NearestPoint star = oracle::nearest_point_opnorm(fam, rho, g);
    CAPTURE(t);
    const double f = oracle::dense_spectrum(fam.assemble(r.x)).cwiseAbs().maxCoeff();
    CHECK(f <= rho * (1.0 + 2.0 * r.c));
    CHECK(r.dist2 <= star.r2_upper + r.tau);
  }
}

TEST_CASE("near-tight transfer on oracle instances") {
  // A projection with many coordinates at −1 keeps at least half of them within β.
  GaussianSource rng(6);
  const double beta = 0.3;
  int checked = 0;
  for (int t = 0; t < 20; ++t) {
    const int m = 10;
    const SetSystem s = random_set_system(4, m, 0.4, rng);
    if (s.max_row_l1() == 0.0) continue;
    const double rho = 0.5 * s.max_row_l1();
    const Eigen::VectorXd g = draw_anchor(m, rng);
    const oracle::NearestPoint star = oracle::nearest_point_linf(s.dense(), rho, g);
    int at_minus_one = 0;
    for (int i = 0; i < m; ++i) at_minus_one += star.x[i] <= -1.0 + 1e-6 ? 1 : 0;
    const double c_tight = 0.02;
    if (at_minus_one < c_tight * m / 2) continue;
    const SearchResult r = binary_search_partial_color(linf_body(s, rho), g, beta, exact_linf_solver(s.dense()), rng);
    if ((r.x - star.x).squaredNorm() > c_tight * m * beta * beta / 4.0) continue;
    ++checked;
    CHECK(static_cast<double>(near_tight_negative(r.x, beta).size()) >= c_tight * m / 4.0);
  }
  CHECK(checked > 0);
}

TEST_CASE("two-sided coloring with a zero value function") {
  DiscrepancyBody body;
  body.dim = 400;
  body.rho = 1.0;
  body.theta = 1.0;
  body.value = [](const Eigen::VectorXd&, double, GaussianSource&) { return 0.0; };
  GaussianSource rng(7);
  const double beta = 0.2;
  const PartialColoring pc = two_sided_partial_color(body, beta, never_called(), rng);
  CHECK((pc.x - clip(pc.anchor) / (1.0 + pc.selected.c)).norm() <= 1e-12);
  // The expected count of |g_i| ≥ 1 − β is m·2Φ̄(0.8) ≈ 0.4237·m.
  const double fraction = static_cast<double>(pc.abs_near_tight.size()) / body.dim;
  CHECK(fraction > 0.34);
  CHECK(fraction < 0.51);
}

TEST_CASE("two-sided coloring with a two-point anchor") {
  const SetSystem s = SetSystem::from_dense((Eigen::MatrixXd(1, 2) << 1.0, 1.0).finished());
  DiscrepancyBody body = linf_body(s, 1.0);
  Eigen::VectorXd g(2);
  g << 5.0, -5.0;
  GaussianSource rng(8);
  const SearchResult r = binary_search_partial_color(body, g, 0.2, never_called(), rng);
  CHECK(r.exit == SearchExit::DragDownInit);
  CHECK(near_tight_absolute(r.x, 0.2).size() == 2);
  CHECK(r.x[0] > 0.99);
  CHECK(r.x[1] < -0.99);
}

TEST_CASE("two-sided coloring fails when both signs fail") {
  DiscrepancyBody body;
  body.dim = 8;
  body.rho = 0.1;
  body.theta = 10.0;
  body.value = [](const Eigen::VectorXd& x, double, GaussianSource&) { return x.cwiseAbs().sum(); };
  GaussianSource rng(9);
  CHECK_THROWS_AS(two_sided_partial_color(body, 0.2, never_called(), rng), PhaseError);
}

TEST_CASE("set-system body at m = 128 has many near-tight coordinates") {
  const int m = 128;
  const double beta = std::min(0.9, 1.0 / std::sqrt(std::log(double(m))));
  double total = 0.0;
  const int seeds = 20;
  for (int seed = 1; seed <= seeds; ++seed) {
    GaussianSource rng(100 + seed);
    const SetSystem s = random_set_system(m, m, 0.5, rng);
    const double rho = spencer_radius(m, m, 0.3);
    DiscrepancyBody body = linf_body(s, rho);
    const GameConfig game{8.0, 2000, 1};
    const RegularizedSolver solver = [&s, &game](const SolveRequest& req, GaussianSource& r) {
      return l2l1_game_solve(s, *req.anchor, req.lambda, std::max(req.additive_error, 1e-12), 0.5, r, game,
                             req.warm_start)
          .x;
    };
    const PartialColoring pc = two_sided_partial_color(body, beta, solver, rng);
    CHECK(s.discrepancy(pc.x) <= rho * (1.0 + 2.0 * pc.selected.c));
    total += static_cast<double>(pc.near_tight.size()) / m;
  }
  CHECK(total / seeds >= 0.05);
}
