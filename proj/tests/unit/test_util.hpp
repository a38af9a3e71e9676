#pragma once

#include <Eigen/Dense>
#include <vector>

#include "partcolor/operator_family.hpp"
#include "partcolor/rng.hpp"

namespace testutil {

// m dense PSD atoms G Gᵀ/n with Gaussian G (n × n).
inline partcolor::OperatorFamily random_psd_family(int n, int m, partcolor::GaussianSource& rng) {
  std::vector<partcolor::Atom> atoms;
  for (int i = 0; i < m; ++i) {
    Eigen::MatrixXd g(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) g(r, c) = rng.normal();
    Eigen::MatrixXd a = g * g.transpose() / n;
    a = 0.5 * (a + a.transpose());
    atoms.push_back(partcolor::DenseAtom{a});
  }
  return partcolor::OperatorFamily(n, atoms);
}

// The same family scaled so that ‖A(1)‖_op = target.
inline partcolor::OperatorFamily normalized(const partcolor::OperatorFamily& f, double target) {
  const double norm = partcolor::exact_opnorm(f, Eigen::VectorXd::Ones(f.size()));
  std::vector<int> keep(f.size());
  for (int i = 0; i < f.size(); ++i) keep[i] = i;
  return f.reweighted(keep, Eigen::VectorXd::Constant(f.size(), target / norm));
}

inline Eigen::VectorXd uniform_box(int m, partcolor::GaussianSource& rng) {
  Eigen::VectorXd x(m);
  for (int i = 0; i < m; ++i) x[i] = 2.0 * rng.uniform() - 1.0;
  return x;
}

}  // namespace testutil
