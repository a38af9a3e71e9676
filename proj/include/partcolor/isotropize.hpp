#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "partcolor/graph.hpp"
#include "partcolor/lap_solver.hpp"
#include "partcolor/operator_family.hpp"

namespace partcolor {

// Factor F (r × n, r = n − #components) with FᵀF ≈ L†, obtained from n Laplacian
// solves P ≈ L† followed by a thin QR of Φ = W^{1/2} B P (Φ = Q F). Any family
// built from F is unitarily equivalent to the edge-space family W^{1/2} B L̃ (·) L̃ Bᵀ W^{1/2}
// restricted to its range.
Eigen::MatrixXd isotropic_factor(const WeightedGraph& reference, double accuracy,
                                 Preconditioner pre = Preconditioner::Jacobi);

// Vector atoms z_e = F √w_e b_e, one per edge of `atoms` (atom e ↔ edge e).
OperatorFamily edge_family(const Eigen::MatrixXd& factor, const WeightedGraph& atoms);

// M_e = W^{1/2} B L̃ (w_e b_e b_eᵀ) L̃ Bᵀ W^{1/2} in compressed coordinates; Tr M_e is the
// leverage score of e and Σ_e M_e ≈ I. Disconnected input requires per_component.
OperatorFamily isotropize(const WeightedGraph& g, double eps_iso = 1e-3, bool per_component = false);

// Extreme generalized eigenvalues of (L_H, L_G) on range(L_G). Dense for n ≤ dense_limit,
// L_G-inner-product Lanczos with Laplacian solves above.
std::pair<double, double> generalized_extremes(const WeightedGraph& g, const WeightedGraph& h, int dense_limit = 2048);

struct SandwichCertificate {
  bool ok = false;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// H = G reweighted by multipliers w (edge e gets weight w_e·w_G,e). ok iff
// [λ_min, λ_max] ⊆ [1 − ε − tol, 1 + ε + tol].
SandwichCertificate certify_sandwich(const WeightedGraph& g, const Eigen::VectorXd& w, double eps, double tol = 1e-6,
                                     int dense_limit = 2048);

// Spanning forests, returned as edge ids of g.
std::vector<int> maximum_weight_spanning_tree(const WeightedGraph& g);
std::vector<int> bfs_spanning_tree(const WeightedGraph& g);

// R_T(u_e, v_e) for every edge of g, where T is the forest `tree` (edge ids of g).
// Throws if T does not connect the endpoints of some edge.
Eigen::VectorXd tree_resistances(const WeightedGraph& g, const std::vector<int>& tree);
// Tr(L_T† L_G) = Σ_e w_e R_T(u_e, v_e).
double tree_distortion(const WeightedGraph& g, const std::vector<int>& tree);

}  // namespace partcolor
