#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <variant>
#include <vector>

#include "partcolor/kernels.hpp"
#include "partcolor/rng.hpp"

namespace partcolor {

// A_i = a (symmetric PSD, n×n)
struct DenseAtom {
  Eigen::MatrixXd a;
};

// A_i = scale · b bᵀ with b an integer-signed sparse vector (graph incidence rows).
struct IncidenceAtom {
  double scale = 1.0;
  std::vector<int> index;
  std::vector<int> sign;
};

// A_i = scale · v vᵀ with a real dense vector v (isotropized edge atoms).
struct VectorAtom {
  double scale = 1.0;
  Eigen::VectorXd v;
};

using Atom = std::variant<DenseAtom, IncidenceAtom, VectorAtom>;

// An immutable list of m symmetric PSD n×n atoms and the linear map x ↦ Σ x_i A_i.
// Safe to share across threads; the only mutable member is the matvec counter.
class OperatorFamily {
 public:
  OperatorFamily() = default;
  OperatorFamily(int n, std::vector<Atom> atoms);

  int dim() const { return n_; }
  int size() const { return static_cast<int>(atoms_.size()); }
  const Atom& atom(int i) const { return atoms_[i]; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  // out = A(x) v
  void matvec(const Eigen::VectorXd& x, const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  // Dense A(x).
  Eigen::MatrixXd assemble(const Eigen::VectorXd& x) const;
  // A*(Y) = (⟨A_i, Y⟩)_i
  Eigen::VectorXd adjoint(const Eigen::MatrixXd& y) const;
  Eigen::VectorXd traces() const;

  // Family {scale_j · A_{keep_j}}. Scales must be nonnegative.
  OperatorFamily reweighted(const std::vector<int>& keep, const Eigen::VectorXd& scale) const;

  std::uint64_t matvecs() const { return matvecs_->load(std::memory_order_relaxed); }

 private:
  enum class Layout { Empty, Dense, Incidence, Vector, Mixed };
  void build_caches();
  void check_x(const Eigen::VectorXd& x) const;

  int n_ = 0;
  std::vector<Atom> atoms_;
  Layout layout_ = Layout::Empty;
  Eigen::MatrixXd z_;       // Vector layout: one atom vector per column
  Eigen::VectorXd scale_;   // Vector / Incidence layouts: per-atom scale
  kernels::Csr inc_;        // Incidence layout: rows are b_i
  kernels::Csr inc_t_;
  std::shared_ptr<std::atomic<std::uint64_t>> matvecs_ = std::make_shared<std::atomic<std::uint64_t>>(0);
};

// Handle for the operator A(x) with a fixed coefficient vector.
class AppliedFamily {
 public:
  AppliedFamily(const OperatorFamily& family, Eigen::VectorXd x);
  int dim() const { return family_->dim(); }
  Eigen::VectorXd operator*(const Eigen::VectorXd& v) const;
  void matvec(const Eigen::VectorXd& v, Eigen::VectorXd& out) const { family_->matvec(x_, v, out); }
  Eigen::MatrixXd dense() const { return family_->assemble(x_); }

 private:
  const OperatorFamily* family_;
  Eigen::VectorXd x_;
};

AppliedFamily apply(const OperatorFamily& family, const Eigen::VectorXd& x);

// View of the signed embedding Ã_i = diag(A_i, −A_i) over 2n dimensions.
class BlockEmbedding {
 public:
  explicit BlockEmbedding(const OperatorFamily& family) : family_(&family) {}
  int dim() const { return 2 * family_->dim(); }
  // out = Ã(x) v for v of length 2n
  void matvec(const Eigen::VectorXd& x, const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  // Tr exp(Ã(x)/μ), evaluated densely.
  double trace_exp(const Eigen::VectorXd& x, double mu) const;

 private:
  const OperatorFamily* family_;
};

struct OpnormEstimate {
  double value = 0.0;  // A with ‖A(x)‖ ∈ [(1−c)A, A] with probability ≥ 1−δ
  int iterations = 0;
  bool stabilized = true;
};

// Randomized Lanczos on the block embedding. max_iterations = 0 selects the
// default cap 8·⌈log(m/δ)/√c⌉ (never more than the Krylov dimension 2n).
OpnormEstimate opnorm_estimate(const OperatorFamily& family, const Eigen::VectorXd& x, double c, double delta,
                               GaussianSource& rng, int max_iterations = 0);

// ‖A(x)‖_op from a dense eigendecomposition.
double exact_opnorm(const OperatorFamily& family, const Eigen::VectorXd& x);

struct SmoothedValue {
  double value = 0.0;   // μ log Tr exp(Ã(x)/μ)
  double opnorm = 0.0;  // ‖A(x)‖_op, a by-product of the eigendecomposition
  Eigen::VectorXd grad; // Ã*(Y(x))
};

SmoothedValue smoothed_value_grad(const OperatorFamily& family, const Eigen::VectorXd& x, double mu);

// Text format: header `n m`, then per atom `dense` followed by n rows, `rank1 w k i1 s1 ... ik sk`,
// or `vector w v1 ... vn`. Numbers are written in shortest round-trip form.
void write_family(std::ostream& out, const OperatorFamily& family);
OperatorFamily read_family(std::istream& in);

}  // namespace partcolor
