#include "partcolor/operator_family.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "partcolor/errors.hpp"
#include "partcolor/text_io.hpp"

namespace partcolor {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

OperatorFamily::OperatorFamily(int n, std::vector<Atom> atoms) : n_(n), atoms_(std::move(atoms)) {
  if (n < 0) throw ArgumentError("operator family dimension must be nonnegative");
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    std::visit(overloaded{
                   [&](DenseAtom& a) {
                     if (a.a.rows() != n || a.a.cols() != n)
                       throw ArgumentError("dense atom " + std::to_string(i) + " has wrong shape");
                     double asym = (a.a - a.a.transpose()).cwiseAbs().maxCoeff();
                     if (!(asym <= 1e-12 * std::max(1.0, a.a.cwiseAbs().maxCoeff())))
                       throw ArgumentError("dense atom " + std::to_string(i) + " is not symmetric");
                     a.a = 0.5 * (a.a + a.a.transpose());
                   },
                   [&](IncidenceAtom& a) {
                     if (!(a.scale >= 0.0) || !std::isfinite(a.scale))
                       throw ArgumentError("rank-one atom " + std::to_string(i) + " has a negative scale");
                     if (a.index.size() != a.sign.size())
                       throw ArgumentError("rank-one atom " + std::to_string(i) + " index/sign length mismatch");
                     for (int k : a.index)
                       if (k < 0 || k >= n) throw ArgumentError("rank-one atom " + std::to_string(i) + " index out of range");
                   },
                   [&](VectorAtom& a) {
                     if (!(a.scale >= 0.0) || !std::isfinite(a.scale))
                       throw ArgumentError("vector atom " + std::to_string(i) + " has a negative scale");
                     if (a.v.size() != n) throw ArgumentError("vector atom " + std::to_string(i) + " has wrong length");
                   },
               },
               atoms_[i]);
  }
  build_caches();
}

void OperatorFamily::build_caches() {
  if (atoms_.empty()) {
    layout_ = Layout::Empty;
    return;
  }
  const std::size_t kind = atoms_.front().index();
  bool same = std::all_of(atoms_.begin(), atoms_.end(), [&](const Atom& a) { return a.index() == kind; });
  if (!same) {
    layout_ = Layout::Mixed;
    return;
  }
  const int m = size();
  if (kind == 0) {
    layout_ = Layout::Dense;
  } else if (kind == 1) {
    layout_ = Layout::Incidence;
    std::vector<kernels::Csr::Entry> entries;
    scale_.resize(m);
    for (int i = 0; i < m; ++i) {
      const auto& a = std::get<IncidenceAtom>(atoms_[i]);
      scale_[i] = a.scale;
      for (std::size_t k = 0; k < a.index.size(); ++k) entries.push_back({i, a.index[k], double(a.sign[k])});
    }
    inc_ = kernels::Csr::from_entries(m, n_, std::move(entries));
    inc_t_ = inc_.transpose();
  } else {
    layout_ = Layout::Vector;
    z_.resize(n_, m);
    scale_.resize(m);
    for (int i = 0; i < m; ++i) {
      const auto& a = std::get<VectorAtom>(atoms_[i]);
      z_.col(i) = a.v;
      scale_[i] = a.scale;
    }
  }
}

void OperatorFamily::check_x(const Eigen::VectorXd& x) const {
  if (x.size() != size())
    throw ArgumentError("coefficient vector has length " + std::to_string(x.size()) + ", family has " +
                        std::to_string(size()) + " atoms");
}

void OperatorFamily::matvec(const Eigen::VectorXd& x, const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  check_x(x);
  if (v.size() != n_) throw ArgumentError("matvec vector has wrong length");
  matvecs_->fetch_add(1, std::memory_order_relaxed);
  out.setZero(n_);
  switch (layout_) {
    case Layout::Empty:
      return;
    case Layout::Dense:
      for (int i = 0; i < size(); ++i)
        if (x[i] != 0.0) out.noalias() += x[i] * (std::get<DenseAtom>(atoms_[i]).a * v);
      return;
    case Layout::Incidence: {
      Eigen::VectorXd t(size());
      kernels::spmv(inc_, v.data(), t.data());
      t.array() *= x.array() * scale_.array();
      kernels::spmv(inc_t_, t.data(), out.data());
      return;
    }
    case Layout::Vector: {
      Eigen::VectorXd coef = x.cwiseProduct(scale_);
      kernels::rank_one_apply(z_, coef.data(), v.data(), out.data());
      return;
    }
    case Layout::Mixed:
      for (int i = 0; i < size(); ++i) {
        if (x[i] == 0.0) continue;
        std::visit(overloaded{
                       [&](const DenseAtom& a) { out.noalias() += x[i] * (a.a * v); },
                       [&](const IncidenceAtom& a) {
                         double s = 0.0;
                         for (std::size_t k = 0; k < a.index.size(); ++k) s += a.sign[k] * v[a.index[k]];
                         s *= x[i] * a.scale;
                         for (std::size_t k = 0; k < a.index.size(); ++k) out[a.index[k]] += s * a.sign[k];
                       },
                       [&](const VectorAtom& a) { out.noalias() += (x[i] * a.scale * a.v.dot(v)) * a.v; },
                   },
                   atoms_[i]);
      }
      return;
  }
}

Eigen::MatrixXd OperatorFamily::assemble(const Eigen::VectorXd& x) const {
  check_x(x);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_, n_);
  if (layout_ == Layout::Vector) {
    Eigen::VectorXd coef = x.cwiseProduct(scale_);
    h.noalias() = z_ * coef.asDiagonal() * z_.transpose();
    return 0.5 * (h + h.transpose());
  }
  for (int i = 0; i < size(); ++i) {
    if (x[i] == 0.0) continue;
    std::visit(overloaded{
                   [&](const DenseAtom& a) { h += x[i] * a.a; },
                   [&](const IncidenceAtom& a) {
                     const double s = x[i] * a.scale;
                     for (std::size_t p = 0; p < a.index.size(); ++p)
                       for (std::size_t q = 0; q < a.index.size(); ++q)
                         h(a.index[p], a.index[q]) += s * a.sign[p] * a.sign[q];
                   },
                   [&](const VectorAtom& a) { h.noalias() += (x[i] * a.scale) * a.v * a.v.transpose(); },
               },
               atoms_[i]);
  }
  return h;
}

Eigen::VectorXd OperatorFamily::adjoint(const Eigen::MatrixXd& y) const {
  if (y.rows() != n_ || y.cols() != n_) throw ArgumentError("adjoint argument has wrong shape");
  Eigen::VectorXd out(size());
  if (layout_ == Layout::Vector) {
    kernels::rank_one_quadratic(y, z_, out.data());
    out.array() *= scale_.array();
    return out;
  }
  if (layout_ == Layout::Incidence) {
    kernels::csr_quadratic(y, inc_, out.data());
    out.array() *= scale_.array();
    return out;
  }
  for (int i = 0; i < size(); ++i) {
    out[i] = std::visit(overloaded{
                            [&](const DenseAtom& a) { return a.a.cwiseProduct(y).sum(); },
                            [&](const IncidenceAtom& a) {
                              double s = 0.0;
                              for (std::size_t p = 0; p < a.index.size(); ++p)
                                for (std::size_t q = 0; q < a.index.size(); ++q)
                                  s += a.sign[p] * a.sign[q] * y(a.index[p], a.index[q]);
                              return a.scale * s;
                            },
                            [&](const VectorAtom& a) { return a.scale * a.v.dot(y * a.v); },
                        },
                        atoms_[i]);
  }
  return out;
}

Eigen::VectorXd OperatorFamily::traces() const {
  Eigen::VectorXd t(size());
  for (int i = 0; i < size(); ++i) {
    t[i] = std::visit(overloaded{
                          [](const DenseAtom& a) { return a.a.trace(); },
                          [](const IncidenceAtom& a) {
                            double s = 0.0;
                            for (int sg : a.sign) s += double(sg) * sg;
                            return a.scale * s;
                          },
                          [](const VectorAtom& a) { return a.scale * a.v.squaredNorm(); },
                      },
                      atoms_[i]);
  }
  return t;
}

OperatorFamily OperatorFamily::reweighted(const std::vector<int>& keep, const Eigen::VectorXd& scale) const {
  if (static_cast<Eigen::Index>(keep.size()) != scale.size()) throw ArgumentError("reweighted: length mismatch");
  std::vector<Atom> out;
  out.reserve(keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    if (keep[j] < 0 || keep[j] >= size()) throw ArgumentError("reweighted: atom index out of range");
    if (!(scale[j] >= 0.0)) throw ArgumentError("reweighted: negative scale");
    Atom a = atoms_[keep[j]];
    std::visit(overloaded{
                   [&](DenseAtom& d) { d.a *= scale[j]; },
                   [&](IncidenceAtom& d) { d.scale *= scale[j]; },
                   [&](VectorAtom& d) { d.scale *= scale[j]; },
               },
               a);
    out.push_back(std::move(a));
  }
  return OperatorFamily(n_, std::move(out));
}

AppliedFamily::AppliedFamily(const OperatorFamily& family, Eigen::VectorXd x) : family_(&family), x_(std::move(x)) {
  if (x_.size() != family.size()) throw ArgumentError("apply: coefficient vector length mismatch");
}

Eigen::VectorXd AppliedFamily::operator*(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out;
  family_->matvec(x_, v, out);
  return out;
}

AppliedFamily apply(const OperatorFamily& family, const Eigen::VectorXd& x) { return AppliedFamily(family, x); }

void BlockEmbedding::matvec(const Eigen::VectorXd& x, const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  const int n = family_->dim();
  if (v.size() != 2 * n) throw ArgumentError("block embedding: vector has wrong length");
  Eigen::VectorXd top, bottom;
  family_->matvec(x, v.head(n), top);
  family_->matvec(x, v.tail(n), bottom);
  out.resize(2 * n);
  out.head(n) = top;
  out.tail(n) = -bottom;
}

double BlockEmbedding::trace_exp(const Eigen::VectorXd& x, double mu) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(family_->assemble(x), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& lam = es.eigenvalues();
  return (lam.array() / mu).exp().sum() + (-lam.array() / mu).exp().sum();
}

OpnormEstimate opnorm_estimate(const OperatorFamily& family, const Eigen::VectorXd& x, double c, double delta,
                               GaussianSource& rng, int max_iterations) {
  if (!(c > 0.0 && c < 1.0)) throw ArgumentError("opnorm_estimate: c must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("opnorm_estimate: delta must lie in (0,1)");
  if (x.size() != family.size()) throw ArgumentError("opnorm_estimate: coefficient vector length mismatch");
  OpnormEstimate est;
  if (x.isZero(0.0) || family.dim() == 0) return est;

  const int big_n = 2 * family.dim();
  int cap = max_iterations;
  if (cap <= 0) {
    double m = std::max(2, family.size());
    cap = 8 * static_cast<int>(std::ceil(std::log(m / delta) / std::sqrt(c)));
  }
  const int k_max = std::min(cap, big_n);

  BlockEmbedding emb(family);
  Eigen::MatrixXd q(big_n, k_max + 1);
  std::vector<double> alpha, beta;
  Eigen::VectorXd v = rng.normal_vector(big_n);
  q.col(0) = v / v.norm();
  Eigen::VectorXd w;
  double theta = 0.0, theta_prev = 0.0;
  bool breakdown = false;
  int j = 0;
  for (; j < k_max; ++j) {
    emb.matvec(x, q.col(j), w);
    const double a = q.col(j).dot(w);
    alpha.push_back(a);
    // two passes of full reorthogonalization
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd coeffs = q.leftCols(j + 1).transpose() * w;
      w.noalias() -= q.leftCols(j + 1) * coeffs;
    }
    const double b = w.norm();
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), j + 1);
    Eigen::VectorXd sub = beta.empty() ? Eigen::VectorXd() : Eigen::Map<Eigen::VectorXd>(beta.data(), j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    theta_prev = theta;
    theta = tri.eigenvalues().cwiseAbs().maxCoeff();
    if (b <= 1e-13 * std::max(theta, 1e-300)) {
      breakdown = true;
      ++j;
      break;
    }
    beta.push_back(b);
    q.col(j + 1) = w / b;
  }
  est.iterations = j;
  est.stabilized = breakdown || j == big_n || std::abs(theta - theta_prev) <= 0.25 * c * theta;
  est.value = theta / (1.0 - c);
  return est;
}

double exact_opnorm(const OperatorFamily& family, const Eigen::VectorXd& x) {
  if (family.dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(family.assemble(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SmoothedValue smoothed_value_grad(const OperatorFamily& family, const Eigen::VectorXd& x, double mu) {
  if (!(mu > 0.0)) throw ArgumentError("smoothed_value_grad: mu must be positive");
  SmoothedValue out;
  const int n = family.dim();
  if (n == 0) {
    out.grad = Eigen::VectorXd::Zero(family.size());
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(family.assemble(x));
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double s = lam.cwiseAbs().maxCoeff();
  Eigen::ArrayXd ep = ((lam.array() - s) / mu).exp();
  Eigen::ArrayXd em = ((-lam.array() - s) / mu).exp();
  const double z = ep.sum() + em.sum();
  out.opnorm = s;
  out.value = s + mu * std::log(z);
  Eigen::VectorXd d = ((ep - em) / z).matrix();
  Eigen::MatrixXd dm = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
  out.grad = family.adjoint(0.5 * (dm + dm.transpose()));
  return out;
}

void write_family(std::ostream& out, const OperatorFamily& family) {
  using text::format_double;
  const int n = family.dim();
  out << n << ' ' << family.size() << '\n';
  for (const Atom& atom : family.atoms()) {
    std::visit(overloaded{
                   [&](const DenseAtom& a) {
                     out << "dense\n";
                     for (int r = 0; r < n; ++r) {
                       for (int c = 0; c < n; ++c) out << (c ? " " : "") << format_double(a.a(r, c));
                       out << '\n';
                     }
                   },
                   [&](const IncidenceAtom& a) {
                     out << "rank1 " << format_double(a.scale) << ' ' << a.index.size();
                     for (std::size_t k = 0; k < a.index.size(); ++k) out << ' ' << a.index[k] << ' ' << a.sign[k];
                     out << '\n';
                   },
                   [&](const VectorAtom& a) {
                     out << "vector " << format_double(a.scale);
                     for (int k = 0; k < n; ++k) out << ' ' << format_double(a.v[k]);
                     out << '\n';
                   },
               },
               atom);
  }
}

OperatorFamily read_family(std::istream& in) {
  text::LineReader reader(in);
  std::vector<std::string_view> tok;
  if (!reader.next(tok)) throw ParseError("empty family file", reader.line());
  if (tok.size() != 2) reader.fail("header must be `n m`");
  const long long n = reader.to_int(tok[0]);
  const long long m = reader.to_int(tok[1]);
  if (n < 0 || m < 0) reader.fail("negative dimension in header");
  std::vector<Atom> atoms;
  atoms.reserve(m);
  for (long long i = 0; i < m; ++i) {
    if (!reader.next(tok)) throw ParseError("expected " + std::to_string(m) + " atoms, found " + std::to_string(i), reader.line());
    if (tok[0] == "dense") {
      if (tok.size() != 1) reader.fail("`dense` takes no arguments");
      DenseAtom a{Eigen::MatrixXd(n, n)};
      for (long long r = 0; r < n; ++r) {
        if (!reader.next(tok)) throw ParseError("truncated dense atom", reader.line());
        if (static_cast<long long>(tok.size()) != n) reader.fail("dense row must have " + std::to_string(n) + " entries");
        for (long long c = 0; c < n; ++c) a.a(r, c) = reader.to_double(tok[c]);
      }
      if ((a.a - a.a.transpose()).cwiseAbs().maxCoeff() != 0.0) reader.fail("dense atom is not symmetric");
      atoms.emplace_back(std::move(a));
    } else if (tok[0] == "rank1") {
      if (tok.size() < 3) reader.fail("`rank1` needs a scale and a count");
      IncidenceAtom a;
      a.scale = reader.to_double(tok[1]);
      const long long k = reader.to_int(tok[2]);
      if (k < 0 || static_cast<long long>(tok.size()) != 3 + 2 * k) reader.fail("`rank1` entry count does not match");
      if (!(a.scale >= 0.0)) reader.fail("negative rank-one scale");
      for (long long p = 0; p < k; ++p) {
        long long idx = reader.to_int(tok[3 + 2 * p]);
        if (idx < 0 || idx >= n) reader.fail("rank-one index out of range");
        a.index.push_back(static_cast<int>(idx));
        a.sign.push_back(static_cast<int>(reader.to_int(tok[4 + 2 * p])));
      }
      atoms.emplace_back(std::move(a));
    } else if (tok[0] == "vector") {
      if (static_cast<long long>(tok.size()) != 2 + n) reader.fail("`vector` needs a scale and n entries");
      VectorAtom a;
      a.scale = reader.to_double(tok[1]);
      if (!(a.scale >= 0.0)) reader.fail("negative vector-atom scale");
      a.v.resize(n);
      for (long long c = 0; c < n; ++c) a.v[c] = reader.to_double(tok[2 + c]);
      atoms.emplace_back(std::move(a));
    } else {
      reader.fail("unknown atom kind '" + std::string(tok[0]) + "'");
    }
  }
  if (reader.next(tok)) reader.fail("trailing content after the last atom");
  return OperatorFamily(static_cast<int>(n), std::move(atoms));
}

}  // namespace partcolor
