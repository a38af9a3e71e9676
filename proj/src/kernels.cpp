#include "partcolor/kernels.hpp"

#include <algorithm>

namespace partcolor::kernels {

Csr Csr::from_entries(int rows, int cols, std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  Csr out;
  out.rows = rows;
  out.cols = cols;
  out.ptr.assign(rows + 1, 0);
  for (std::size_t k = 0; k < entries.size();) {
    std::size_t j = k;
    double sum = 0.0;
    while (j < entries.size() && entries[j].row == entries[k].row && entries[j].col == entries[k].col) {
      sum += entries[j].value;
      ++j;
    }
    out.idx.push_back(entries[k].col);
    out.val.push_back(sum);
    out.ptr[entries[k].row + 1]++;
    k = j;
  }
  for (int r = 0; r < rows; ++r) out.ptr[r + 1] += out.ptr[r];
  return out;
}

Csr Csr::transpose() const {
  std::vector<Entry> entries;
  entries.reserve(idx.size());
  for (int r = 0; r < rows; ++r)
    for (int k = ptr[r]; k < ptr[r + 1]; ++k) entries.push_back({idx[k], r, val[k]});
  return from_entries(cols, rows, std::move(entries));
}

void spmv(const Csr& a, const double* x, double* y) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < a.rows; ++r) {
    double s = 0.0;
    for (int k = a.ptr[r]; k < a.ptr[r + 1]; ++k) s += a.val[k] * x[a.idx[k]];
    y[r] = s;
  }
}

void spmv_serial(const Csr& a, const double* x, double* y) {
  for (int r = 0; r < a.rows; ++r) {
    double s = 0.0;
    for (int k = a.ptr[r]; k < a.ptr[r + 1]; ++k) s += a.val[k] * x[a.idx[k]];
    y[r] = s;
  }
}

void rank_one_apply(const Eigen::MatrixXd& z, const double* coef, const double* v, double* out) {
  const Eigen::Index n = z.rows();
  const Eigen::Index m = z.cols();
  Eigen::Map<const Eigen::VectorXd> vin(v, n);
  std::vector<double> t(m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < m; ++j) t[j] = coef[j] * z.col(j).dot(vin);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) s += z(i, j) * t[j];
    out[i] = s;
  }
}

void rank_one_apply_serial(const Eigen::MatrixXd& z, const double* coef, const double* v, double* out) {
  const Eigen::Index n = z.rows();
  const Eigen::Index m = z.cols();
  std::vector<double> t(m, 0.0);
  for (Eigen::Index j = 0; j < m; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += z(i, j) * v[i];
    t[j] = coef[j] * s;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) s += z(i, j) * t[j];
    out[i] = s;
  }
}

void rank_one_quadratic(const Eigen::MatrixXd& d, const Eigen::MatrixXd& z, double* out) {
  const Eigen::Index m = z.cols();
#pragma omp parallel
  {
    Eigen::VectorXd dz(z.rows());
#pragma omp for schedule(static)
    for (Eigen::Index j = 0; j < m; ++j) {
      dz.noalias() = d * z.col(j);
      out[j] = z.col(j).dot(dz);
    }
  }
}

void rank_one_quadratic_serial(const Eigen::MatrixXd& d, const Eigen::MatrixXd& z, double* out) {
  const Eigen::Index n = z.rows();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      double row = 0.0;
      for (Eigen::Index b = 0; b < n; ++b) row += d(a, b) * z(b, j);
      s += z(a, j) * row;
    }
    out[j] = s;
  }
}

void csr_quadratic(const Eigen::MatrixXd& d, const Csr& b, double* out) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < b.rows; ++r) {
    double s = 0.0;
    for (int p = b.ptr[r]; p < b.ptr[r + 1]; ++p)
      for (int q = b.ptr[r]; q < b.ptr[r + 1]; ++q) s += b.val[p] * b.val[q] * d(b.idx[p], b.idx[q]);
    out[r] = s;
  }
}

void csr_quadratic_serial(const Eigen::MatrixXd& d, const Csr& b, double* out) {
  for (int r = 0; r < b.rows; ++r) {
    double s = 0.0;
    for (int p = b.ptr[r]; p < b.ptr[r + 1]; ++p)
      for (int q = b.ptr[r]; q < b.ptr[r + 1]; ++q) s += b.val[p] * b.val[q] * d(b.idx[p], b.idx[q]);
    out[r] = s;
  }
}

}  // namespace partcolor::kernels
