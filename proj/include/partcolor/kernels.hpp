#pragma once

// Hot inner loops shared by the operator families, the Laplacian solver and the
// set-system solver. Each kernel has an OpenMP version (the default) and a plain
// serial reference used by the tests and the benchmark. Every parallel kernel
// writes each output entry from exactly one thread, in a fixed summation order,
// so results do not depend on the thread count.

#include <Eigen/Dense>
#include <vector>

namespace partcolor::kernels {

struct Csr {
  int rows = 0;
  int cols = 0;
  std::vector<int> ptr{0};
  std::vector<int> idx;
  std::vector<double> val;

  struct Entry {
    int row;
    int col;
    double value;
  };
  // Duplicate (row, col) entries are summed; column indices end up sorted per row.
  static Csr from_entries(int rows, int cols, std::vector<Entry> entries);
  Csr transpose() const;
  int nnz() const { return static_cast<int>(idx.size()); }
};

// y = A x
void spmv(const Csr& a, const double* x, double* y);
void spmv_serial(const Csr& a, const double* x, double* y);

// out = Z diag(coef) Zᵀ v, Z stored column-major with one atom vector per column.
void rank_one_apply(const Eigen::MatrixXd& z, const double* coef, const double* v, double* out);
void rank_one_apply_serial(const Eigen::MatrixXd& z, const double* coef, const double* v, double* out);

// out_j = z_jᵀ D z_j for every column z_j of Z.
void rank_one_quadratic(const Eigen::MatrixXd& d, const Eigen::MatrixXd& z, double* out);
void rank_one_quadratic_serial(const Eigen::MatrixXd& d, const Eigen::MatrixXd& z, double* out);

// out_i = b_iᵀ D b_i for every sparse row b_i of B.
void csr_quadratic(const Eigen::MatrixXd& d, const Csr& b, double* out);
void csr_quadratic_serial(const Eigen::MatrixXd& d, const Csr& b, double* out);

}  // namespace partcolor::kernels
