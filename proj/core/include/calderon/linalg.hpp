#pragma once

#include <optional>
#include <span>
#include <vector>

#include "calderon/errors.hpp"

namespace calderon {

/// Row-major dense matrix of doubles. Small sizes only; everything in this
/// project is at most a few thousand rows and usually under ten.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0) {}
  DenseMatrix(int rows, int cols, std::vector<double> data);

  static DenseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  DenseMatrix transposed() const;

  /// Removes row `r` and column `c` (0-based); used for the Lambda'_{[n-1]}
  /// and M_k submatrices.
  DenseMatrix minor_matrix(int r, int c) const;

  std::vector<double> multiply(std::span<const double> x) const;
  DenseMatrix multiply(const DenseMatrix& other) const;

  double max_abs() const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Determinant via LU with partial pivoting. Returns 0 for a numerically
/// singular matrix instead of throwing.
double lu_det(const DenseMatrix& a);

/// Solves A x = b by LU with partial pivoting. Throws numerical_error when a
/// pivot falls below 1e-300.
std::vector<double> lu_solve(const DenseMatrix& a, std::span<const double> b);

/// Singular values in descending order via one-sided Jacobi on the columns.
/// Chosen over normal equations so that singular values many orders below the
/// norm keep relative accuracy. Throws numerical_error after 60 sweeps
/// without convergence.
std::vector<double> jacobi_svd(const DenseMatrix& a);

/// Lower Cholesky factor of a symmetric matrix, or nullopt when the matrix is
/// not positive definite. The failure case is a query, not an error.
std::optional<DenseMatrix> cholesky(const DenseMatrix& a);

/// Solves L L^T x = b given the lower factor from cholesky().
std::vector<double> cholesky_solve(const DenseMatrix& lower, std::span<const double> b);

} // namespace calderon
