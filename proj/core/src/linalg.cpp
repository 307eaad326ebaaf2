#include "calderon/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace calderon {

DenseMatrix::DenseMatrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw invalid_input_error("matrix data length does not match rows*cols");
}

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix DenseMatrix::minor_matrix(int r, int c) const {
  DenseMatrix m(rows_ - 1, cols_ - 1);
  for (int i = 0, mi = 0; i < rows_; ++i) {
    if (i == r) continue;
    for (int j = 0, mj = 0; j < cols_; ++j) {
      if (j == c) continue;
      m(mi, mj) = (*this)(i, j);
      ++mj;
    }
    ++mi;
  }
  return m;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cols_)
    throw invalid_input_error("matrix-vector size mismatch");
  std::vector<double> y(static_cast<std::size_t>(rows_), 0.0);
  for (int r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (int c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
  return y;
}

DenseMatrix DenseMatrix::multiply(const DenseMatrix& other) const {
  if (cols_ != other.rows_) throw invalid_input_error("matrix-matrix size mismatch");
  DenseMatrix out(rows_, other.cols_);
  for (int r = 0; r < rows_; ++r)
    for (int k = 0; k < cols_; ++k) {
      const double a = (*this)(r, k);
      if (a == 0.0) continue;
      for (int c = 0; c < other.cols_; ++c) out(r, c) += a * other(k, c);
    }
  return out;
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

struct LuFactors {
  DenseMatrix lu;
  std::vector<int> perm;
  int sign = 1;
  double min_pivot = std::numeric_limits<double>::infinity();
};

LuFactors lu_factorize(DenseMatrix a) {
  const int n = a.rows();
  LuFactors f{std::move(a), std::vector<int>(static_cast<std::size_t>(n)), 1,
              std::numeric_limits<double>::infinity()};
  DenseMatrix& m = f.lu;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(m(k, k));
    for (int r = k + 1; r < n; ++r) {
      const double v = std::abs(m(r, k));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    f.perm[static_cast<std::size_t>(k)] = piv;
    if (piv != k) {
      for (int c = 0; c < n; ++c) std::swap(m(k, c), m(piv, c));
      f.sign = -f.sign;
    }
    const double pivot = m(k, k);
    f.min_pivot = std::min(f.min_pivot, std::abs(pivot));
    if (pivot == 0.0) continue;
    for (int r = k + 1; r < n; ++r) {
      const double mult = m(r, k) / pivot;
      m(r, k) = mult;
      if (mult == 0.0) continue;
      for (int c = k + 1; c < n; ++c) m(r, c) -= mult * m(k, c);
    }
  }
  return f;
}

} // namespace

double lu_det(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw invalid_input_error("determinant needs a square matrix");
  if (a.rows() == 0) return 1.0;
  LuFactors f = lu_factorize(a);
  double det = f.sign;
  for (int k = 0; k < a.rows(); ++k) det *= f.lu(k, k);
  return det;
}

std::vector<double> lu_solve(const DenseMatrix& a, std::span<const double> b) {
  const int n = a.rows();
  if (a.rows() != a.cols()) throw invalid_input_error("lu_solve needs a square matrix");
  if (static_cast<int>(b.size()) != n) throw invalid_input_error("lu_solve rhs size mismatch");
  LuFactors f = lu_factorize(a);
  if (!(f.min_pivot > 1e-300))
    throw numerical_error("lu_solve: matrix is numerically singular");
  std::vector<double> x(b.begin(), b.end());
  for (int k = 0; k < n; ++k)
    std::swap(x[static_cast<std::size_t>(k)], x[static_cast<std::size_t>(f.perm[static_cast<std::size_t>(k)])]);
  for (int k = 0; k < n; ++k)
    for (int r = k + 1; r < n; ++r)
      x[static_cast<std::size_t>(r)] -= f.lu(r, k) * x[static_cast<std::size_t>(k)];
  for (int k = n - 1; k >= 0; --k) {
    for (int c = k + 1; c < n; ++c)
      x[static_cast<std::size_t>(k)] -= f.lu(k, c) * x[static_cast<std::size_t>(c)];
    x[static_cast<std::size_t>(k)] /= f.lu(k, k);
  }
  return x;
}

std::vector<double> jacobi_svd(const DenseMatrix& a) {
  // Work on a tall copy; singular values are transpose-invariant.
  DenseMatrix m = a.rows() >= a.cols() ? a : a.transposed();
  const int rows = m.rows();
  const int cols = m.cols();
  const double tol = std::numeric_limits<double>::epsilon() * rows;

  auto col_dot = [&](int p, int q) {
    double acc = 0.0;
    for (int r = 0; r < rows; ++r) acc += m(r, p) * m(r, q);
    return acc;
  };

  constexpr int kMaxSweeps = 60;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (int p = 0; p < cols - 1; ++p) {
      for (int q = p + 1; q < cols; ++q) {
        const double app = col_dot(p, p);
        const double aqq = col_dot(q, q);
        const double apq = col_dot(p, q);
        if (app == 0.0 || aqq == 0.0) continue;
        if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
        converged = false;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int r = 0; r < rows; ++r) {
          const double vp = m(r, p);
          const double vq = m(r, q);
          m(r, p) = c * vp - s * vq;
          m(r, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged)
    throw numerical_error("jacobi_svd: no convergence after 60 sweeps");

  std::vector<double> sv(static_cast<std::size_t>(cols));
  for (int p = 0; p < cols; ++p) sv[static_cast<std::size_t>(p)] = std::sqrt(col_dot(p, p));
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

std::optional<DenseMatrix> cholesky(const DenseMatrix& a) {
  const int n = a.rows();
  if (a.rows() != a.cols()) throw invalid_input_error("cholesky needs a square matrix");
  DenseMatrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (int k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) return std::nullopt;
    l(j, j) = std::sqrt(diag);
    for (int i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

std::vector<double> cholesky_solve(const DenseMatrix& lower, std::span<const double> b) {
  const int n = lower.rows();
  if (static_cast<int>(b.size()) != n)
    throw invalid_input_error("cholesky_solve rhs size mismatch");
  std::vector<double> x(b.begin(), b.end());
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) x[static_cast<std::size_t>(i)] -= lower(i, k) * x[static_cast<std::size_t>(k)];
    x[static_cast<std::size_t>(i)] /= lower(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int k = i + 1; k < n; ++k) x[static_cast<std::size_t>(i)] -= lower(k, i) * x[static_cast<std::size_t>(k)];
    x[static_cast<std::size_t>(i)] /= lower(i, i);
  }
  return x;
}

} // namespace calderon
