#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "calderon/dual.hpp"
#include "calderon/errors.hpp"
#include "calderon/linalg.hpp"

namespace calderon {

namespace detail {

inline void require_finite(double v, int row, int col, const char* what) {
  if (!std::isfinite(v))
    throw numerical_error(std::string(what) + ": non-finite output at entry (" +
                          std::to_string(row) + ", " + std::to_string(col) + ")");
}

} // namespace detail

/// Jacobian of f: R^n -> R^m by forward-mode seeding of one unit direction at
/// a time. f must be callable as f(std::span<const Dual>) -> std::vector<Dual>.
template <class F>
DenseMatrix jacobian(F&& f, std::span<const double> at) {
  const int n = static_cast<int>(at.size());
  std::vector<Dual> x(at.begin(), at.end());
  DenseMatrix jac;
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)].d = 1.0;
    const std::vector<Dual> y = f(std::span<const Dual>(x));
    x[static_cast<std::size_t>(i)].d = 0.0;
    if (i == 0) jac = DenseMatrix(static_cast<int>(y.size()), n);
    for (int j = 0; j < static_cast<int>(y.size()); ++j) {
      const Dual& out = y[static_cast<std::size_t>(j)];
      detail::require_finite(out.v, j, i, "jacobian");
      detail::require_finite(out.d, j, i, "jacobian");
      jac(j, i) = out.d;
    }
  }
  if (n == 0) throw invalid_input_error("jacobian: empty evaluation point");
  return jac;
}

/// Gradient of a scalar f: R^n -> R. f must be callable as
/// f(std::span<const Dual>) -> Dual.
template <class F>
std::vector<double> gradient(F&& f, std::span<const double> at) {
  const int n = static_cast<int>(at.size());
  std::vector<Dual> x(at.begin(), at.end());
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)].d = 1.0;
    const Dual y = f(std::span<const Dual>(x));
    x[static_cast<std::size_t>(i)].d = 0.0;
    detail::require_finite(y.v, 0, i, "gradient");
    detail::require_finite(y.d, 0, i, "gradient");
    g[static_cast<std::size_t>(i)] = y.d;
  }
  return g;
}

/// Hessian of a scalar f: R^n -> R via n(n+1)/2 second-order dual
/// evaluations, one per unordered index pair; the (q, p) entry mirrors
/// (p, q). f must be callable as f(std::span<const Dual2>) -> Dual2.
template <class F>
DenseMatrix hessian(F&& f, std::span<const double> at) {
  const int n = static_cast<int>(at.size());
  std::vector<Dual2> x(at.begin(), at.end());
  DenseMatrix h(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = p; q < n; ++q) {
      x[static_cast<std::size_t>(p)].da = 1.0;
      x[static_cast<std::size_t>(q)].db = 1.0;
      const Dual2 y = f(std::span<const Dual2>(x));
      x[static_cast<std::size_t>(p)].da = 0.0;
      x[static_cast<std::size_t>(q)].db = 0.0;
      detail::require_finite(y.dab, p, q, "hessian");
      h(p, q) = y.dab;
      h(q, p) = y.dab;
    }
  }
  return h;
}

/// Central-difference Jacobian oracle: (f(x + h e_i) - f(x - h e_i)) / (2h).
/// f must be callable as f(std::span<const double>) -> std::vector<double>.
template <class F>
DenseMatrix finite_difference_jacobian(F&& f, std::span<const double> at,
                                       double step = 1e-6) {
  if (!(step > 0.0)) throw invalid_input_error("finite difference step must be > 0");
  const int n = static_cast<int>(at.size());
  std::vector<double> x(at.begin(), at.end());
  DenseMatrix jac;
  for (int i = 0; i < n; ++i) {
    const double saved = x[static_cast<std::size_t>(i)];
    x[static_cast<std::size_t>(i)] = saved + step;
    const std::vector<double> up = f(std::span<const double>(x));
    x[static_cast<std::size_t>(i)] = saved - step;
    const std::vector<double> dn = f(std::span<const double>(x));
    x[static_cast<std::size_t>(i)] = saved;
    if (i == 0) jac = DenseMatrix(static_cast<int>(up.size()), n);
    for (int j = 0; j < static_cast<int>(up.size()); ++j)
      jac(j, i) = (up[static_cast<std::size_t>(j)] - dn[static_cast<std::size_t>(j)]) /
                  (2.0 * step);
  }
  return jac;
}

} // namespace calderon
