#include "calderon/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "calderon/dual.hpp"

namespace calderon {

void check_forward_inputs(const RadialGeometry& geom, const Conductivity& sigma,
                          int m, int max_harmonic) {
  sigma.check_compatible(geom);
  if (m < 1) throw invalid_input_error("measurement count must be >= 1");
  if (m > max_harmonic)
    throw invalid_input_error("measurement count " + std::to_string(m) +
                              " exceeds the harmonic cap " +
                              std::to_string(max_harmonic));
}

TransferCoefficients transfer_coefficients(const RadialGeometry& geom,
                                           const Conductivity& sigma, int m,
                                           int max_harmonic) {
  check_forward_inputs(geom, sigma, m, max_harmonic);
  const int n = geom.annulus_count();
  std::vector<double> c_matrix, rho;
  detail::transfer_kernel<double>(geom, sigma.span(), m, c_matrix, rho);
  return {DenseMatrix(n, m, std::move(c_matrix)), std::move(rho)};
}

MeasurementVector forward_map(const RadialGeometry& geom, const Conductivity& sigma,
                              int m, int max_harmonic) {
  check_forward_inputs(geom, sigma, m, max_harmonic);
  return MeasurementVector(detail::forward_kernel<double>(geom, sigma.span(), m));
}

PotentialCoefficients potential_coefficients(const RadialGeometry& geom,
                                             const Conductivity& sigma, int m,
                                             int max_harmonic) {
  check_forward_inputs(geom, sigma, m, max_harmonic);
  const int n = geom.annulus_count();
  std::vector<double> c_matrix, rho;
  detail::transfer_kernel<double>(geom, sigma.span(), m, c_matrix, rho);

  DenseMatrix alpha(n, m), beta(n, m);
  for (int j = 1; j <= m; ++j) {
    const double c1 = c_matrix[static_cast<std::size_t>(j - 1)];
    alpha(0, j - 1) = 1.0 / (sigma[0] * j * (1.0 - c1));
    beta(0, j - 1) = c1 * alpha(0, j - 1);
    for (int i = 1; i < n; ++i) {
      // Continuity of u and of the flux across the interface at r_i.
      const double rj = std::pow(geom.radius(i), j);
      const double u = alpha(i - 1, j - 1) * rj + beta(i - 1, j - 1) / rj;
      const double w =
          sigma[i - 1] * (alpha(i - 1, j - 1) * rj - beta(i - 1, j - 1) / rj);
      alpha(i, j - 1) = (u + w / sigma[i]) / (2.0 * rj);
      beta(i, j - 1) = (u - w / sigma[i]) * rj / 2.0;
    }
    beta(n - 1, j - 1) = 0.0;  // boundary condition at the disk center
  }
  return {std::move(alpha), std::move(beta)};
}

PotentialCoefficients solve_potential_system(const RadialGeometry& geom,
                                             const Conductivity& sigma, int m,
                                             int max_harmonic) {
  check_forward_inputs(geom, sigma, m, max_harmonic);
  const int n = geom.annulus_count();
  const int dim = 2 * n - 1;  // alpha_1..alpha_n, beta_1..beta_{n-1}

  DenseMatrix alpha(n, m), beta(n, m);
  for (int j = 1; j <= m; ++j) {
    DenseMatrix a(dim, dim);
    std::vector<double> rhs(static_cast<std::size_t>(dim), 0.0);

    // Flux normalization at the boundary: sigma_1 j (alpha_1 - beta_1) = 1.
    a(0, 0) = sigma[0] * j;
    if (n > 1) a(0, n) = -sigma[0] * j;
    rhs[0] = 1.0;

    for (int i = 1; i < n; ++i) {
      const double rj = std::pow(geom.radius(i), j);
      const double rmj = 1.0 / rj;
      const int row_u = 2 * i - 1;
      const int row_w = 2 * i;
      // u continuous: alpha_i r^j + beta_i r^-j = alpha_{i+1} r^j + beta_{i+1} r^-j
      a(row_u, i - 1) = rj;
      a(row_u, n + (i - 1)) = rmj;
      a(row_u, i) = -rj;
      if (i + 1 < n) a(row_u, n + i) = -rmj;
      // flux continuous: sigma_i(alpha_i r^j - beta_i r^-j) = sigma_{i+1}(...)
      a(row_w, i - 1) = sigma[i - 1] * rj;
      a(row_w, n + (i - 1)) = -sigma[i - 1] * rmj;
      a(row_w, i) = -sigma[i] * rj;
      if (i + 1 < n) a(row_w, n + i) = sigma[i] * rmj;
    }

    // Row equilibration keeps the r^-j entries from dominating the pivoting.
    for (int r = 0; r < dim; ++r) {
      double s = 0.0;
      for (int c = 0; c < dim; ++c) s = std::max(s, std::abs(a(r, c)));
      if (s > 0.0) {
        for (int c = 0; c < dim; ++c) a(r, c) /= s;
        rhs[static_cast<std::size_t>(r)] /= s;
      }
    }

    std::vector<double> x;
    try {
      x = lu_solve(a, rhs);
    } catch (const numerical_error&) {
      throw numerical_error("potential system is numerically singular at j = " +
                            std::to_string(j));
    }
    for (int i = 0; i < n; ++i) {
      alpha(i, j - 1) = x[static_cast<std::size_t>(i)];
      beta(i, j - 1) = (i + 1 < n) ? x[static_cast<std::size_t>(n + i)] : 0.0;
    }
  }
  return {std::move(alpha), std::move(beta)};
}

DenseMatrix analytic_jacobian(const RadialGeometry& geom, const Conductivity& sigma,
                              int m, int max_harmonic) {
  const PotentialCoefficients p = potential_coefficients(geom, sigma, m, max_harmonic);
  const int n = geom.annulus_count();
  DenseMatrix jac(m, n);
  for (int j = 1; j <= m; ++j) {
    for (int i = 1; i <= n; ++i) {
      const double r_out = geom.radius(i - 1);
      const double r_in = geom.radius(i);
      const double a = p.alpha(i - 1, j - 1);
      const double term_alpha =
          a * a * (std::pow(r_out, 2 * j) - std::pow(r_in, 2 * j));
      double term_beta = 0.0;
      if (i < n) {
        const double b = p.beta(i - 1, j - 1);
        term_beta = b * b * (std::pow(r_in, -2 * j) - std::pow(r_out, -2 * j));
      }
      // i == n: beta_{n,j} = 0 and r_n = 0, so the beta term is exactly 0 and
      // the r^-2j factors must not be evaluated.
      jac(j - 1, i - 1) = -j * (term_alpha + term_beta);
    }
  }
  return jac;
}

std::vector<DenseMatrix> forward_map_hessians(const RadialGeometry& geom,
                                              const Conductivity& sigma, int m,
                                              int max_harmonic) {
  check_forward_inputs(geom, sigma, m, max_harmonic);
  const int n = geom.annulus_count();
  std::vector<DenseMatrix> hessians(static_cast<std::size_t>(m), DenseMatrix(n, n));
  std::vector<Dual2> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = Dual2(sigma[i]);
  for (int p = 0; p < n; ++p) {
    for (int q = p; q < n; ++q) {
      x[static_cast<std::size_t>(p)].da = 1.0;
      x[static_cast<std::size_t>(q)].db = 1.0;
      const std::vector<Dual2> lambda =
          detail::forward_kernel<Dual2>(geom, std::span<const Dual2>(x), m);
      x[static_cast<std::size_t>(p)].da = 0.0;
      x[static_cast<std::size_t>(q)].db = 0.0;
      for (int j = 0; j < m; ++j) {
        hessians[static_cast<std::size_t>(j)](p, q) = lambda[static_cast<std::size_t>(j)].dab;
        hessians[static_cast<std::size_t>(j)](q, p) = lambda[static_cast<std::size_t>(j)].dab;
      }
    }
  }
  return hessians;
}

} // namespace calderon
