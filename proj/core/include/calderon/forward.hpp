#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "calderon/geometry.hpp"
#include "calderon/linalg.hpp"

namespace calderon {

/// Transfer coefficients C_{i,j} linking the potential expansion across
/// annuli, plus the interface reflection coefficients rho_i.
struct TransferCoefficients {
  DenseMatrix c;            // n x m, C_{i,j} at (i-1, j-1)
  std::vector<double> rho;  // n-1 entries, rho_i at (i-1)
};

/// Coefficients of u_j(r, theta) = (alpha_{i,j} r^j + beta_{i,j} r^{-j})
/// cos(j theta) on each annulus.
struct PotentialCoefficients {
  DenseMatrix alpha;  // n x m
  DenseMatrix beta;   // n x m, beta_{n,j} = 0
};

namespace detail {

/// Backward recurrence for the transfer coefficients, generic over the
/// scalar type so dual numbers can flow through it. c_matrix is n x m
/// row-major with C_{i,j} at (i-1)*m + (j-1).
template <class T>
void transfer_kernel(const RadialGeometry& geom, std::span<const T> sigma, int m,
                     std::vector<T>& c_matrix, std::vector<T>& rho) {
  const int n = geom.annulus_count();
  c_matrix.assign(static_cast<std::size_t>(n) * m, T(0.0));
  rho.assign(n > 1 ? static_cast<std::size_t>(n - 1) : 0, T(0.0));
  for (int i = 1; i < n; ++i) {
    const T& s_out = sigma[static_cast<std::size_t>(i - 1)];
    const T& s_in = sigma[static_cast<std::size_t>(i)];
    rho[static_cast<std::size_t>(i - 1)] = (s_out - s_in) / (s_out + s_in);
  }
  for (int j = 1; j <= m; ++j) {
    // C_{n,j} = 0 is the assign above; walk interfaces inward-out.
    for (int i = n - 1; i >= 1; --i) {
      const double r2j = std::pow(geom.radius(i), 2 * j);
      const T& c_next = c_matrix[static_cast<std::size_t>(i) * m + (j - 1)];
      const T& rh = rho[static_cast<std::size_t>(i - 1)];
      const T num = rh * r2j + c_next;
      const T den = T(1.0) + rh * (c_next / T(r2j));
      c_matrix[static_cast<std::size_t>(i - 1) * m + (j - 1)] = num / den;
    }
  }
}

/// lambda_j(sigma) = (1 + C_{1,j}) / (j sigma_1 (1 - C_{1,j})).
template <class T>
std::vector<T> forward_kernel(const RadialGeometry& geom, std::span<const T> sigma,
                              int m) {
  std::vector<T> c_matrix, rho;
  transfer_kernel(geom, sigma, m, c_matrix, rho);
  std::vector<T> lambda(static_cast<std::size_t>(m));
  for (int j = 1; j <= m; ++j) {
    const T& c1 = c_matrix[static_cast<std::size_t>(j - 1)];
    lambda[static_cast<std::size_t>(j - 1)] =
        (T(1.0) + c1) / (T(static_cast<double>(j)) * sigma[0] * (T(1.0) - c1));
  }
  return lambda;
}

} // namespace detail

/// Validates (geom, sigma, m) and the harmonic cap. All forward-map entry
/// points funnel through this.
void check_forward_inputs(const RadialGeometry& geom, const Conductivity& sigma,
                          int m, int max_harmonic = kDefaultMaxHarmonic);

TransferCoefficients transfer_coefficients(const RadialGeometry& geom,
                                           const Conductivity& sigma, int m,
                                           int max_harmonic = kDefaultMaxHarmonic);

MeasurementVector forward_map(const RadialGeometry& geom, const Conductivity& sigma,
                              int m, int max_harmonic = kDefaultMaxHarmonic);

/// Production path for the potential coefficients: back-substitution from
/// alpha_{1,j} = 1/(sigma_1 j (1 - C_{1,j})) across interfaces, O(nm) instead
/// of re-solving the full linear system. beta_{n,j} is set to exactly 0.
PotentialCoefficients potential_coefficients(const RadialGeometry& geom,
                                             const Conductivity& sigma, int m,
                                             int max_harmonic = kDefaultMaxHarmonic);

/// Independent oracle: for each j solves the dense (2n-1)-unknown interface
/// system by LU (beta_{n,j} = 0 imposed). Shares no code with the recurrence;
/// lambda_j is recoverable as alpha_{1,j} + beta_{1,j}.
PotentialCoefficients solve_potential_system(const RadialGeometry& geom,
                                             const Conductivity& sigma, int m,
                                             int max_harmonic = kDefaultMaxHarmonic);

/// Jacobian of the forward map from the closed annulus integrals:
///   d lambda_j / d sigma_i =
///     -j [alpha_{i,j}^2 (r_{i-1}^{2j} - r_i^{2j})
///         + beta_{i,j}^2 (r_i^{-2j} - r_{i-1}^{-2j})].
/// Entry (j-1, i-1) of the returned m x n matrix; all entries are strictly
/// negative. The innermost beta term is identically zero (beta_{n,j} = 0) and
/// is never evaluated, avoiding 0 * inf at r_n = 0.
DenseMatrix analytic_jacobian(const RadialGeometry& geom, const Conductivity& sigma,
                              int m, int max_harmonic = kDefaultMaxHarmonic);

/// Hessians of every lambda_j at once, one second-order dual sweep per index
/// pair. Returned in measurement order, each n x n and symmetric by
/// construction.
std::vector<DenseMatrix> forward_map_hessians(const RadialGeometry& geom,
                                              const Conductivity& sigma, int m,
                                              int max_harmonic = kDefaultMaxHarmonic);

} // namespace calderon
