#pragma once

#include <vector>

#include "calderon/forward.hpp"
#include "calderon/geometry.hpp"
#include "calderon/linalg.hpp"

namespace calderon {

/// Uniform per-axis grid I_k = {a + (i/(k-1))(b-a) : 0 <= i <= k-1} over the
/// prior box, k points per axis.
struct GridSpec {
  int k = 0;
  BoxPrior box;

  GridSpec() = default;
  GridSpec(int points_per_axis, BoxPrior prior);

  /// Exact endpoints: coordinate(0) == a, coordinate(k-1) == b.
  double coordinate(int idx) const;
};

/// Minima of the signed determinants and smallest singular values over a
/// grid scan, with the conductivities attaining them.
struct ScanReport {
  int n = 0;
  int m = 0;
  double min_signed_det_full = 0.0;
  double min_signed_det_sub = 0.0;
  double min_signed_det_mk = 0.0;
  double min_sigma_min_full = 0.0;
  double min_sigma_min_sub = 0.0;
  std::vector<double> argmin_det_full;
  std::vector<double> argmin_det_sub;
  std::vector<double> argmin_det_mk;
  std::vector<double> argmin_sigma_min_full;
  std::vector<double> argmin_sigma_min_sub;
  long sign_violations = 0;
  long points_scanned = 0;
};

/// Per-point rows for the scan CSV (sigma_1..sigma_n, det_full, det_sub,
/// det_Mk_min, sigma_min_full, sigma_min_sub).
struct ScanRow {
  std::vector<double> sigma;
  double det_full = 0.0;
  double det_sub = 0.0;
  double det_mk_min = 0.0;
  double sigma_min_full = 0.0;
  double sigma_min_sub = 0.0;
};

/// 0.5 * ||Lambda(sigma) - y||_2^2 and its derivatives.
double least_squares_objective(const RadialGeometry& geom, const Conductivity& sigma,
                               const MeasurementVector& y);
std::vector<double> least_squares_gradient(const RadialGeometry& geom,
                                           const Conductivity& sigma,
                                           const MeasurementVector& y);
DenseMatrix least_squares_hessian(const RadialGeometry& geom, const Conductivity& sigma,
                                  const MeasurementVector& y);

/// Signs used in the determinant scans: (-1)^(n(n+1)/2) for the full Jacobian
/// and (-1)^(n(n-1)/2) for the submatrices with the last row removed.
double det_sign_full(int n);
double det_sign_sub(int n);

/// Evaluates, over every sigma in I_k^n with m = n, the signed determinants
/// of Lambda', of Lambda'_{[n-1]} (last row and first column removed) and of
/// every M_k (last row and k-th column removed), plus the smallest singular
/// values of the first two. A sign violation is any signed determinant <= 0.
ScanReport scan_determinant_signs(const RadialGeometry& geom, const GridSpec& grid,
                                  int m, unsigned threads = 0,
                                  std::vector<ScanRow>* rows = nullptr);

/// Closed-form Jacobian at sigma = 1: entry (j,i) = -(r_{i-1}^{2j} - r_i^{2j})/j.
DenseMatrix harmonic_jacobian(const RadialGeometry& geom, int m);

/// Checks sign(det Lambda'(1)) = (-1)^(n(n+1)/2) and
/// sign(det Lambda'_{[n-1]}(1)) = (-1)^(n(n-1)/2).
bool vandermonde_sign_check(const RadialGeometry& geom);

/// The n = 2 ratio h_j = d1 lambda_j / d2 lambda_j, both as computed from the
/// Jacobian and in closed form
///   (1/(4 sigma_1^2)) [r_1^{-2j}(sigma_1+sigma_2)^2
///                      - r_1^{2j}(sigma_1-sigma_2)^2 - 4 sigma_1 sigma_2].
struct RatioH {
  double from_jacobian = 0.0;
  double closed_form = 0.0;
};
RatioH ratio_h(const RadialGeometry& geom, const Conductivity& sigma, int j);

/// g'(sigma_1) = -(Lambda'_{[n-1]})^{-1} (d1 lambda_j)_{j=1..n-1} and its
/// entry signs. Entry k (1-based) moves annulus k+1; alternation means
/// sign(g'_k) = (-1)^k.
struct AlternatingSigns {
  std::vector<double> g_prime;
  std::vector<int> signs;
  bool alternating = false;
};
AlternatingSigns alternating_sign_check(const RadialGeometry& geom,
                                        const Conductivity& sigma);

/// Samples of the one-dimensional least-squares objective and its second
/// derivative (CSV columns sigma, f, f2).
struct Landscape1dSample {
  double sigma = 0.0;
  double f = 0.0;
  double f2 = 0.0;
};
std::vector<Landscape1dSample> trace_1d_landscape(const RadialGeometry& geom,
                                                  const Conductivity& sigma_true,
                                                  int m, double lo, double hi,
                                                  int samples = 401);

/// Continuation trace of the implicit curve lambda_1(sigma_1, g(sigma_1)) =
/// lambda_1(sigma_true) and of h(sigma_1) = lambda_2(sigma_1, g(sigma_1)),
/// n = m = 2. The sample at sigma_1 = sigma_true_1 is always included.
struct ImplicitCurveSample {
  double sigma1 = 0.0;
  double g = 0.0;
  double h = 0.0;
};
std::vector<ImplicitCurveSample> trace_implicit_curves(const RadialGeometry& geom,
                                                       const Conductivity& sigma_true,
                                                       double lo, double hi,
                                                       int steps = 400);

/// Cells of a gradient-sign scan in which both components of grad f change
/// sign. cluster_count groups 8-connected candidate cells.
struct CriticalCell {
  int i = 0;  // cell index along sigma_1
  int j = 0;  // cell index along sigma_2
  double s1_lo = 0.0, s1_hi = 0.0;
  double s2_lo = 0.0, s2_hi = 0.0;

  bool contains(double s1, double s2) const {
    return s1 >= s1_lo && s1 <= s1_hi && s2 >= s2_lo && s2 <= s2_hi;
  }
};
struct CriticalPointScan {
  std::vector<CriticalCell> cells;
  int cluster_count = 0;
};
CriticalPointScan grid_critical_point_scan(const RadialGeometry& geom,
                                           const Conductivity& sigma_true,
                                           const GridSpec& grid,
                                           unsigned threads = 0);

} // namespace calderon
