#include "calderon/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "calderon/autodiff.hpp"
#include "calderon/parallel.hpp"

namespace calderon {

GridSpec::GridSpec(int points_per_axis, BoxPrior prior) : k(points_per_axis), box(prior) {
  if (k < 2) throw invalid_input_error("grid needs at least 2 points per axis");
}

double GridSpec::coordinate(int idx) const {
  if (idx == 0) return box.a;
  if (idx == k - 1) return box.b;
  return box.a + (static_cast<double>(idx) / (k - 1)) * (box.b - box.a);
}

double least_squares_objective(const RadialGeometry& geom, const Conductivity& sigma,
                               const MeasurementVector& y) {
  check_forward_inputs(geom, sigma, y.size());
  const MeasurementVector lambda = forward_map(geom, sigma, y.size());
  double acc = 0.0;
  for (int j = 0; j < y.size(); ++j) {
    const double r = lambda[j] - y[j];
    acc += r * r;
  }
  return 0.5 * acc;
}

std::vector<double> least_squares_gradient(const RadialGeometry& geom,
                                           const Conductivity& sigma,
                                           const MeasurementVector& y) {
  const int m = y.size();
  const MeasurementVector lambda = forward_map(geom, sigma, m);
  const DenseMatrix jac = analytic_jacobian(geom, sigma, m);
  std::vector<double> g(static_cast<std::size_t>(sigma.size()), 0.0);
  for (int i = 0; i < sigma.size(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += jac(j, i) * (lambda[j] - y[j]);
    g[static_cast<std::size_t>(i)] = acc;
  }
  return g;
}

DenseMatrix least_squares_hessian(const RadialGeometry& geom, const Conductivity& sigma,
                                  const MeasurementVector& y) {
  check_forward_inputs(geom, sigma, y.size());
  const int m = y.size();
  auto objective = [&](std::span<const Dual2> s) {
    const std::vector<Dual2> lambda = detail::forward_kernel<Dual2>(geom, s, m);
    Dual2 acc(0.0);
    for (int j = 0; j < m; ++j) {
      const Dual2 r = lambda[static_cast<std::size_t>(j)] - Dual2(y[j]);
      acc += r * r;
    }
    return Dual2(0.5) * acc;
  };
  return hessian(objective, sigma.span());
}

double det_sign_full(int n) { return (n * (n + 1) / 2) % 2 == 0 ? 1.0 : -1.0; }
double det_sign_sub(int n) { return (n * (n - 1) / 2) % 2 == 0 ? 1.0 : -1.0; }

namespace {

void decode_grid_point(const GridSpec& grid, int n, long index, std::vector<double>& sigma) {
  sigma.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    sigma[static_cast<std::size_t>(i)] = grid.coordinate(static_cast<int>(index % grid.k));
    index /= grid.k;
  }
}

struct TrackedMin {
  double value = std::numeric_limits<double>::infinity();
  long index = -1;

  /// Deterministic regardless of visit order: ties resolved to the lowest
  /// grid index.
  void update(double v, long idx) {
    if (v < value || (v == value && (index < 0 || idx < index))) {
      value = v;
      index = idx;
    }
  }
  void merge(const TrackedMin& other) {
    if (other.index >= 0) update(other.value, other.index);
  }
};

} // namespace

ScanReport scan_determinant_signs(const RadialGeometry& geom, const GridSpec& grid,
                                  int m, unsigned threads,
                                  std::vector<ScanRow>* rows) {
  const int n = geom.annulus_count();
  if (n < 2) throw invalid_input_error("determinant scan needs n >= 2");
  if (m != n) throw invalid_input_error("determinant scan requires m = n");

  long total = 1;
  for (int i = 0; i < n; ++i) total *= grid.k;

  const double sf = det_sign_full(n);
  const double ss = det_sign_sub(n);

  struct Partial {
    TrackedMin det_full, det_sub, det_mk, smin_full, smin_sub;
    long violations = 0;
  };

  if (rows) rows->assign(static_cast<std::size_t>(total), ScanRow{});

  std::mutex merge_mutex;
  Partial global;

  const long chunk = 256;
  const long chunks = (total + chunk - 1) / chunk;
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t ci) {
    Partial local;
    std::vector<double> sigma_values;
    const long lo = static_cast<long>(ci) * chunk;
    const long hi = std::min(total, lo + chunk);
    for (long idx = lo; idx < hi; ++idx) {
      decode_grid_point(grid, n, idx, sigma_values);
      const Conductivity sigma(sigma_values);
      const DenseMatrix jac = analytic_jacobian(geom, sigma, m);

      const double dfull = sf * lu_det(jac);
      const DenseMatrix sub = jac.minor_matrix(n - 1, 0);
      const double dsub = ss * lu_det(sub);
      double dmk = std::numeric_limits<double>::infinity();
      for (int k = 1; k <= n; ++k) {
        const double d = ss * lu_det(jac.minor_matrix(n - 1, k - 1));
        dmk = std::min(dmk, d);
        if (!(d > 0.0)) ++local.violations;
      }
      if (!(dfull > 0.0)) ++local.violations;
      if (!(dsub > 0.0)) ++local.violations;

      const double smin_full = jacobi_svd(jac).back();
      const double smin_sub = jacobi_svd(sub).back();

      local.det_full.update(dfull, idx);
      local.det_sub.update(dsub, idx);
      local.det_mk.update(dmk, idx);
      local.smin_full.update(smin_full, idx);
      local.smin_sub.update(smin_sub, idx);

      if (rows) {
        ScanRow& row = (*rows)[static_cast<std::size_t>(idx)];
        row.sigma = sigma.values();
        row.det_full = dfull;
        row.det_sub = dsub;
        row.det_mk_min = dmk;
        row.sigma_min_full = smin_full;
        row.sigma_min_sub = smin_sub;
      }
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    global.det_full.merge(local.det_full);
    global.det_sub.merge(local.det_sub);
    global.det_mk.merge(local.det_mk);
    global.smin_full.merge(local.smin_full);
    global.smin_sub.merge(local.smin_sub);
    global.violations += local.violations;
  }, threads);

  ScanReport report;
  report.n = n;
  report.m = m;
  report.points_scanned = total;
  report.sign_violations = global.violations;
  report.min_signed_det_full = global.det_full.value;
  report.min_signed_det_sub = global.det_sub.value;
  report.min_signed_det_mk = global.det_mk.value;
  report.min_sigma_min_full = global.smin_full.value;
  report.min_sigma_min_sub = global.smin_sub.value;
  decode_grid_point(grid, n, global.det_full.index, report.argmin_det_full);
  decode_grid_point(grid, n, global.det_sub.index, report.argmin_det_sub);
  decode_grid_point(grid, n, global.det_mk.index, report.argmin_det_mk);
  decode_grid_point(grid, n, global.smin_full.index, report.argmin_sigma_min_full);
  decode_grid_point(grid, n, global.smin_sub.index, report.argmin_sigma_min_sub);
  return report;
}

DenseMatrix harmonic_jacobian(const RadialGeometry& geom, int m) {
  if (m < 1) throw invalid_input_error("measurement count must be >= 1");
  const int n = geom.annulus_count();
  DenseMatrix jac(m, n);
  for (int j = 1; j <= m; ++j)
    for (int i = 1; i <= n; ++i)
      jac(j - 1, i - 1) = -(std::pow(geom.radius(i - 1), 2 * j) -
                            std::pow(geom.radius(i), 2 * j)) /
                          j;
  return jac;
}

bool vandermonde_sign_check(const RadialGeometry& geom) {
  const int n = geom.annulus_count();
  const DenseMatrix jac = harmonic_jacobian(geom, n);
  const double dfull = det_sign_full(n) * lu_det(jac);
  if (!(dfull > 0.0)) return false;
  if (n == 1) return true;
  const double dsub = det_sign_sub(n) * lu_det(jac.minor_matrix(n - 1, 0));
  return dsub > 0.0;
}

RatioH ratio_h(const RadialGeometry& geom, const Conductivity& sigma, int j) {
  if (geom.annulus_count() != 2)
    throw invalid_input_error("ratio_h is defined for n = 2");
  sigma.check_compatible(geom);
  if (j < 1) throw invalid_input_error("harmonic index must be >= 1");

  const DenseMatrix jac = analytic_jacobian(geom, sigma, j);
  RatioH h;
  h.from_jacobian = jac(j - 1, 0) / jac(j - 1, 1);

  const double s1 = sigma[0];
  const double s2 = sigma[1];
  const double r2j = std::pow(geom.radius(1), 2 * j);
  const double sum = s1 + s2;
  const double dif = s1 - s2;
  h.closed_form =
      (sum * sum / r2j - dif * dif * r2j - 4.0 * s1 * s2) / (4.0 * s1 * s1);
  return h;
}

AlternatingSigns alternating_sign_check(const RadialGeometry& geom,
                                        const Conductivity& sigma) {
  const int n = geom.annulus_count();
  if (n < 2) throw invalid_input_error("alternating sign check needs n >= 2");
  sigma.check_compatible(geom);

  const DenseMatrix jac = analytic_jacobian(geom, sigma, n);
  const DenseMatrix sub = jac.minor_matrix(n - 1, 0);
  std::vector<double> rhs(static_cast<std::size_t>(n - 1));
  for (int j = 0; j < n - 1; ++j) rhs[static_cast<std::size_t>(j)] = jac(j, 0);

  std::vector<double> solved;
  try {
    solved = lu_solve(sub, rhs);
  } catch (const numerical_error&) {
    throw numerical_error("alternating_sign_check: Lambda'_{[n-1]} is singular");
  }

  AlternatingSigns out;
  out.g_prime.resize(solved.size());
  out.signs.resize(solved.size());
  out.alternating = true;
  for (std::size_t k = 0; k < solved.size(); ++k) {
    out.g_prime[k] = -solved[k];
    out.signs[k] = out.g_prime[k] > 0.0 ? 1 : (out.g_prime[k] < 0.0 ? -1 : 0);
    const int expected = (k % 2 == 0) ? -1 : 1;  // entry k+1 has sign (-1)^(k+1)
    if (out.signs[k] != expected) out.alternating = false;
  }
  return out;
}

std::vector<Landscape1dSample> trace_1d_landscape(const RadialGeometry& geom,
                                                  const Conductivity& sigma_true,
                                                  int m, double lo, double hi,
                                                  int samples) {
  if (geom.annulus_count() != 1)
    throw invalid_input_error("trace_1d_landscape is defined for n = 1");
  if (!(lo > 0.0) || !(lo < hi)) throw invalid_input_error("bad 1-d trace range");
  if (samples < 2) throw invalid_input_error("need at least 2 samples");
  sigma_true.check_compatible(geom);

  const MeasurementVector y = forward_map(geom, sigma_true, m);
  auto objective = [&](std::span<const Dual2> s) {
    const std::vector<Dual2> lambda = detail::forward_kernel<Dual2>(geom, s, m);
    Dual2 acc(0.0);
    for (int j = 0; j < m; ++j) {
      const Dual2 r = lambda[static_cast<std::size_t>(j)] - Dual2(y[j]);
      acc += r * r;
    }
    return Dual2(0.5) * acc;
  };

  std::vector<Landscape1dSample> out(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double s = lo + (hi - lo) * i / (samples - 1);
    std::vector<Dual2> x = {Dual2(s, 1.0, 1.0, 0.0)};
    const Dual2 val = objective(std::span<const Dual2>(x));
    out[static_cast<std::size_t>(i)] = {s, val.v, val.dab};
  }
  return out;
}

namespace {

/// 1-D Newton in sigma_2 for lambda_1(sigma_1, x) = target.
bool newton_level_set(const RadialGeometry& geom, double sigma1, double target,
                      double& x) {
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<Dual> s = {Dual(sigma1), Dual(x, 1.0)};
    const std::vector<Dual> lambda = detail::forward_kernel<Dual>(geom, s, 1);
    const double f = lambda[0].v - target;
    const double df = lambda[0].d;
    if (std::abs(f) <= 1e-13 * std::abs(target) + 1e-300) return true;
    if (df == 0.0) return false;
    double step = -f / df;
    double next = x + step;
    while (next <= 0.0) {
      step *= 0.5;
      next = x + step;
      if (std::abs(step) < 1e-300) return false;
    }
    x = next;
  }
  return false;
}

/// Continuation step with bisection fallback; gives up below 1e-9 in sigma_1.
double continue_level_set(const RadialGeometry& geom, double from_s1, double from_x,
                          double to_s1, double target) {
  double x = from_x;
  if (newton_level_set(geom, to_s1, target, x)) return x;
  if (std::abs(to_s1 - from_s1) < 1e-9)
    throw numerical_error("implicit curve continuation failed near sigma_1 = " +
                          std::to_string(to_s1));
  const double mid_s1 = 0.5 * (from_s1 + to_s1);
  const double mid_x = continue_level_set(geom, from_s1, from_x, mid_s1, target);
  return continue_level_set(geom, mid_s1, mid_x, to_s1, target);
}

} // namespace

std::vector<ImplicitCurveSample> trace_implicit_curves(const RadialGeometry& geom,
                                                       const Conductivity& sigma_true,
                                                       double lo, double hi,
                                                       int steps) {
  if (geom.annulus_count() != 2)
    throw invalid_input_error("trace_implicit_curves is defined for n = 2");
  sigma_true.check_compatible(geom);
  if (!(lo > 0.0) || !(lo < hi)) throw invalid_input_error("bad trace interval");
  if (steps < 2) throw invalid_input_error("need at least 2 continuation steps");

  const MeasurementVector y = forward_map(geom, sigma_true, 2);
  const double target = y[0];
  const double s1_truth = sigma_true[0];

  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i)
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / steps;
  if (s1_truth > lo && s1_truth < hi) {
    grid.push_back(s1_truth);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }

  // Start the continuation at the truth (g there is known exactly) and sweep
  // outward in both directions with warm starts.
  const auto anchor = static_cast<std::size_t>(
      std::lower_bound(grid.begin(), grid.end(), s1_truth) - grid.begin());
  std::vector<double> g(grid.size());

  auto solve_at = [&](std::size_t idx, double from_s1, double from_x) {
    g[idx] = continue_level_set(geom, from_s1, from_x, grid[idx], target);
  };

  const bool anchor_in_grid = anchor < grid.size() && grid[anchor] == s1_truth;
  if (anchor_in_grid) g[anchor] = sigma_true[1];

  double prev_s1 = s1_truth;
  double prev_x = sigma_true[1];
  for (std::size_t idx = anchor; idx-- > 0;) {
    solve_at(idx, prev_s1, prev_x);
    prev_s1 = grid[idx];
    prev_x = g[idx];
  }
  prev_s1 = s1_truth;
  prev_x = sigma_true[1];
  for (std::size_t idx = anchor_in_grid ? anchor + 1 : anchor; idx < grid.size();
       ++idx) {
    solve_at(idx, prev_s1, prev_x);
    prev_s1 = grid[idx];
    prev_x = g[idx];
  }

  std::vector<ImplicitCurveSample> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Conductivity sigma(std::vector<double>{grid[i], g[i]});
    const MeasurementVector lambda = forward_map(geom, sigma, 2);
    out[i] = {grid[i], g[i], lambda[1]};
  }
  return out;
}

CriticalPointScan grid_critical_point_scan(const RadialGeometry& geom,
                                           const Conductivity& sigma_true,
                                           const GridSpec& grid, unsigned threads) {
  if (geom.annulus_count() != 2)
    throw invalid_input_error("grid_critical_point_scan is defined for n = m = 2");
  sigma_true.check_compatible(geom);

  const MeasurementVector y = forward_map(geom, sigma_true, 2);
  const int k = grid.k;
  std::vector<double> g1(static_cast<std::size_t>(k) * k);
  std::vector<double> g2(static_cast<std::size_t>(k) * k);

  parallel_for(static_cast<std::size_t>(k), [&](std::size_t row) {
    const double s2 = grid.coordinate(static_cast<int>(row));
    for (int col = 0; col < k; ++col) {
      const Conductivity sigma(std::vector<double>{grid.coordinate(col), s2});
      const std::vector<double> grad = least_squares_gradient(geom, sigma, y);
      g1[row * static_cast<std::size_t>(k) + static_cast<std::size_t>(col)] = grad[0];
      g2[row * static_cast<std::size_t>(k) + static_cast<std::size_t>(col)] = grad[1];
    }
  }, threads);

  auto changes_sign = [&](const std::vector<double>& g, int ci, int cj) {
    bool pos = false, neg = false, zero = false;
    for (int di = 0; di <= 1; ++di)
      for (int dj = 0; dj <= 1; ++dj) {
        const double v = g[static_cast<std::size_t>(cj + dj) * k + (ci + di)];
        if (v > 0.0) pos = true;
        else if (v < 0.0) neg = true;
        else zero = true;
      }
    return (pos && neg) || zero;
  };

  // Per-component sign changes alone also fire along any stretch where the
  // two zero curves run nearly parallel through a cell without crossing; the
  // winding of the gradient field around the cell separates an actual
  // crossing (index +-1) from a near miss (index 0). An extra critical point
  // anywhere on the grid would show up as an extra winding cell.
  std::vector<double> angle(static_cast<std::size_t>(k) * k);
  for (std::size_t i = 0; i < angle.size(); ++i) angle[i] = std::atan2(g2[i], g1[i]);
  auto winding = [&](int ci, int cj) {
    const int corner_i[4] = {ci, ci + 1, ci + 1, ci};
    const int corner_j[4] = {cj, cj, cj + 1, cj + 1};
    double total = 0.0;
    for (int e = 0; e < 4; ++e) {
      const double a0 = angle[static_cast<std::size_t>(corner_j[e]) * k + corner_i[e]];
      const double a1 = angle[static_cast<std::size_t>(corner_j[(e + 1) % 4]) * k +
                              corner_i[(e + 1) % 4]];
      double d = a1 - a0;
      while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
      while (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
      total += d;
    }
    return std::abs(total) > 3.0;  // |total| is ~2*pi at a crossing, else ~0
  };

  // The winding localizes a crossing only to corner resolution; when it sits
  // close to a cell edge the coarse pass can fire in the neighboring cell.
  // Subdividing with the same winding primitive pins the crossing down and
  // the candidate is the original grid cell containing it.
  // Damped Newton on grad f from the flagged cell's center pins the crossing
  // to machine precision, so the candidate is attributed to the exact grid
  // cell containing it. Detection stays sign- and winding-based; Newton only
  // sharpens the location of an already-detected candidate.
  auto refine_candidate = [&](int ci, int cj) {
    const double h = (grid.box.b - grid.box.a) / (k - 1);
    double s1 = grid.box.a + h * (ci + 0.5);
    double s2 = grid.box.a + h * (cj + 0.5);
    for (int iter = 0; iter < 60; ++iter) {
      const Conductivity sigma(std::vector<double>{s1, s2});
      const std::vector<double> g = least_squares_gradient(geom, sigma, y);
      const double gnorm = std::hypot(g[0], g[1]);
      if (gnorm <= 1e-15) break;
      DenseMatrix hess = least_squares_hessian(geom, sigma, y);
      std::vector<double> step;
      for (double shift = 0.0;; shift = shift == 0.0 ? 1e-12 : 10.0 * shift) {
        DenseMatrix shifted = hess;
        shifted(0, 0) += shift;
        shifted(1, 1) += shift;
        if (auto lower = cholesky(shifted)) {
          step = cholesky_solve(*lower, std::vector<double>{-g[0], -g[1]});
          break;
        }
        if (shift > 1e10) return std::pair<int, int>(ci, cj);
      }
      double alpha = 1.0;
      bool moved = false;
      for (int back = 0; back < 40; ++back) {
        const double t1 = s1 + alpha * step[0];
        const double t2 = s2 + alpha * step[1];
        if (t1 > 0.0 && t2 > 0.0) {
          const std::vector<double> gn =
              least_squares_gradient(geom, Conductivity(std::vector<double>{t1, t2}), y);
          if (std::hypot(gn[0], gn[1]) < gnorm) {
            s1 = t1;
            s2 = t2;
            moved = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }
    const int ri = std::clamp(static_cast<int>((s1 - grid.box.a) / h), 0, k - 2);
    const int rj = std::clamp(static_cast<int>((s2 - grid.box.a) / h), 0, k - 2);
    return std::pair<int, int>(ri, rj);
  };

  CriticalPointScan scan;
  std::vector<char> is_candidate(static_cast<std::size_t>(k - 1) * (k - 1), 0);
  for (int cj = 0; cj < k - 1; ++cj) {
    for (int ci = 0; ci < k - 1; ++ci) {
      if (changes_sign(g1, ci, cj) && changes_sign(g2, ci, cj) && winding(ci, cj)) {
        const auto [ri, rj] = refine_candidate(ci, cj);
        if (is_candidate[static_cast<std::size_t>(rj) * (k - 1) + ri]) continue;
        is_candidate[static_cast<std::size_t>(rj) * (k - 1) + ri] = 1;
        scan.cells.push_back({ri, rj, grid.coordinate(ri), grid.coordinate(ri + 1),
                              grid.coordinate(rj), grid.coordinate(rj + 1)});
      }
    }
  }

  // Group 8-connected candidate cells.
  std::vector<char> seen(is_candidate.size(), 0);
  for (const CriticalCell& cell : scan.cells) {
    const std::size_t start = static_cast<std::size_t>(cell.j) * (k - 1) + cell.i;
    if (seen[start]) continue;
    ++scan.cluster_count;
    std::vector<std::size_t> stack = {start};
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const int ci = static_cast<int>(cur % static_cast<std::size_t>(k - 1));
      const int cj = static_cast<int>(cur / static_cast<std::size_t>(k - 1));
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int ni = ci + di;
          const int nj = cj + dj;
          if (ni < 0 || nj < 0 || ni >= k - 1 || nj >= k - 1) continue;
          const std::size_t nidx = static_cast<std::size_t>(nj) * (k - 1) + ni;
          if (is_candidate[nidx] && !seen[nidx]) {
            seen[nidx] = 1;
            stack.push_back(nidx);
          }
        }
    }
  }
  return scan;
}

} // namespace calderon
