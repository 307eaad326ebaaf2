#include "calderon/convex.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "calderon/autodiff.hpp"
#include "calderon/parallel.hpp"

namespace calderon {

namespace {

long grid_point_count(const GridSpec& grid, int n) {
  long total = 1;
  for (int i = 0; i < n; ++i) total *= grid.k;
  return total;
}

std::vector<double> decode_grid_point(const GridSpec& grid, int n, long index) {
  std::vector<double> sigma(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    sigma[static_cast<std::size_t>(i)] = grid.coordinate(static_cast<int>(index % grid.k));
    index /= grid.k;
  }
  return sigma;
}

bool is_b_one(const GridSpec& grid, const std::vector<double>& sigma) {
  for (double v : sigma)
    if (v != grid.box.b) return false;
  return true;
}

DenseMatrix ad_jacobian_at(const RadialGeometry& geom, const std::vector<double>& sigma,
                           int m) {
  auto fwd = [&geom, m](std::span<const Dual> x) {
    return detail::forward_kernel<Dual>(geom, x, m);
  };
  return jacobian(fwd, std::span<const double>(sigma));
}

/// Stationarity block for one grid point appended to `out`; complementarity
/// is enforced by construction (multipliers for inactive bounds are never
/// created).
void append_point(CEstimationLp& out, const BoxPrior& box, const std::vector<double>& sigma,
                  long grid_index, const DenseMatrix& jac) {
  const int n = out.n;
  const int m = out.m;

  CEstimationLp::PointVars vars;
  vars.grid_index = grid_index;
  vars.sigma = sigma;

  std::vector<int> lambda_col(static_cast<std::size_t>(n), -1);
  std::vector<int> mu_col(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (sigma[static_cast<std::size_t>(i)] == box.a) {
      lambda_col[static_cast<std::size_t>(i)] = out.lp.add_variable(0.0, true);
      vars.lambda_cols.push_back(lambda_col[static_cast<std::size_t>(i)]);
      vars.lambda_coords.push_back(i);
    }
    if (sigma[static_cast<std::size_t>(i)] == box.b) {
      mu_col[static_cast<std::size_t>(i)] = out.lp.add_variable(0.0, true);
      vars.mu_cols.push_back(mu_col[static_cast<std::size_t>(i)]);
      vars.mu_coords.push_back(i);
    }
  }
  for (int j = 0; j < m; ++j) vars.z_cols.push_back(out.lp.add_variable(0.0, true));

  for (int i = 0; i < n; ++i) {
    std::vector<lp::LinearProgram::Entry> row;
    row.push_back({i, 1.0});  // c_i
    if (mu_col[static_cast<std::size_t>(i)] >= 0)
      row.push_back({mu_col[static_cast<std::size_t>(i)], 1.0});
    if (lambda_col[static_cast<std::size_t>(i)] >= 0)
      row.push_back({lambda_col[static_cast<std::size_t>(i)], -1.0});
    for (int j = 0; j < m; ++j)
      row.push_back({vars.z_cols[static_cast<std::size_t>(j)], jac(j, i)});
    out.lp.add_equality(std::move(row), 0.0);
  }
  out.points.push_back(std::move(vars));
}

CEstimationLp build_restricted(const RadialGeometry& geom, const BoxPrior& box,
                               const GridSpec& grid, int m,
                               const std::vector<long>& point_indices) {
  const int n = geom.annulus_count();
  CEstimationLp out;
  out.n = n;
  out.m = m;
  out.grid_points = static_cast<long>(point_indices.size());

  for (int i = 0; i < n; ++i) out.lp.add_variable(i == n - 1 ? 1.0 : 0.0, true);
  out.lp.add_equality({{0, 1.0}}, 1.0);  // c_1 = 1

  for (long idx : point_indices) {
    const std::vector<double> sigma = decode_grid_point(grid, n, idx);
    const DenseMatrix jac = ad_jacobian_at(geom, sigma, m);
    append_point(out, box, sigma, idx, jac);
  }
  return out;
}

std::vector<long> all_grid_indices(const GridSpec& grid, int n) {
  const long total = grid_point_count(grid, n);
  std::vector<long> indices;
  indices.reserve(static_cast<std::size_t>(total) - 1);
  for (long idx = 0; idx < total; ++idx) {
    if (!is_b_one(grid, decode_grid_point(grid, n, idx))) indices.push_back(idx);
  }
  return indices;
}

} // namespace

CEstimationLp build_c_estimation_lp(const RadialGeometry& geom, const BoxPrior& box,
                                    const GridSpec& grid, int m) {
  const int n = geom.annulus_count();
  if (m < 1) throw invalid_input_error("c estimation needs m >= 1");
  if (grid.k < 2) throw invalid_input_error("c estimation needs a grid");
  return build_restricted(geom, box, grid, m, all_grid_indices(grid, n));
}

std::string status_name(WeightEstimate::Status status) {
  switch (status) {
    case WeightEstimate::Status::optimal: return "optimal";
    case WeightEstimate::Status::infeasible: return "infeasible";
    case WeightEstimate::Status::failure: return "failure";
  }
  return "unknown";
}

std::string to_json(const WeightEstimate& estimate) {
  nlohmann::json j;
  j["c"] = estimate.c;
  j["m_used"] = estimate.m_used;
  j["grid"] = {{"k", estimate.grid.k}, {"a", estimate.grid.box.a}, {"b", estimate.grid.box.b}};
  j["status"] = status_name(estimate.status);
  j["smallest_coefficient"] = estimate.smallest_coefficient;
  j["lp_iterations"] = estimate.lp_iterations;
  return j.dump();
}

namespace {

/// Per-point feasibility subproblem for a fixed weight vector: do multipliers
/// (lambda on active lower bounds, mu on active upper bounds, z >= 0) exist
/// with mu_i - lambda_i + sum_j z_j J(j,i) = -c_i?
bool point_feasible_for_c(const BoxPrior& box, const std::vector<double>& sigma,
                          const DenseMatrix& jac, const std::vector<double>& c,
                          const lp::SimplexOptions& lp_opts) {
  const int n = static_cast<int>(sigma.size());
  const int m = jac.rows();
  lp::LinearProgram sub(lp::LinearProgram::Sense::minimize);
  std::vector<int> lambda_col(static_cast<std::size_t>(n), -1);
  std::vector<int> mu_col(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (sigma[static_cast<std::size_t>(i)] == box.a) lambda_col[static_cast<std::size_t>(i)] = sub.add_variable();
    if (sigma[static_cast<std::size_t>(i)] == box.b) mu_col[static_cast<std::size_t>(i)] = sub.add_variable();
  }
  std::vector<int> z_col(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) z_col[static_cast<std::size_t>(j)] = sub.add_variable();
  for (int i = 0; i < n; ++i) {
    std::vector<lp::LinearProgram::Entry> row;
    if (mu_col[static_cast<std::size_t>(i)] >= 0) row.push_back({mu_col[static_cast<std::size_t>(i)], 1.0});
    if (lambda_col[static_cast<std::size_t>(i)] >= 0)
      row.push_back({lambda_col[static_cast<std::size_t>(i)], -1.0});
    for (int j = 0; j < m; ++j) row.push_back({z_col[static_cast<std::size_t>(j)], jac(j, i)});
    sub.add_equality(std::move(row), -c[static_cast<std::size_t>(i)]);
  }
  const lp::LPSolution sol = lp::solve_lp(sub, lp_opts);
  return sol.status == lp::LPSolution::Status::optimal;
}

WeightEstimate weight_from_solution(const lp::LPSolution& sol, int n, int m,
                                    const GridSpec& grid) {
  WeightEstimate est;
  est.grid = grid;
  est.m_used = m;
  est.lp_iterations = sol.iterations;
  switch (sol.status) {
    case lp::LPSolution::Status::optimal: {
      est.status = WeightEstimate::Status::optimal;
      est.c.assign(sol.values.begin(), sol.values.begin() + n);
      est.smallest_coefficient = *std::min_element(est.c.begin(), est.c.end());
      break;
    }
    case lp::LPSolution::Status::infeasible:
      est.status = WeightEstimate::Status::infeasible;
      break;
    default:
      est.status = WeightEstimate::Status::failure;
      est.diagnostics = sol.diagnostics;
      break;
  }
  return est;
}

WeightEstimate estimate_monolithic(const RadialGeometry& geom, const BoxPrior& box,
                                   const GridSpec& grid, int m,
                                   const EstimateOptions& opts) {
  CEstimationLp built = build_c_estimation_lp(geom, box, grid, m);
  const lp::LPSolution sol = lp::solve_lp(built.lp, opts.lp_opts);
  return weight_from_solution(sol, built.n, m, grid);
}

WeightEstimate estimate_generation(const RadialGeometry& geom, const BoxPrior& box,
                                   const GridSpec& grid, int m,
                                   const EstimateOptions& opts) {
  const int n = geom.annulus_count();
  const std::vector<long> universe = all_grid_indices(grid, n);

  // Jacobians are reused across master rounds.
  std::vector<DenseMatrix> jacobians(universe.size());
  std::vector<std::vector<double>> sigmas(universe.size());
  parallel_for(universe.size(), [&](std::size_t u) {
    sigmas[u] = decode_grid_point(grid, n, universe[u]);
    jacobians[u] = ad_jacobian_at(geom, sigmas[u], m);
  }, opts.threads);

  // Seed the master with the points carrying the most active bounds.
  std::set<std::size_t> active;
  for (std::size_t u = 0; u < universe.size(); ++u) {
    int boundary = 0;
    for (double v : sigmas[u])
      if (v == grid.box.a || v == grid.box.b) ++boundary;
    if (boundary >= n - 1) active.insert(u);
  }

  long iterations = 0;
  for (int round = 0; round < 200; ++round) {
    CEstimationLp master;
    master.n = n;
    master.m = m;
    master.grid_points = static_cast<long>(active.size());
    for (int i = 0; i < n; ++i) master.lp.add_variable(i == n - 1 ? 1.0 : 0.0, true);
    master.lp.add_equality({{0, 1.0}}, 1.0);
    for (std::size_t u : active)
      append_point(master, box, sigmas[u], universe[u], jacobians[u]);

    const lp::LPSolution sol = lp::solve_lp(master.lp, opts.lp_opts);
    iterations += sol.iterations;
    if (sol.status != lp::LPSolution::Status::optimal) {
      WeightEstimate est = weight_from_solution(sol, n, m, grid);
      est.lp_iterations = iterations;
      return est;
    }
    const std::vector<double> c(sol.values.begin(), sol.values.begin() + n);

    std::vector<char> violated(universe.size(), 0);
    parallel_for(universe.size(), [&](std::size_t u) {
      if (active.count(u)) return;
      if (!point_feasible_for_c(box, sigmas[u], jacobians[u], c, opts.lp_opts))
        violated[u] = 1;
    }, opts.threads);

    bool any = false;
    for (std::size_t u = 0; u < universe.size(); ++u) {
      if (violated[u]) {
        active.insert(u);
        any = true;
      }
    }
    if (!any) {
      WeightEstimate est = weight_from_solution(sol, n, m, grid);
      est.lp_iterations = iterations;
      return est;
    }
  }

  WeightEstimate est;
  est.grid = grid;
  est.m_used = m;
  est.status = WeightEstimate::Status::failure;
  est.diagnostics = "grid-point generation did not settle";
  return est;
}

} // namespace

WeightEstimate estimate_c(const RadialGeometry& geom, const BoxPrior& box,
                          const GridSpec& grid, int m_start,
                          const EstimateOptions& opts) {
  const int n = geom.annulus_count();
  if (m_start < 1) throw invalid_input_error("estimate_c needs m_start >= 1");

  const bool monolithic = opts.path == EstimateOptions::Path::monolithic ||
                          (opts.path == EstimateOptions::Path::automatic && n <= 4);

  WeightEstimate last;
  for (int m = m_start; m <= opts.m_cap; ++m) {
    last = monolithic ? estimate_monolithic(geom, box, grid, m, opts)
                      : estimate_generation(geom, box, grid, m, opts);
    if (last.status != WeightEstimate::Status::infeasible) return last;
  }
  last.diagnostics = "no feasible m up to the cap " + std::to_string(opts.m_cap);
  return last;
}

// ---------------------------------------------------------------------------
// Interior-point solve of P_c(y)
// ---------------------------------------------------------------------------

SolveReport solve_pc(const RadialGeometry& geom, const BoxPrior& box,
                     const std::vector<double>& c, const MeasurementVector& y,
                     const PcOptions& opts) {
  const int n = geom.annulus_count();
  const int m = y.size();
  if (static_cast<int>(c.size()) != n)
    throw invalid_input_error("weight vector length must equal the annulus count");
  for (double v : c)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw invalid_input_error("weight vector must be nonnegative and finite");

  auto margin_at = [&](double delta) {
    const Conductivity sigma(n, box.b - delta);
    const MeasurementVector lambda = forward_map(geom, sigma, m);
    double margin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) margin = std::min(margin, y[j] - lambda[j]);
    return margin;
  };

  SolveReport report;
  if (margin_at(opts.boundary_tol) <= 0.0) {
    // Feasible set is {b*1} (or empty up to the tolerance).
    report.status = SolveReport::Status::converged;
    report.boundary_case = true;
    report.iterate.assign(static_cast<std::size_t>(n), box.b);
    const MeasurementVector lambda = forward_map(geom, Conductivity(n, box.b), m);
    double violation = 0.0;
    for (int j = 0; j < m; ++j) violation = std::max(violation, lambda[j] - y[j]);
    report.final_residual_inf = std::max(violation, 0.0);
    report.final_gradient_inf = 0.0;
    return report;
  }

  // Largest delta keeping (b - delta) * 1 strictly feasible, then start
  // halfway to it.
  double lo = opts.boundary_tol;
  double hi = box.width() - opts.boundary_tol;
  if (margin_at(hi) > 0.0) {
    lo = hi;
  } else {
    for (int iter = 0; iter < 80; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (margin_at(mid) > 0.0 ? lo : hi) = mid;
    }
  }
  std::vector<double> sigma(static_cast<std::size_t>(n), box.b - 0.5 * lo);

  auto barrier_value = [&](const std::vector<double>& x, double t, bool& inside) {
    inside = true;
    for (int i = 0; i < n; ++i) {
      if (x[static_cast<std::size_t>(i)] <= box.a || x[static_cast<std::size_t>(i)] >= box.b) {
        inside = false;
        return 0.0;
      }
    }
    const MeasurementVector lambda = forward_map(geom, Conductivity(x), m);
    double phi = 0.0;
    for (int j = 0; j < m; ++j) {
      const double gap = y[j] - lambda[j];
      if (gap <= 0.0) {
        inside = false;
        return 0.0;
      }
      phi -= std::log(gap);
    }
    double linear = 0.0;
    for (int i = 0; i < n; ++i) {
      phi -= std::log(x[static_cast<std::size_t>(i)] - box.a);
      phi -= std::log(box.b - x[static_cast<std::size_t>(i)]);
      linear += c[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    }
    return t * linear + phi;
  };

  const double constraints = static_cast<double>(m + 2 * n);
  int total_newton = 0;
  double t = opts.barrier_t0;
  for (;;) {
    for (int inner = 0; inner < opts.max_newton_per_stage; ++inner) {
      const Conductivity cur(sigma);
      const MeasurementVector lambda = forward_map(geom, cur, m);
      const DenseMatrix jac = analytic_jacobian(geom, cur, m);
      const std::vector<DenseMatrix> lambda_hessians = forward_map_hessians(geom, cur, m);

      std::vector<double> grad(static_cast<std::size_t>(n));
      DenseMatrix hess(n, n);
      for (int i = 0; i < n; ++i)
        grad[static_cast<std::size_t>(i)] = t * c[static_cast<std::size_t>(i)];
      for (int j = 0; j < m; ++j) {
        const double gap = y[j] - lambda[j];
        for (int i = 0; i < n; ++i) {
          grad[static_cast<std::size_t>(i)] += jac(j, i) / gap;
          for (int k = 0; k < n; ++k)
            hess(i, k) += jac(j, i) * jac(j, k) / (gap * gap) +
                          lambda_hessians[static_cast<std::size_t>(j)](i, k) / gap;
        }
      }
      for (int i = 0; i < n; ++i) {
        const double da = sigma[static_cast<std::size_t>(i)] - box.a;
        const double db = box.b - sigma[static_cast<std::size_t>(i)];
        grad[static_cast<std::size_t>(i)] += -1.0 / da + 1.0 / db;
        hess(i, i) += 1.0 / (da * da) + 1.0 / (db * db);
      }

      // Newton direction with a Cholesky-backed Levenberg fallback.
      std::vector<double> step;
      {
        double shift = 0.0;
        bool solved = false;
        for (int tries = 0; tries < 60 && !solved; ++tries) {
          DenseMatrix shifted = hess;
          if (shift > 0.0)
            for (int i = 0; i < n; ++i) shifted(i, i) += shift;
          if (auto lower = cholesky(shifted)) {
            std::vector<double> neg(grad);
            for (double& v : neg) v = -v;
            step = cholesky_solve(*lower, neg);
            solved = true;
          } else {
            double max_diag = 0.0;
            for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(hess(i, i)));
            shift = shift == 0.0 ? std::max(1e-12, 1e-10 * max_diag) : 10.0 * shift;
          }
        }
        if (!solved) {
          report.status = SolveReport::Status::stagnated;
          report.iterate = sigma;
          report.iterations = total_newton;
          return report;
        }
      }

      double decrement2 = 0.0;
      for (int i = 0; i < n; ++i) decrement2 -= grad[static_cast<std::size_t>(i)] * step[static_cast<std::size_t>(i)];
      if (decrement2 / (2.0 * t) <= 1e-12) break;

      bool inside = false;
      const double psi0 = barrier_value(sigma, t, inside);
      double alpha = 1.0;
      std::vector<double> trial(static_cast<std::size_t>(n));
      bool moved = false;
      for (int back = 0; back < 60; ++back) {
        for (int i = 0; i < n; ++i)
          trial[static_cast<std::size_t>(i)] =
              sigma[static_cast<std::size_t>(i)] + alpha * step[static_cast<std::size_t>(i)];
        bool trial_inside = false;
        const double psi = barrier_value(trial, t, trial_inside);
        if (trial_inside && psi <= psi0 - 1e-4 * alpha * decrement2) {
          sigma = trial;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      ++total_newton;
      if (!moved) break;
    }

    if (opts.record_trajectory) {
      const MeasurementVector lambda = forward_map(geom, Conductivity(sigma), m);
      double violation = 0.0;
      for (int j = 0; j < m; ++j) violation = std::max(violation, lambda[j] - y[j]);
      report.trajectory.push_back({total_newton, sigma, std::max(violation, 0.0), t});
    }
    if (constraints / t <= opts.gap_target) break;
    t *= opts.barrier_mu;
  }

  report.status = SolveReport::Status::converged;
  report.iterate = sigma;
  report.iterations = total_newton;
  const MeasurementVector lambda = forward_map(geom, Conductivity(sigma), m);
  double violation = 0.0;
  for (int j = 0; j < m; ++j) violation = std::max(violation, lambda[j] - y[j]);
  for (int i = 0; i < n; ++i) {
    violation = std::max(violation, box.a - sigma[static_cast<std::size_t>(i)]);
    violation = std::max(violation, sigma[static_cast<std::size_t>(i)] - box.b);
  }
  report.final_residual_inf = std::max(violation, 0.0);
  report.final_gradient_inf = constraints / t;  // duality-gap bound at exit
  return report;
}

// ---------------------------------------------------------------------------
// KKT certificate
// ---------------------------------------------------------------------------

namespace {

/// Lawson-Hanson nonnegative least squares, small and dense.
std::vector<double> nnls(const DenseMatrix& a, const std::vector<double>& b) {
  const int rows = a.rows();
  const int cols = a.cols();
  std::vector<double> x(static_cast<std::size_t>(cols), 0.0);
  std::vector<char> passive(static_cast<std::size_t>(cols), 0);

  auto residual = [&]() {
    std::vector<double> r(b);
    for (int j = 0; j < cols; ++j) {
      if (x[static_cast<std::size_t>(j)] == 0.0) continue;
      for (int i = 0; i < rows; ++i) r[static_cast<std::size_t>(i)] -= a(i, j) * x[static_cast<std::size_t>(j)];
    }
    return r;
  };

  auto solve_passive = [&](std::vector<double>& z) {
    std::vector<int> idx;
    for (int j = 0; j < cols; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    const int k = static_cast<int>(idx.size());
    z.assign(static_cast<std::size_t>(cols), 0.0);
    if (k == 0) return;
    DenseMatrix ata(k, k);
    std::vector<double> atb(static_cast<std::size_t>(k), 0.0);
    for (int p = 0; p < k; ++p) {
      for (int q = p; q < k; ++q) {
        double acc = 0.0;
        for (int i = 0; i < rows; ++i) acc += a(i, idx[static_cast<std::size_t>(p)]) * a(i, idx[static_cast<std::size_t>(q)]);
        ata(p, q) = acc;
        ata(q, p) = acc;
      }
      double acc = 0.0;
      for (int i = 0; i < rows; ++i) acc += a(i, idx[static_cast<std::size_t>(p)]) * b[static_cast<std::size_t>(i)];
      atb[static_cast<std::size_t>(p)] = acc;
    }
    // Jitter for rank-deficient active sets.
    double trace = 0.0;
    for (int p = 0; p < k; ++p) trace += ata(p, p);
    for (int p = 0; p < k; ++p) ata(p, p) += 1e-14 * (1.0 + trace);
    const std::vector<double> zp = lu_solve(ata, atb);
    for (int p = 0; p < k; ++p) z[static_cast<std::size_t>(idx[static_cast<std::size_t>(p)])] = zp[static_cast<std::size_t>(p)];
  };

  const double tol = 1e-12;
  for (int outer = 0; outer < 10 * cols + 10; ++outer) {
    const std::vector<double> r = residual();
    int best = -1;
    double best_w = tol;
    for (int j = 0; j < cols; ++j) {
      if (passive[static_cast<std::size_t>(j)]) continue;
      double w = 0.0;
      for (int i = 0; i < rows; ++i) w += a(i, j) * r[static_cast<std::size_t>(i)];
      if (w > best_w) {
        best_w = w;
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = 1;

    for (int guard = 0; guard < 10 * cols + 10; ++guard) {
      std::vector<double> z;
      solve_passive(z);
      bool all_positive = true;
      double alpha = 1.0;
      for (int j = 0; j < cols; ++j) {
        if (!passive[static_cast<std::size_t>(j)]) continue;
        if (z[static_cast<std::size_t>(j)] <= 0.0) {
          all_positive = false;
          const double denom = x[static_cast<std::size_t>(j)] - z[static_cast<std::size_t>(j)];
          if (denom > 0.0) alpha = std::min(alpha, x[static_cast<std::size_t>(j)] / denom);
        }
      }
      if (all_positive) {
        x = z;
        break;
      }
      for (int j = 0; j < cols; ++j) {
        if (!passive[static_cast<std::size_t>(j)]) continue;
        x[static_cast<std::size_t>(j)] += alpha * (z[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j)]);
        if (x[static_cast<std::size_t>(j)] <= 1e-14) {
          x[static_cast<std::size_t>(j)] = 0.0;
          passive[static_cast<std::size_t>(j)] = 0;
        }
      }
    }
  }
  return x;
}

} // namespace

KKTCertificate check_kkt(const RadialGeometry& geom, const BoxPrior& box,
                         const std::vector<double>& c, const Conductivity& sigma,
                         const MeasurementVector& y) {
  const int n = geom.annulus_count();
  const int m = y.size();
  sigma.check_compatible(geom);
  if (static_cast<int>(c.size()) != n)
    throw invalid_input_error("weight vector length must equal the annulus count");

  const MeasurementVector lambda_val = forward_map(geom, sigma, m);
  const DenseMatrix jac = analytic_jacobian(geom, sigma, m);

  const double tol_box = 1e-7 * box.width();
  std::vector<int> lower_active, upper_active, meas_active;
  for (int i = 0; i < n; ++i) {
    if (sigma[i] - box.a <= tol_box) lower_active.push_back(i);
    if (box.b - sigma[i] <= tol_box) upper_active.push_back(i);
  }
  for (int j = 0; j < m; ++j) {
    const double tol_meas = 1e-7 * std::max(1.0, std::abs(y[j]));
    if (y[j] - lambda_val[j] <= tol_meas) meas_active.push_back(j);
  }

  const int cols = static_cast<int>(lower_active.size() + upper_active.size() +
                                    meas_active.size());
  KKTCertificate cert;
  cert.lambda.assign(static_cast<std::size_t>(n), 0.0);
  cert.mu.assign(static_cast<std::size_t>(n), 0.0);
  cert.z.assign(static_cast<std::size_t>(m), 0.0);

  if (cols > 0) {
    DenseMatrix a(n, cols);
    int col = 0;
    for (int i : lower_active) a(i, col++) = -1.0;
    for (int i : upper_active) a(i, col++) = 1.0;
    for (int j : meas_active) {
      for (int i = 0; i < n; ++i) a(i, col) = jac(j, i);
      ++col;
    }
    std::vector<double> neg_c(c);
    for (double& v : neg_c) v = -v;
    const std::vector<double> theta = nnls(a, neg_c);
    col = 0;
    for (int i : lower_active) cert.lambda[static_cast<std::size_t>(i)] = theta[static_cast<std::size_t>(col++)];
    for (int i : upper_active) cert.mu[static_cast<std::size_t>(i)] = theta[static_cast<std::size_t>(col++)];
    for (int j : meas_active) cert.z[static_cast<std::size_t>(j)] = theta[static_cast<std::size_t>(col++)];
  }

  double stat = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = c[static_cast<std::size_t>(i)] + cert.mu[static_cast<std::size_t>(i)] -
               cert.lambda[static_cast<std::size_t>(i)];
    for (int j = 0; j < m; ++j) r += cert.z[static_cast<std::size_t>(j)] * jac(j, i);
    stat = std::max(stat, std::abs(r));
  }
  cert.stationarity_residual_inf = stat;

  double comp = 0.0;
  for (int i = 0; i < n; ++i) {
    comp = std::max(comp, std::abs(cert.lambda[static_cast<std::size_t>(i)] * (sigma[i] - box.a)));
    comp = std::max(comp, std::abs(cert.mu[static_cast<std::size_t>(i)] * (sigma[i] - box.b)));
  }
  for (int j = 0; j < m; ++j)
    comp = std::max(comp, std::abs(cert.z[static_cast<std::size_t>(j)] * (lambda_val[j] - y[j])));
  cert.complementarity_residual_inf = comp;
  return cert;
}

// ---------------------------------------------------------------------------
// Universality validation
// ---------------------------------------------------------------------------

ErrorHistogram make_error_histogram(const std::vector<double>& errors) {
  constexpr int kBins = 64;  // 16 decades, 4 per decade
  ErrorHistogram hist;
  hist.bin_lo.resize(kBins);
  hist.counts.assign(kBins, 0);
  for (int i = 0; i < kBins; ++i) hist.bin_lo[static_cast<std::size_t>(i)] = std::pow(10.0, -16.0 + 0.25 * i);
  for (double e : errors) {
    int bin = 0;
    if (e > 0.0) {
      bin = static_cast<int>(std::floor((std::log10(e) + 16.0) * 4.0));
      bin = std::clamp(bin, 0, kBins - 1);
    }
    ++hist.counts[static_cast<std::size_t>(bin)];
  }
  return hist;
}

UniversalityReport validate_weight(const RadialGeometry& geom, const BoxPrior& box,
                                   const std::vector<double>& c, int m, int trials,
                                   std::uint64_t master_seed, unsigned threads) {
  const int n = geom.annulus_count();
  if (static_cast<int>(c.size()) != n)
    throw invalid_input_error("weight vector length must equal the annulus count");
  if (std::abs(c[0] - 1.0) > 1e-12)
    throw invalid_input_error("weight vector must be normalized with c_1 = 1");
  for (double v : c)
    if (!(v >= 0.0)) throw invalid_input_error("weight vector must be nonnegative");
  if (trials < 1) throw invalid_input_error("validate_weight needs trials >= 1");

  UniversalityReport report;
  report.trials = trials;
  report.errors.assign(static_cast<std::size_t>(trials), 0.0);
  report.failure_threshold = 0.5 * box.width() / 3.0;

  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    CounterRng rng = derive_rng(master_seed, trial, "validate-sigma");
    std::vector<double> truth(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) truth[static_cast<std::size_t>(i)] = rng.uniform(box.a, box.b);
    const MeasurementVector y = forward_map(geom, Conductivity(truth), m);
    const SolveReport solved = solve_pc(geom, box, c, y);
    double err = 0.0;
    for (int i = 0; i < n; ++i)
      err = std::max(err, std::abs(solved.iterate[static_cast<std::size_t>(i)] -
                                   truth[static_cast<std::size_t>(i)]));
    report.errors[trial] = err;
  }, threads);

  long failures = 0;
  double max_err = 0.0;
  for (double e : report.errors) {
    if (e >= report.failure_threshold) ++failures;
    max_err = std::max(max_err, e);
  }
  report.failure_fraction = static_cast<double>(failures) / trials;
  report.max_error = max_err;
  std::vector<double> sorted = report.errors;
  std::sort(sorted.begin(), sorted.end());
  report.median_error = sorted[sorted.size() / 2];
  report.histogram = make_error_histogram(report.errors);
  return report;
}

} // namespace calderon
