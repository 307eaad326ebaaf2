#include "calderon/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

#include "calderon/autodiff.hpp"
#include "calderon/linalg.hpp"

namespace calderon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm_two(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

std::vector<double> draw_uniform_box(CounterRng& rng, const BoxPrior& box, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = rng.uniform(box.a, box.b);
  return x;
}

void record_point(std::vector<TrajectoryPoint>* traj, int iter,
                  const std::vector<double>& sigma, double res_inf, double res_two) {
  if (traj) traj->push_back({iter, sigma, res_inf, res_two});
}

} // namespace

std::string status_name(SolveReport::Status status) {
  switch (status) {
    case SolveReport::Status::converged: return "converged";
    case SolveReport::Status::stagnated: return "stagnated";
    case SolveReport::Status::max_iter: return "max_iter";
    case SolveReport::Status::max_restarts: return "max_restarts";
  }
  return "unknown";
}

std::string to_json(const SolveReport& report) {
  nlohmann::json j;
  j["status"] = status_name(report.status);
  j["iterations"] = report.iterations;
  j["restarts"] = report.restarts;
  j["final_residual_inf"] = report.final_residual_inf;
  j["final_gradient_inf"] = report.final_gradient_inf;
  j["iterate"] = report.iterate;
  j["boundary_case"] = report.boundary_case;
  if (std::isfinite(report.hessian_sv_max)) {
    j["hessian_sv_max"] = report.hessian_sv_max;
    j["hessian_sv_min"] = report.hessian_sv_min;
  }
  if (!report.trajectory.empty()) {
    nlohmann::json t = nlohmann::json::array();
    for (const TrajectoryPoint& p : report.trajectory)
      t.push_back({{"iter", p.iter}, {"sigma", p.sigma}, {"residual_inf", p.residual_inf}});
    j["trajectory"] = t;
  }
  return j.dump();
}

CsvTable trajectory_csv(const SolveReport& report) {
  const int n = static_cast<int>(report.iterate.size());
  std::vector<std::string> header = {"iter"};
  for (int i = 1; i <= n; ++i) header.push_back("sigma_" + std::to_string(i));
  header.push_back("residual_inf");
  CsvTable table(std::move(header));
  std::vector<double> row(static_cast<std::size_t>(n) + 2);
  for (const TrajectoryPoint& p : report.trajectory) {
    row[0] = p.iter;
    for (int i = 0; i < n; ++i) row[static_cast<std::size_t>(i) + 1] = p.sigma[static_cast<std::size_t>(i)];
    row.back() = p.residual_inf;
    table.add_row(row);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Trust-region Newton root finding
// ---------------------------------------------------------------------------

SolveReport newton_root(const RadialGeometry& geom, const MeasurementVector& y,
                        const BoxPrior& box, CounterRng& rng,
                        const NewtonOptions& opts) {
  const int n = geom.annulus_count();
  if (y.size() != n)
    throw invalid_input_error("newton_root requires m = n measurements");

  SolveReport report;
  std::vector<double> best_iterate;
  double best_res_inf = kInf;
  int total_iterations = 0;

  auto residual = [&](const std::vector<double>& sigma) {
    const MeasurementVector lambda = forward_map(geom, Conductivity(sigma), n);
    std::vector<double> f(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) f[static_cast<std::size_t>(j)] = lambda[j] - y[j];
    return f;
  };

  for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
    std::vector<double> sigma = (attempt == 0 && opts.initial_guess)
                                    ? *opts.initial_guess
                                    : draw_uniform_box(rng, box, n);
    for (double& s : sigma) s = std::max(s, opts.positivity_floor);

    double radius = opts.initial_radius;
    double stagnation_best = kInf;
    int no_improve = 0;
    bool stagnated = false;

    std::vector<double> f = residual(sigma);
    double res_inf = norm_inf(f);
    double res_two = norm_two(f);
    record_point(opts.record_trajectory ? &report.trajectory : nullptr,
                 total_iterations, sigma, res_inf, res_two);

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
      if (res_inf <= opts.tol_inf) {
        report.status = SolveReport::Status::converged;
        report.iterations = total_iterations;
        report.restarts = attempt;
        report.final_residual_inf = res_inf;
        report.final_gradient_inf = res_inf;
        report.iterate = sigma;
        return report;
      }
      if (res_inf < 0.99 * stagnation_best) {
        stagnation_best = res_inf;
        no_improve = 0;
      } else if (++no_improve >= opts.stagnation_window) {
        stagnated = true;
        break;
      }

      const DenseMatrix jac = analytic_jacobian(geom, Conductivity(sigma), n);

      // Gradient of 0.5 ||F||^2 and the Gauss-Newton model pieces.
      std::vector<double> grad(static_cast<std::size_t>(n), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          grad[static_cast<std::size_t>(i)] += jac(j, i) * f[static_cast<std::size_t>(j)];

      std::vector<double> newton_step;
      bool have_newton = true;
      try {
        std::vector<double> neg_f(f);
        for (double& v : neg_f) v = -v;
        newton_step = lu_solve(jac, neg_f);
      } catch (const numerical_error&) {
        have_newton = false;
      }

      // Dogleg step within the current radius.
      std::vector<double> step(static_cast<std::size_t>(n), 0.0);
      const double grad_norm = norm_two(grad);
      if (have_newton && norm_two(newton_step) <= radius) {
        step = newton_step;
      } else if (grad_norm == 0.0) {
        stagnated = true;
        break;
      } else {
        const std::vector<double> jg = jac.multiply(grad);
        const double denom = norm_two(jg);
        const double t_cauchy = denom > 0.0 ? (grad_norm * grad_norm) / (denom * denom) : 0.0;
        std::vector<double> cauchy(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) cauchy[static_cast<std::size_t>(i)] = -t_cauchy * grad[static_cast<std::size_t>(i)];
        const double cauchy_norm = norm_two(cauchy);
        if (!have_newton || cauchy_norm >= radius) {
          const double scale = radius / grad_norm;
          for (int i = 0; i < n; ++i) step[static_cast<std::size_t>(i)] = -scale * grad[static_cast<std::size_t>(i)];
        } else {
          // Blend along cauchy -> newton to the radius boundary.
          std::vector<double> d(static_cast<std::size_t>(n));
          for (int i = 0; i < n; ++i)
            d[static_cast<std::size_t>(i)] = newton_step[static_cast<std::size_t>(i)] - cauchy[static_cast<std::size_t>(i)];
          double a = 0.0, b2 = 0.0, c2 = 0.0;
          for (int i = 0; i < n; ++i) {
            a += d[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(i)];
            b2 += cauchy[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(i)];
            c2 += cauchy[static_cast<std::size_t>(i)] * cauchy[static_cast<std::size_t>(i)];
          }
          c2 -= radius * radius;
          const double disc = std::max(0.0, b2 * b2 - a * c2);
          const double tau = a > 0.0 ? (-b2 + std::sqrt(disc)) / a : 0.0;
          for (int i = 0; i < n; ++i)
            step[static_cast<std::size_t>(i)] =
                cauchy[static_cast<std::size_t>(i)] + tau * d[static_cast<std::size_t>(i)];
        }
      }

      std::vector<double> candidate(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        candidate[static_cast<std::size_t>(i)] =
            std::max(sigma[static_cast<std::size_t>(i)] + step[static_cast<std::size_t>(i)],
                     opts.positivity_floor);
      std::vector<double> actual_step(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        actual_step[static_cast<std::size_t>(i)] =
            candidate[static_cast<std::size_t>(i)] - sigma[static_cast<std::size_t>(i)];

      const std::vector<double> f_new = residual(candidate);
      const double res_two_new = norm_two(f_new);

      std::vector<double> model = jac.multiply(actual_step);
      for (int j = 0; j < n; ++j) model[static_cast<std::size_t>(j)] += f[static_cast<std::size_t>(j)];
      const double predicted = res_two * res_two - norm_two(model) * norm_two(model);
      const double actual = res_two * res_two - res_two_new * res_two_new;
      const double rho = predicted > 0.0 ? actual / predicted : -1.0;

      ++total_iterations;
      const double step_norm = norm_two(actual_step);
      if (actual > 0.0 && rho >= 1e-4) {
        sigma = candidate;
        f = f_new;
        res_two = res_two_new;
        res_inf = norm_inf(f);
        record_point(opts.record_trajectory ? &report.trajectory : nullptr,
                     total_iterations, sigma, res_inf, res_two);
      }
      if (rho < 0.25) {
        radius = 0.5 * std::min(radius, step_norm > 0.0 ? step_norm : radius);
      } else if (rho > 0.75 && step_norm >= 0.99 * radius) {
        radius = std::min(2.0 * radius, opts.radius_cap);
      }
      if (radius < opts.radius_floor) {
        stagnated = true;
        break;
      }
    }

    if (res_inf <= opts.tol_inf) {
      report.status = SolveReport::Status::converged;
      report.iterations = total_iterations;
      report.restarts = attempt;
      report.final_residual_inf = res_inf;
      report.final_gradient_inf = res_inf;
      report.iterate = sigma;
      return report;
    }
    if (res_inf < best_res_inf) {
      best_res_inf = res_inf;
      best_iterate = sigma;
    }
    (void)stagnated;  // both stagnation and the iteration cap trigger a restart
  }

  report.status = SolveReport::Status::max_restarts;
  report.iterations = total_iterations;
  report.restarts = opts.max_restarts;
  report.final_residual_inf = best_res_inf;
  report.final_gradient_inf = best_res_inf;
  report.iterate = best_iterate;
  return report;
}

// ---------------------------------------------------------------------------
// Barrier Newton minimization (shared by lsq_box and the Tikhonov sweep)
// ---------------------------------------------------------------------------

namespace {

struct BarrierOutcome {
  std::vector<double> x;
  int newton_steps = 0;
  bool completed = false;
};

/// Solve (t Hf + diag) s = -g with a Levenberg shift when the Cholesky test
/// fails. Returns false when no shift up to 1e30 makes the system SPD.
bool newton_direction(DenseMatrix h, std::span<const double> g, std::vector<double>& step) {
  const int n = h.rows();
  double shift = 0.0;
  for (int tries = 0; tries < 60; ++tries) {
    DenseMatrix shifted = h;
    if (shift > 0.0)
      for (int i = 0; i < n; ++i) shifted(i, i) += shift;
    if (auto lower = cholesky(shifted)) {
      std::vector<double> neg_g(g.begin(), g.end());
      for (double& v : neg_g) v = -v;
      step = cholesky_solve(*lower, neg_g);
      return true;
    }
    double max_diag = 0.0;
    for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(h(i, i)));
    shift = shift == 0.0 ? std::max(1e-12, 1e-10 * max_diag) : 10.0 * shift;
    if (shift > 1e30) break;
  }
  return false;
}

template <class F>
BarrierOutcome barrier_minimize(F&& objective, const std::vector<double>& lower,
                                const std::vector<double>& upper,
                                std::vector<double> x, const LsqOptions& opts) {
  const int n = static_cast<int>(x.size());
  int constraint_count = 0;
  for (int i = 0; i < n; ++i) {
    if (lower[static_cast<std::size_t>(i)] > -kInf) ++constraint_count;
    if (upper[static_cast<std::size_t>(i)] < kInf) ++constraint_count;
  }

  // Nudge the start strictly inside the domain.
  for (int i = 0; i < n; ++i) {
    const double lo = lower[static_cast<std::size_t>(i)];
    const double hi = upper[static_cast<std::size_t>(i)];
    double& v = x[static_cast<std::size_t>(i)];
    if (lo > -kInf) v = std::max(v, lo + 1e-9 * (hi < kInf ? hi - lo : 1.0));
    if (hi < kInf) v = std::min(v, hi - 1e-9 * (lo > -kInf ? hi - lo : 1.0));
  }

  BarrierOutcome out;
  out.x = std::move(x);
  if (constraint_count == 0) constraint_count = 1;

  auto barrier_value = [&](const std::vector<double>& p, double t, bool& inside) {
    inside = true;
    double phi = 0.0;
    for (int i = 0; i < n; ++i) {
      const double lo = lower[static_cast<std::size_t>(i)];
      const double hi = upper[static_cast<std::size_t>(i)];
      const double v = p[static_cast<std::size_t>(i)];
      if (lo > -kInf) {
        if (v <= lo) { inside = false; return 0.0; }
        phi -= std::log(v - lo);
      }
      if (hi < kInf) {
        if (v >= hi) { inside = false; return 0.0; }
        phi -= std::log(hi - v);
      }
    }
    phi += t * objective(std::span<const double>(p));
    return phi;
  };

  for (double t = opts.barrier_t0; ; t *= opts.barrier_mu) {
    for (int inner = 0; inner < opts.max_newton_per_stage; ++inner) {
      const std::vector<double> grad_f = gradient(objective, out.x);
      DenseMatrix hess = hessian(objective, out.x);
      std::vector<double> grad_phi(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        double g = t * grad_f[static_cast<std::size_t>(i)];
        double hdiag = 0.0;
        const double lo = lower[static_cast<std::size_t>(i)];
        const double hi = upper[static_cast<std::size_t>(i)];
        const double v = out.x[static_cast<std::size_t>(i)];
        if (lo > -kInf) {
          g -= 1.0 / (v - lo);
          hdiag += 1.0 / ((v - lo) * (v - lo));
        }
        if (hi < kInf) {
          g += 1.0 / (hi - v);
          hdiag += 1.0 / ((hi - v) * (hi - v));
        }
        grad_phi[static_cast<std::size_t>(i)] = g;
        hess(i, i) += hdiag / t;
      }
      // Work on phi/t = f + barrier/t: Hessian Hf + diag(barrier'')/t,
      // gradient grad_f + barrier'/t. Keeps the Newton system O(1)-scaled as
      // t grows.
      std::vector<double> grad_scaled(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        grad_scaled[static_cast<std::size_t>(i)] = grad_phi[static_cast<std::size_t>(i)] / t;

      std::vector<double> step;
      if (!newton_direction(hess, grad_scaled, step)) return out;

      double decrement2 = 0.0;
      for (int i = 0; i < n; ++i)
        decrement2 -= grad_scaled[static_cast<std::size_t>(i)] * step[static_cast<std::size_t>(i)];
      if (decrement2 * 0.5 <= 1e-16 * (1.0 + std::abs(objective(std::span<const double>(out.x)))))
        break;

      bool inside = false;
      const double phi0 = barrier_value(out.x, t, inside);
      double alpha = 1.0;
      std::vector<double> trial(static_cast<std::size_t>(n));
      bool moved = false;
      for (int back = 0; back < 60; ++back) {
        for (int i = 0; i < n; ++i)
          trial[static_cast<std::size_t>(i)] =
              out.x[static_cast<std::size_t>(i)] + alpha * step[static_cast<std::size_t>(i)];
        bool trial_inside = false;
        const double phi_trial = barrier_value(trial, t, trial_inside);
        if (trial_inside && phi_trial <= phi0 - 1e-4 * alpha * decrement2 * t) {
          out.x = trial;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      ++out.newton_steps;
      if (!moved) break;
    }
    if (static_cast<double>(constraint_count) / t <= opts.barrier_gap) break;
  }
  out.completed = true;
  return out;
}

/// Plain damped Newton polish on the objective itself, staying strictly
/// inside the bounds. Removes the O(1/t) barrier bias from the solution.
template <class F>
int newton_polish(F&& objective, const std::vector<double>& lower,
                  const std::vector<double>& upper, std::vector<double>& x,
                  int max_steps) {
  const int n = static_cast<int>(x.size());
  int steps = 0;
  double f0 = objective(std::span<const double>(x));
  for (int iter = 0; iter < max_steps; ++iter) {
    const std::vector<double> grad = gradient(objective, x);
    const DenseMatrix hess = hessian(objective, x);
    std::vector<double> step;
    if (!newton_direction(hess, grad, step)) break;
    double alpha = 1.0;
    bool moved = false;
    std::vector<double> trial(static_cast<std::size_t>(n));
    for (int back = 0; back < 50; ++back) {
      bool inside = true;
      for (int i = 0; i < n; ++i) {
        trial[static_cast<std::size_t>(i)] =
            x[static_cast<std::size_t>(i)] + alpha * step[static_cast<std::size_t>(i)];
        if (trial[static_cast<std::size_t>(i)] <= lower[static_cast<std::size_t>(i)] ||
            trial[static_cast<std::size_t>(i)] >= upper[static_cast<std::size_t>(i)])
          inside = false;
      }
      if (inside) {
        const double f_trial = objective(std::span<const double>(trial));
        if (f_trial < f0) {
          x = trial;
          f0 = f_trial;
          moved = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    ++steps;
    if (!moved) break;
  }
  return steps;
}

/// Projected-gradient sup norm: entries pointing out of an active bound do
/// not count against convergence.
double projected_gradient_inf(const std::vector<double>& grad,
                              const std::vector<double>& x,
                              const std::vector<double>& lower,
                              const std::vector<double>& upper) {
  double m = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    double g = grad[i];
    const double span = (upper[i] < kInf && lower[i] > -kInf) ? upper[i] - lower[i] : 1.0;
    if (lower[i] > -kInf && x[i] <= lower[i] + 1e-6 * span) g = std::min(g, 0.0);
    if (upper[i] < kInf && x[i] >= upper[i] - 1e-6 * span) g = std::max(g, 0.0);
    m = std::max(m, std::abs(g));
  }
  return m;
}

} // namespace

// ---------------------------------------------------------------------------
// Box-constrained least squares / Tikhonov
// ---------------------------------------------------------------------------

namespace {

/// Shared driver: barrier stages, Newton polish, restart loop.
template <class F>
SolveReport minimize_with_restarts(F&& objective, const RadialGeometry& geom,
                                   const MeasurementVector& y, const BoxPrior& box,
                                   const std::vector<double>& lower,
                                   const std::vector<double>& upper, CounterRng& rng,
                                   const LsqOptions& opts) {
  const int n = geom.annulus_count();
  SolveReport report;
  double best_value = kInf;
  std::vector<double> best_x;
  int total_steps = 0;

  for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
    std::vector<double> x = (attempt == 0 && opts.initial_guess)
                                ? *opts.initial_guess
                                : draw_uniform_box(rng, box, n);
    BarrierOutcome stage = barrier_minimize(objective, lower, upper, std::move(x), opts);
    total_steps += stage.newton_steps;
    total_steps += newton_polish(objective, lower, upper, stage.x, 40);

    const std::vector<double> grad = gradient(objective, stage.x);
    const double pg = projected_gradient_inf(grad, stage.x, lower, upper);
    const double value = objective(std::span<const double>(stage.x));

    if (opts.record_trajectory) {
      const MeasurementVector lambda = forward_map(geom, Conductivity(stage.x),
                                                   y.size());
      std::vector<double> res(static_cast<std::size_t>(y.size()));
      for (int j = 0; j < y.size(); ++j) res[static_cast<std::size_t>(j)] = lambda[j] - y[j];
      record_point(&report.trajectory, total_steps, stage.x, norm_inf(res), norm_two(res));
    }

    if (value < best_value) {
      best_value = value;
      best_x = stage.x;
      report.final_gradient_inf = pg;
    }
    if (stage.completed && pg <= opts.gradient_tol_inf) {
      report.status = SolveReport::Status::converged;
      report.iterations = total_steps;
      report.restarts = attempt;
      report.iterate = stage.x;
      report.final_gradient_inf = pg;
      const MeasurementVector lambda = forward_map(geom, Conductivity(stage.x), y.size());
      double res_inf = 0.0;
      for (int j = 0; j < y.size(); ++j) res_inf = std::max(res_inf, std::abs(lambda[j] - y[j]));
      report.final_residual_inf = res_inf;
      return report;
    }
  }

  report.status = SolveReport::Status::max_restarts;
  report.iterations = total_steps;
  report.restarts = opts.max_restarts;
  report.iterate = best_x;
  if (!best_x.empty()) {
    const MeasurementVector lambda = forward_map(geom, Conductivity(best_x), y.size());
    double res_inf = 0.0;
    for (int j = 0; j < y.size(); ++j) res_inf = std::max(res_inf, std::abs(lambda[j] - y[j]));
    report.final_residual_inf = res_inf;
    // Stagnation diagnostics: extreme singular values of the objective
    // Hessian at the returned point.
    const DenseMatrix hess = hessian(objective, best_x);
    const std::vector<double> sv = jacobi_svd(hess);
    report.hessian_sv_max = sv.front();
    report.hessian_sv_min = sv.back();
  }
  return report;
}

} // namespace

SolveReport lsq_box(const RadialGeometry& geom, const MeasurementVector& y,
                    const BoxPrior& box, CounterRng& rng, const LsqOptions& opts) {
  const int n = geom.annulus_count();
  if (y.size() < n)
    throw invalid_input_error("lsq_box requires m >= n measurements");

  const int m = y.size();
  auto objective = [&geom, &y, m](const auto& x) {
    using T = std::remove_cvref_t<decltype(x[0])>;
    const std::vector<T> lambda = detail::forward_kernel<T>(geom, std::span<const T>(x), m);
    T acc(0.0);
    for (int j = 0; j < m; ++j) {
      const T r = lambda[static_cast<std::size_t>(j)] - T(y[j]);
      acc += r * r;
    }
    return T(0.5) * acc;
  };

  // The data misfit plateaus as sigma grows while -log(sigma - floor) keeps
  // falling, so a purely one-sided barrier subproblem is unbounded below. A
  // wide upper safeguard (far outside any plausible iterate) keeps every
  // barrier stage well-posed without acting as a real constraint.
  std::vector<double> lower(static_cast<std::size_t>(n), opts.lower_floor);
  std::vector<double> upper(static_cast<std::size_t>(n), box.b + 10.0 * box.width());
  return minimize_with_restarts(objective, geom, y, box, lower, upper, rng, opts);
}

TikhonovConfig default_tikhonov_config(const BoxPrior& box, int n) {
  std::vector<double> lambdas(20);
  for (int i = 0; i < 20; ++i) {
    const double alpha = -7.0 + 5.0 * i / 19.0;
    lambdas[static_cast<std::size_t>(i)] = std::pow(10.0, alpha);
  }
  return {std::move(lambdas), Conductivity(n, box.center())};
}

TikhonovSweep tikhonov_sweep(const RadialGeometry& geom, const MeasurementVector& y,
                             const BoxPrior& box, const TikhonovConfig& cfg,
                             const Conductivity& sigma_true, CounterRng& rng,
                             const LsqOptions& opts) {
  const int n = geom.annulus_count();
  sigma_true.check_compatible(geom);
  cfg.center.check_compatible(geom);
  if (cfg.lambdas.empty())
    throw invalid_input_error("tikhonov_sweep needs at least one lambda");
  for (std::size_t i = 1; i < cfg.lambdas.size(); ++i)
    if (!(cfg.lambdas[i - 1] < cfg.lambdas[i]))
      throw invalid_input_error("tikhonov lambdas must be strictly ascending");
  for (double l : cfg.lambdas)
    if (!(l > 0.0)) throw invalid_input_error("tikhonov lambdas must be positive");

  const int m = y.size();
  // One shared random start for the lambda = 0 arm and every lambda.
  const std::vector<double> start = draw_uniform_box(rng, box, n);
  LsqOptions shared = opts;
  shared.initial_guess = start;
  shared.max_restarts = 0;  // the sweep protocol runs each lambda once

  auto make_objective = [&](double lambda) {
    return [&geom, &y, &cfg, lambda, m](const auto& x) {
      using T = std::remove_cvref_t<decltype(x[0])>;
      const std::vector<T> lam = detail::forward_kernel<T>(geom, std::span<const T>(x), m);
      T acc(0.0);
      for (int j = 0; j < m; ++j) {
        const T r = lam[static_cast<std::size_t>(j)] - T(y[j]);
        acc += r * r;
      }
      for (std::size_t i = 0; i < x.size(); ++i) {
        const T d = x[i] - T(cfg.center[static_cast<int>(i)]);
        acc += T(lambda) * d * d;
      }
      return acc;
    };
  };

  std::vector<double> lower(static_cast<std::size_t>(n), box.a);
  std::vector<double> upper(static_cast<std::size_t>(n), box.b);

  auto error_inf = [&](const std::vector<double>& x) {
    double e = 0.0;
    for (int i = 0; i < n; ++i) e = std::max(e, std::abs(x[static_cast<std::size_t>(i)] - sigma_true[i]));
    return e;
  };

  TikhonovSweep sweep;
  {
    CounterRng unused(0);
    sweep.least_squares = minimize_with_restarts(make_objective(0.0), geom, y, box,
                                                 lower, upper, unused, shared);
    sweep.least_squares_error_inf = error_inf(sweep.least_squares.iterate);
  }

  sweep.table.reserve(cfg.lambdas.size());
  for (double lambda : cfg.lambdas) {
    TikhonovEntry entry;
    entry.lambda = lambda;
    try {
      CounterRng unused(0);
      entry.report = minimize_with_restarts(make_objective(lambda), geom, y, box,
                                            lower, upper, unused, shared);
      entry.error_inf = error_inf(entry.report.iterate);
    } catch (const numerical_error&) {
      entry.failed = true;
    }
    sweep.table.push_back(std::move(entry));
  }

  const TikhonovEntry* best = nullptr;
  for (const TikhonovEntry& entry : sweep.table) {
    if (entry.failed) continue;
    if (!best || entry.error_inf < best->error_inf) best = &entry;
  }
  if (!best) throw numerical_error("tikhonov_sweep: every lambda failed");
  sweep.best = best->report;
  sweep.best_lambda = best->lambda;
  sweep.best_error_inf = best->error_inf;
  return sweep;
}

} // namespace calderon
