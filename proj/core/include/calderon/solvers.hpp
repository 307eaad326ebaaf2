#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "calderon/forward.hpp"
#include "calderon/geometry.hpp"
#include "calderon/io.hpp"
#include "calderon/rng.hpp"

namespace calderon {

struct TrajectoryPoint {
  int iter = 0;
  std::vector<double> sigma;
  double residual_inf = 0.0;
  double residual_two = 0.0;
};

/// Outcome of a solve. `converged` means the solver-specific tolerance was
/// met: the residual sup-norm for root finding, the (projected) gradient
/// sup-norm for the minimizers.
struct SolveReport {
  enum class Status { converged, stagnated, max_iter, max_restarts };

  Status status = Status::max_iter;
  int iterations = 0;
  int restarts = 0;
  double final_residual_inf = std::numeric_limits<double>::quiet_NaN();
  double final_gradient_inf = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> iterate;
  std::vector<TrajectoryPoint> trajectory;

  /// Set by solve_pc when y pins the feasible set to {b*1}.
  bool boundary_case = false;

  /// Populated on stagnation: extreme singular values of the objective
  /// Hessian at the returned iterate.
  double hessian_sv_max = std::numeric_limits<double>::quiet_NaN();
  double hessian_sv_min = std::numeric_limits<double>::quiet_NaN();
};

std::string status_name(SolveReport::Status status);
std::string to_json(const SolveReport& report);

/// Trajectory CSV with columns iter, sigma_1..sigma_n, residual_inf.
CsvTable trajectory_csv(const SolveReport& report);

struct NewtonOptions {
  double tol_inf = 1e-15;
  int max_restarts = 10;
  int max_iterations = 400;  // per attempt
  double initial_radius = 1.0;
  double radius_floor = 1e-14;
  double radius_cap = 1e3;
  double positivity_floor = 1e-6;
  int stagnation_window = 50;
  bool record_trajectory = false;
  std::optional<std::vector<double>> initial_guess;
};

/// Dogleg trust-region Newton for the square root-finding problem
/// Lambda(sigma) = y with m = n. Initialized (and re-initialized on
/// stagnation) uniformly in [a, b]^n from `rng`; iterates are clamped to
/// stay >= positivity_floor. Accepted steps never increase ||F||_2.
SolveReport newton_root(const RadialGeometry& geom, const MeasurementVector& y,
                        const BoxPrior& box, CounterRng& rng,
                        const NewtonOptions& opts = {});

struct LsqOptions {
  double gradient_tol_inf = 1e-12;
  int max_restarts = 10;
  double lower_floor = 1e-6;
  double barrier_t0 = 1.0;
  double barrier_mu = 10.0;
  double barrier_gap = 1e-12;
  int max_newton_per_stage = 60;
  bool record_trajectory = false;
  std::optional<std::vector<double>> initial_guess;
};

/// Interior-point Newton for min 0.5 ||Lambda(sigma) - y||_2^2 over
/// sigma >= lower_floor (m >= n). Log-barrier outer loop with AD Hessians;
/// non-SPD Hessians get a Levenberg shift. Restarts like newton_root.
SolveReport lsq_box(const RadialGeometry& geom, const MeasurementVector& y,
                    const BoxPrior& box, CounterRng& rng, const LsqOptions& opts = {});

struct TikhonovConfig {
  std::vector<double> lambdas;  // ascending, strictly positive
  Conductivity center;
};

/// lambdas = 10^alpha with alpha a uniform 20-point discretization of
/// (-7, -2); center = [(a+b)/2] * 1.
TikhonovConfig default_tikhonov_config(const BoxPrior& box, int n);

struct TikhonovEntry {
  double lambda = 0.0;
  bool failed = false;
  double error_inf = std::numeric_limits<double>::quiet_NaN();
  SolveReport report;
};

struct TikhonovSweep {
  double best_lambda = 0.0;
  double best_error_inf = std::numeric_limits<double>::quiet_NaN();
  SolveReport best;
  double least_squares_error_inf = std::numeric_limits<double>::quiet_NaN();
  SolveReport least_squares;
  std::vector<TikhonovEntry> table;
};

/// Solves min_{sigma in [a,b]^n} ||Lambda(sigma) - y||^2 + lambda
/// ||sigma - center||^2 for every lambda in cfg (shared random start), plus
/// the lambda = 0 least-squares arm. The best lambda is picked by the true
/// sup-norm error against sigma_true -- oracle selection, which favors the
/// regularized arm by construction. Per-lambda failures are recorded in the
/// table, not fatal.
TikhonovSweep tikhonov_sweep(const RadialGeometry& geom, const MeasurementVector& y,
                             const BoxPrior& box, const TikhonovConfig& cfg,
                             const Conductivity& sigma_true, CounterRng& rng,
                             const LsqOptions& opts = {});

} // namespace calderon
