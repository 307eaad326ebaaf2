#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "calderon/forward.hpp"
#include "calderon/geometry.hpp"
#include "calderon/landscape.hpp"
#include "calderon/lp.hpp"
#include "calderon/rng.hpp"
#include "calderon/solvers.hpp"

namespace calderon {

/// The c-estimation linear program plus the bookkeeping needed to read the
/// solution back. Column layout: c_1..c_n first, then per grid point (in
/// enumeration order) the surviving lower-bound multipliers, upper-bound
/// multipliers and the z block. Row 0 is c_1 = 1; then n stationarity rows
/// per point.
struct CEstimationLp {
  lp::LinearProgram lp{lp::LinearProgram::Sense::maximize};
  int n = 0;
  int m = 0;
  long grid_points = 0;

  struct PointVars {
    long grid_index = 0;
    std::vector<double> sigma;
    std::vector<int> lambda_cols;   // lower-bound multipliers kept
    std::vector<int> lambda_coords; // their coordinates (sigma_i == a)
    std::vector<int> mu_cols;       // upper-bound multipliers kept
    std::vector<int> mu_coords;     // their coordinates (sigma_i == b)
    std::vector<int> z_cols;        // m entries
  };
  std::vector<PointVars> points;
};

/// Builds the KKT-based weight-estimation LP over (I_k)^n minus {b*1}:
/// maximize c_n subject to c >= 0, c_1 = 1, multiplier nonnegativity, the
/// complementarity pattern (lambda_{l,i} eliminated unless sigma_{l,i} = a,
/// mu_{l,i} unless sigma_{l,i} = b) and the stationarity rows
///   c_i + mu_{l,i} - lambda_{l,i} + sum_j z_{l,j} d_i lambda_j(sigma_l) = 0
/// with AD Jacobians.
CEstimationLp build_c_estimation_lp(const RadialGeometry& geom, const BoxPrior& box,
                                    const GridSpec& grid, int m);

struct WeightEstimate {
  enum class Status { optimal, infeasible, failure };

  std::vector<double> c;
  int m_used = 0;
  GridSpec grid;
  Status status = Status::failure;
  double smallest_coefficient = std::numeric_limits<double>::quiet_NaN();
  long lp_iterations = 0;
  std::string diagnostics;
};

std::string status_name(WeightEstimate::Status status);
std::string to_json(const WeightEstimate& estimate);

struct EstimateOptions {
  enum class Path { automatic, monolithic, generation };

  int m_cap = 40;
  Path path = Path::automatic;  // monolithic for n <= 4, generation above
  lp::SimplexOptions lp_opts;
  unsigned threads = 0;
};

/// Solves the estimation LP for m = m_start, m_start + 1, ... until feasible
/// (spec protocol); reports the first feasible m and its weight vector. The
/// generation path solves the same LP by grid-point generation: a restricted
/// master over a subset of points plus per-point feasibility separation, with
/// the restricted optimum accepted only once every grid point is satisfied
/// (at which moment it is optimal for the full LP).
WeightEstimate estimate_c(const RadialGeometry& geom, const BoxPrior& box,
                          const GridSpec& grid, int m_start,
                          const EstimateOptions& opts = {});

struct PcOptions {
  double barrier_t0 = 1.0;
  double barrier_mu = 10.0;
  double gap_target = 1e-10;
  int max_newton_per_stage = 60;
  double boundary_tol = 1e-12;
  bool record_trajectory = false;  // one central-path sample per stage
};

/// Log-barrier interior-point solve of
///   min <c, sigma> s.t. Lambda(sigma) <= y, sigma in [a, b]^n.
/// Strictly feasible start sigma = (b - delta) * 1 with delta found by
/// bisection; if no strictly feasible point exists within boundary_tol of
/// b*1 the feasible set is {b*1} and that point is returned with
/// boundary_case set.
SolveReport solve_pc(const RadialGeometry& geom, const BoxPrior& box,
                     const std::vector<double>& c, const MeasurementVector& y,
                     const PcOptions& opts = {});

struct KKTCertificate {
  std::vector<double> lambda;  // lower-bound multipliers, >= 0
  std::vector<double> mu;      // upper-bound multipliers, >= 0
  std::vector<double> z;       // measurement multipliers, >= 0
  double stationarity_residual_inf = std::numeric_limits<double>::quiet_NaN();
  double complementarity_residual_inf = std::numeric_limits<double>::quiet_NaN();
};

/// Recovers multipliers for the KKT system of P_c(y) at sigma by nonnegative
/// least squares over the active constraints and reports the residuals; the
/// residuals speak for optimality, nothing throws.
KKTCertificate check_kkt(const RadialGeometry& geom, const BoxPrior& box,
                         const std::vector<double>& c, const Conductivity& sigma,
                         const MeasurementVector& y);

/// Fixed log-spaced error histogram, 4 bins per decade from 1e-16 to 1e0;
/// out-of-range errors are clamped into the end bins.
struct ErrorHistogram {
  std::vector<double> bin_lo;
  std::vector<long> counts;
};
ErrorHistogram make_error_histogram(const std::vector<double>& errors);

struct UniversalityReport {
  int trials = 0;
  std::vector<double> errors;  // per trial, trial order
  double failure_threshold = 0.0;
  double failure_fraction = 0.0;
  double median_error = 0.0;
  double max_error = 0.0;
  ErrorHistogram histogram;
};

/// Draws `trials` unknowns uniformly in the box, solves P_c(Lambda(sigma))
/// with m measurements (the m the weight was estimated for) and reports the
/// sup-norm error distribution. An error above half the random-guess level
/// (b - a) / 3 counts as a universality failure. Requires the normalization
/// c_1 = 1 and c >= 0.
UniversalityReport validate_weight(const RadialGeometry& geom, const BoxPrior& box,
                                   const std::vector<double>& c, int m, int trials,
                                   std::uint64_t master_seed, unsigned threads = 0);

} // namespace calderon
