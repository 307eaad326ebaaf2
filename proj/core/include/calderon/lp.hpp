#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "calderon/errors.hpp"

namespace calderon::lp {

/// Standard-form linear program: optimize c^T x s.t. A x = b, with each
/// variable either nonnegative or free. Rows are stored sparsely as they are
/// added; inequality rows get a slack variable.
class LinearProgram {
public:
  enum class Sense { minimize, maximize };

  struct Entry {
    int column = 0;
    double value = 0.0;
  };
  struct Row {
    std::vector<Entry> entries;
    double rhs = 0.0;
  };

  explicit LinearProgram(Sense sense = Sense::maximize) : sense_(sense) {}

  int add_variable(double objective = 0.0, bool nonnegative = true);
  void add_equality(std::vector<Entry> entries, double rhs);
  /// a^T x <= rhs via a fresh nonnegative slack; returns the slack's index.
  int add_less_equal(std::vector<Entry> entries, double rhs);

  Sense sense() const { return sense_; }
  int variable_count() const { return static_cast<int>(objective_.size()); }
  int constraint_count() const { return static_cast<int>(rows_.size()); }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<bool>& nonnegative() const { return nonnegative_; }

private:
  Sense sense_;
  std::vector<Row> rows_;
  std::vector<double> objective_;
  std::vector<bool> nonnegative_;
};

struct LPSolution {
  enum class Status { optimal, infeasible, unbounded, failure };

  Status status = Status::failure;
  std::vector<double> values;
  double objective = std::numeric_limits<double>::quiet_NaN();
  long iterations = 0;
  /// Row duals and per-variable reduced costs in original (unscaled) units;
  /// populated for optimal solutions.
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  /// Scaled primal feasibility residual ||Ax - b||_inf after unscaling.
  double feasibility_residual = std::numeric_limits<double>::quiet_NaN();
  std::string diagnostics;
};

std::string status_name(LPSolution::Status status);

struct SimplexOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  double pivot_tol = 1e-10;
  int refactor_interval = 50;
  long max_iterations = 500000;
  long bland_threshold = 5000;  // degenerate pivots before switching to Bland
  bool scale = true;
};

/// Two-phase revised simplex with dense basis LU (refactored every
/// refactor_interval pivots, product-form eta updates in between),
/// max-abs row/column equilibration, Dantzig pricing with a Bland fallback
/// after heavy degeneracy. Deterministic: ties break to the lowest index.
LPSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

/// Free-format MPS text for cross-checking against external solvers; numbers
/// at full precision.
std::string write_mps(const LinearProgram& lp, const std::string& name = "LP");

} // namespace calderon::lp
