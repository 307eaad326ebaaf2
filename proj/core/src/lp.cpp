#include "calderon/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <lapacke.h>

#include "calderon/io.hpp"

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace calderon::lp {

int LinearProgram::add_variable(double objective, bool nonnegative) {
  objective_.push_back(objective);
  nonnegative_.push_back(nonnegative);
  return static_cast<int>(objective_.size()) - 1;
}

void LinearProgram::add_equality(std::vector<Entry> entries, double rhs) {
  if (!std::isfinite(rhs)) throw invalid_input_error("LP rhs must be finite");
  for (const Entry& e : entries) {
    if (e.column < 0 || e.column >= variable_count())
      throw invalid_input_error("LP row references an unknown variable");
    if (!std::isfinite(e.value)) throw invalid_input_error("LP entry must be finite");
  }
  rows_.push_back({std::move(entries), rhs});
}

int LinearProgram::add_less_equal(std::vector<Entry> entries, double rhs) {
  const int slack = add_variable(0.0, true);
  entries.push_back({slack, 1.0});
  add_equality(std::move(entries), rhs);
  return slack;
}

std::string status_name(LPSolution::Status status) {
  switch (status) {
    case LPSolution::Status::optimal: return "optimal";
    case LPSolution::Status::infeasible: return "infeasible";
    case LPSolution::Status::unbounded: return "unbounded";
    case LPSolution::Status::failure: return "failure";
  }
  return "unknown";
}

namespace {

struct Eta {
  int row = 0;
  std::vector<double> w;
};

/// Internal simplex state over the split/scaled standard form.
struct Simplex {
  int m = 0;       // rows
  int ncols = 0;   // internal structural columns (after free-variable split)
  std::vector<std::vector<LinearProgram::Entry>> cols;  // per internal column
  std::vector<double> obj;                              // phase-II costs (min form, scaled)
  std::vector<double> rhs;                              // scaled, nonnegative
  std::vector<int> col_orig;                            // original variable index
  std::vector<double> col_sign;                         // +1 or -1 (free split)
  std::vector<double> row_scale;                        // signed
  std::vector<double> col_scale;

  std::vector<int> basis;      // size m; >= ncols means artificial (code - ncols = row)
  std::vector<double> x_basic; // size m
  std::vector<char> is_basic;  // size ncols

  // Dense LU of the basis (column-major for LAPACK) plus eta updates.
  std::vector<double> factor;
  std::vector<lapack_int> ipiv;
  std::vector<Eta> etas;

  long iterations = 0;
  long degenerate_pivots = 0;
  bool bland = false;

  const SimplexOptions* opts = nullptr;

  bool is_artificial(int code) const { return code >= ncols; }

  bool refactor() {
    const std::size_t mm = static_cast<std::size_t>(m);
    factor.assign(mm * mm, 0.0);
    for (int r = 0; r < m; ++r) {
      const int code = basis[static_cast<std::size_t>(r)];
      if (is_artificial(code)) {
        const int row = code - ncols;
        factor[static_cast<std::size_t>(r) * mm + static_cast<std::size_t>(row)] = 1.0;
      } else {
        for (const auto& e : cols[static_cast<std::size_t>(code)])
          factor[static_cast<std::size_t>(r) * mm + static_cast<std::size_t>(e.column)] = e.value;
      }
    }
    ipiv.assign(mm, 0);
    const lapack_int info = LAPACKE_dgetrf(LAPACK_COL_MAJOR, m, m, factor.data(),
                                           m, ipiv.data());
    etas.clear();
    return info == 0;
  }

  void ftran(std::vector<double>& z) const {
    LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', m, 1, factor.data(), m, ipiv.data(),
                   z.data(), m);
    for (const Eta& e : etas) {
      const double zr = z[static_cast<std::size_t>(e.row)] / e.w[static_cast<std::size_t>(e.row)];
      if (zr != 0.0) {
        for (int i = 0; i < m; ++i)
          z[static_cast<std::size_t>(i)] -= zr * e.w[static_cast<std::size_t>(i)];
      }
      z[static_cast<std::size_t>(e.row)] = zr;
    }
  }

  void btran(std::vector<double>& y) const {
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      const Eta& e = *it;
      double acc = y[static_cast<std::size_t>(e.row)];
      for (int i = 0; i < m; ++i) {
        if (i == e.row) continue;
        acc -= e.w[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
      }
      y[static_cast<std::size_t>(e.row)] = acc / e.w[static_cast<std::size_t>(e.row)];
    }
    LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'T', m, 1, factor.data(), m, ipiv.data(),
                   y.data(), m);
  }

  std::vector<double> column_dense(int code) const {
    std::vector<double> a(static_cast<std::size_t>(m), 0.0);
    if (is_artificial(code)) {
      a[static_cast<std::size_t>(code - ncols)] = 1.0;
    } else {
      for (const auto& e : cols[static_cast<std::size_t>(code)])
        a[static_cast<std::size_t>(e.column)] = e.value;
    }
    return a;
  }

  double sparse_dot(int col, const std::vector<double>& y) const {
    double acc = 0.0;
    for (const auto& e : cols[static_cast<std::size_t>(col)])
      acc += e.value * y[static_cast<std::size_t>(e.column)];
    return acc;
  }
};

enum class StepResult { moved, optimal, unbounded, failure };

/// One priced simplex iteration with the given costs. `phase1` changes the
/// artificial handling: in phase I artificials are ordinary variables; in
/// phase II they are fixed at zero and leave on any nonzero pivot.
StepResult simplex_step(Simplex& s, const std::vector<double>& costs,
                        bool phase1, std::string& diagnostics) {
  const SimplexOptions& opts = *s.opts;

  // Reduced costs via one BTRAN.
  std::vector<double> y(static_cast<std::size_t>(s.m), 0.0);
  for (int r = 0; r < s.m; ++r) {
    const int code = s.basis[static_cast<std::size_t>(r)];
    y[static_cast<std::size_t>(r)] =
        s.is_artificial(code) ? (phase1 ? 1.0 : 0.0) : costs[static_cast<std::size_t>(code)];
  }
  // y currently holds c_B ordered by basis position; btran solves B^T y = c_B.
  s.btran(y);

  int entering = -1;
  double best = -opts.opt_tol;
  for (int j = 0; j < s.ncols; ++j) {
    if (s.is_basic[static_cast<std::size_t>(j)]) continue;
    const double d = costs[static_cast<std::size_t>(j)] - s.sparse_dot(j, y);
    if (s.bland) {
      if (d < -opts.opt_tol) {
        entering = j;
        break;
      }
    } else if (d < best) {
      best = d;
      entering = j;
    }
  }
  // Artificials are never priced, so they cannot re-enter in either phase.
  if (entering < 0) return StepResult::optimal;

  std::vector<double> w = s.column_dense(entering);
  s.ftran(w);

  // Ratio test.
  double theta = std::numeric_limits<double>::infinity();
  int leave = -1;
  double leave_pivot = 0.0;
  bool leave_artificial = false;
  for (int r = 0; r < s.m; ++r) {
    const int code = s.basis[static_cast<std::size_t>(r)];
    const double wr = w[static_cast<std::size_t>(r)];
    const bool art_fixed = !phase1 && s.is_artificial(code);
    double ratio = std::numeric_limits<double>::infinity();
    double pivot = 0.0;
    if (art_fixed) {
      // Artificial pinned to zero: any solid pivot ejects it at theta ~ 0.
      if (std::abs(wr) > opts.pivot_tol) {
        ratio = std::max(s.x_basic[static_cast<std::size_t>(r)], 0.0) / std::abs(wr);
        pivot = wr;
      }
    } else if (wr > opts.pivot_tol) {
      ratio = std::max(s.x_basic[static_cast<std::size_t>(r)], 0.0) / wr;
      pivot = wr;
    }
    if (pivot == 0.0) continue;
    const double slack = 1e-9 * (1.0 + std::abs(theta));
    const bool tie = ratio <= theta + slack && leave >= 0;
    if (ratio < theta - slack || leave < 0) {
      theta = ratio;
      leave = r;
      leave_pivot = pivot;
      leave_artificial = art_fixed || s.is_artificial(code);
    } else if (tie) {
      const bool cand_art = art_fixed || s.is_artificial(code);
      if (s.bland) {
        // Bland: lowest basis code among ties.
        if (s.basis[static_cast<std::size_t>(r)] < s.basis[static_cast<std::size_t>(leave)]) {
          theta = std::min(theta, ratio);
          leave = r;
          leave_pivot = pivot;
          leave_artificial = cand_art;
        }
      } else if ((cand_art && !leave_artificial) ||
                 (cand_art == leave_artificial && std::abs(pivot) > std::abs(leave_pivot))) {
        theta = std::min(theta, ratio);
        leave = r;
        leave_pivot = pivot;
        leave_artificial = cand_art;
      }
    }
  }

  if (leave < 0) {
    if (phase1) {
      diagnostics = "phase I ratio test found no pivot";
      return StepResult::failure;
    }
    return StepResult::unbounded;
  }

  if (theta <= 1e-12) ++s.degenerate_pivots;
  if (!s.bland && s.degenerate_pivots > opts.bland_threshold) s.bland = true;

  for (int r = 0; r < s.m; ++r)
    s.x_basic[static_cast<std::size_t>(r)] -= theta * w[static_cast<std::size_t>(r)];
  s.x_basic[static_cast<std::size_t>(leave)] = theta;

  const int leaving_code = s.basis[static_cast<std::size_t>(leave)];
  if (!s.is_artificial(leaving_code)) s.is_basic[static_cast<std::size_t>(leaving_code)] = 0;
  s.basis[static_cast<std::size_t>(leave)] = entering;
  s.is_basic[static_cast<std::size_t>(entering)] = 1;

  s.etas.push_back({leave, std::move(w)});
  if (static_cast<int>(s.etas.size()) >= opts.refactor_interval) {
    if (!s.refactor()) {
      diagnostics = "singular basis during refactorization";
      return StepResult::failure;
    }
    // Recompute basic values from scratch to shed accumulated drift.
    std::vector<double> xb = s.rhs;
    s.ftran(xb);
    s.x_basic = std::move(xb);
  }
  ++s.iterations;
  return StepResult::moved;
}

} // namespace

LPSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
  if (openblas_set_num_threads) openblas_set_num_threads(1);

  LPSolution sol;
  const int nvars = lp.variable_count();
  const int nrows = lp.constraint_count();
  if (nrows == 0) {
    sol.status = LPSolution::Status::failure;
    sol.diagnostics = "no constraints";
    return sol;
  }

  Simplex s;
  s.opts = &opts;
  s.m = nrows;

  // Free-variable split x = x+ - x-.
  for (int j = 0; j < nvars; ++j) {
    s.col_orig.push_back(j);
    s.col_sign.push_back(1.0);
    if (!lp.nonnegative()[static_cast<std::size_t>(j)]) {
      s.col_orig.push_back(j);
      s.col_sign.push_back(-1.0);
    }
  }
  s.ncols = static_cast<int>(s.col_orig.size());
  std::vector<std::vector<int>> var_to_cols(static_cast<std::size_t>(nvars));
  for (int c = 0; c < s.ncols; ++c)
    var_to_cols[static_cast<std::size_t>(s.col_orig[static_cast<std::size_t>(c)])].push_back(c);

  s.cols.assign(static_cast<std::size_t>(s.ncols), {});
  s.rhs.assign(static_cast<std::size_t>(s.m), 0.0);
  for (int r = 0; r < s.m; ++r) {
    const LinearProgram::Row& row = lp.rows()[static_cast<std::size_t>(r)];
    s.rhs[static_cast<std::size_t>(r)] = row.rhs;
    for (const auto& e : row.entries)
      for (int c : var_to_cols[static_cast<std::size_t>(e.column)])
        s.cols[static_cast<std::size_t>(c)].push_back(
            {r, e.value * s.col_sign[static_cast<std::size_t>(c)]});
  }

  // Max-abs equilibration, two sweeps of rows then columns.
  s.row_scale.assign(static_cast<std::size_t>(s.m), 1.0);
  s.col_scale.assign(static_cast<std::size_t>(s.ncols), 1.0);
  if (opts.scale) {
    for (int sweep = 0; sweep < 2; ++sweep) {
      std::vector<double> row_max(static_cast<std::size_t>(s.m), 0.0);
      for (const auto& col : s.cols)
        for (const auto& e : col)
          row_max[static_cast<std::size_t>(e.column)] =
              std::max(row_max[static_cast<std::size_t>(e.column)], std::abs(e.value));
      std::vector<double> row_factor(static_cast<std::size_t>(s.m), 1.0);
      for (int r = 0; r < s.m; ++r)
        if (row_max[static_cast<std::size_t>(r)] > 0.0)
          row_factor[static_cast<std::size_t>(r)] = 1.0 / row_max[static_cast<std::size_t>(r)];
      for (int r = 0; r < s.m; ++r) {
        s.row_scale[static_cast<std::size_t>(r)] *= row_factor[static_cast<std::size_t>(r)];
        s.rhs[static_cast<std::size_t>(r)] *= row_factor[static_cast<std::size_t>(r)];
      }
      for (auto& col : s.cols)
        for (auto& e : col) e.value *= row_factor[static_cast<std::size_t>(e.column)];

      for (int c = 0; c < s.ncols; ++c) {
        double cmax = 0.0;
        for (const auto& e : s.cols[static_cast<std::size_t>(c)])
          cmax = std::max(cmax, std::abs(e.value));
        if (cmax > 0.0 && cmax != 1.0) {
          const double f = 1.0 / cmax;
          s.col_scale[static_cast<std::size_t>(c)] *= f;
          for (auto& e : s.cols[static_cast<std::size_t>(c)]) e.value *= f;
        }
      }
    }
  }

  // Nonnegative right-hand side so the artificial basis is feasible.
  {
    std::vector<char> flip(static_cast<std::size_t>(s.m), 0);
    for (int r = 0; r < s.m; ++r) {
      if (s.rhs[static_cast<std::size_t>(r)] < 0.0) {
        flip[static_cast<std::size_t>(r)] = 1;
        s.rhs[static_cast<std::size_t>(r)] = -s.rhs[static_cast<std::size_t>(r)];
        s.row_scale[static_cast<std::size_t>(r)] = -s.row_scale[static_cast<std::size_t>(r)];
      }
    }
    for (auto& col : s.cols)
      for (auto& e : col)
        if (flip[static_cast<std::size_t>(e.column)]) e.value = -e.value;
  }

  // Scaled min-form objective.
  const double obj_sign = lp.sense() == LinearProgram::Sense::maximize ? -1.0 : 1.0;
  s.obj.assign(static_cast<std::size_t>(s.ncols), 0.0);
  for (int c = 0; c < s.ncols; ++c)
    s.obj[static_cast<std::size_t>(c)] =
        obj_sign * lp.objective()[static_cast<std::size_t>(s.col_orig[static_cast<std::size_t>(c)])] *
        s.col_sign[static_cast<std::size_t>(c)] * s.col_scale[static_cast<std::size_t>(c)];

  // Phase I from the all-artificial basis.
  s.basis.resize(static_cast<std::size_t>(s.m));
  for (int r = 0; r < s.m; ++r) s.basis[static_cast<std::size_t>(r)] = s.ncols + r;
  s.is_basic.assign(static_cast<std::size_t>(s.ncols), 0);
  s.x_basic = s.rhs;
  if (!s.refactor()) {
    sol.status = LPSolution::Status::failure;
    sol.diagnostics = "initial factorization failed";
    return sol;
  }

  const std::vector<double> phase1_costs(static_cast<std::size_t>(s.ncols), 0.0);
  std::string diagnostics;
  for (;;) {
    if (s.iterations > opts.max_iterations) {
      sol.status = LPSolution::Status::failure;
      sol.diagnostics = "iteration limit in phase I";
      sol.iterations = s.iterations;
      return sol;
    }
    const StepResult res = simplex_step(s, phase1_costs, true, diagnostics);
    if (res == StepResult::moved) continue;
    if (res == StepResult::optimal) break;
    sol.status = LPSolution::Status::failure;
    sol.diagnostics = diagnostics.empty() ? "phase I breakdown" : diagnostics;
    sol.iterations = s.iterations;
    return sol;
  }

  double infeasibility = 0.0;
  for (int r = 0; r < s.m; ++r)
    if (s.is_artificial(s.basis[static_cast<std::size_t>(r)]))
      infeasibility += std::max(s.x_basic[static_cast<std::size_t>(r)], 0.0);
  double rhs_inf = 0.0;
  for (double v : s.rhs) rhs_inf = std::max(rhs_inf, std::abs(v));
  if (infeasibility > 1e-7 * std::max(1.0, rhs_inf)) {
    sol.status = LPSolution::Status::infeasible;
    sol.objective = infeasibility;
    sol.iterations = s.iterations;
    return sol;
  }

  // Drive leftover artificials out of the basis where a nonzero pivot exists.
  for (int r = 0; r < s.m; ++r) {
    if (!s.is_artificial(s.basis[static_cast<std::size_t>(r)])) continue;
    std::vector<double> rho(static_cast<std::size_t>(s.m), 0.0);
    rho[static_cast<std::size_t>(r)] = 1.0;
    s.btran(rho);
    int pivot_col = -1;
    for (int j = 0; j < s.ncols; ++j) {
      if (s.is_basic[static_cast<std::size_t>(j)]) continue;
      if (std::abs(s.sparse_dot(j, rho)) > 1e-7) {
        pivot_col = j;
        break;
      }
    }
    if (pivot_col < 0) continue;  // redundant row; artificial stays pinned at 0
    std::vector<double> w = s.column_dense(pivot_col);
    s.ftran(w);
    if (std::abs(w[static_cast<std::size_t>(r)]) <= opts.pivot_tol) continue;
    const double theta = std::max(s.x_basic[static_cast<std::size_t>(r)], 0.0) /
                         w[static_cast<std::size_t>(r)];
    for (int i = 0; i < s.m; ++i)
      s.x_basic[static_cast<std::size_t>(i)] -= theta * w[static_cast<std::size_t>(i)];
    s.x_basic[static_cast<std::size_t>(r)] = theta;
    s.basis[static_cast<std::size_t>(r)] = pivot_col;
    s.is_basic[static_cast<std::size_t>(pivot_col)] = 1;
    s.etas.push_back({r, std::move(w)});
    if (static_cast<int>(s.etas.size()) >= opts.refactor_interval && !s.refactor()) {
      sol.status = LPSolution::Status::failure;
      sol.diagnostics = "singular basis after artificial cleanup";
      return sol;
    }
  }

  // Phase II.
  s.degenerate_pivots = 0;
  s.bland = false;
  for (;;) {
    if (s.iterations > opts.max_iterations) {
      sol.status = LPSolution::Status::failure;
      sol.diagnostics = "iteration limit in phase II";
      sol.iterations = s.iterations;
      return sol;
    }
    const StepResult res = simplex_step(s, s.obj, false, diagnostics);
    if (res == StepResult::moved) continue;
    if (res == StepResult::optimal) break;
    if (res == StepResult::unbounded) {
      sol.status = LPSolution::Status::unbounded;
      sol.iterations = s.iterations;
      return sol;
    }
    sol.status = LPSolution::Status::failure;
    sol.diagnostics = diagnostics.empty() ? "phase II breakdown" : diagnostics;
    sol.iterations = s.iterations;
    return sol;
  }

  // Extract the solution in original units.
  std::vector<double> internal(static_cast<std::size_t>(s.ncols), 0.0);
  for (int r = 0; r < s.m; ++r) {
    const int code = s.basis[static_cast<std::size_t>(r)];
    if (!s.is_artificial(code))
      internal[static_cast<std::size_t>(code)] =
          std::max(s.x_basic[static_cast<std::size_t>(r)], 0.0);
  }
  sol.values.assign(static_cast<std::size_t>(nvars), 0.0);
  for (int c = 0; c < s.ncols; ++c)
    sol.values[static_cast<std::size_t>(s.col_orig[static_cast<std::size_t>(c)])] +=
        s.col_sign[static_cast<std::size_t>(c)] * s.col_scale[static_cast<std::size_t>(c)] *
        internal[static_cast<std::size_t>(c)];

  sol.objective = 0.0;
  for (int j = 0; j < nvars; ++j)
    sol.objective += lp.objective()[static_cast<std::size_t>(j)] * sol.values[static_cast<std::size_t>(j)];

  // Scaled feasibility residual.
  double residual = 0.0;
  {
    std::vector<double> ax(static_cast<std::size_t>(s.m), 0.0);
    for (int c = 0; c < s.ncols; ++c)
      for (const auto& e : s.cols[static_cast<std::size_t>(c)])
        ax[static_cast<std::size_t>(e.column)] += e.value * internal[static_cast<std::size_t>(c)];
    for (int r = 0; r < s.m; ++r)
      residual = std::max(residual,
                          std::abs(ax[static_cast<std::size_t>(r)] - s.rhs[static_cast<std::size_t>(r)]));
  }
  sol.feasibility_residual = residual;

  // Duals and reduced costs in the original sense and units.
  std::vector<double> y(static_cast<std::size_t>(s.m), 0.0);
  for (int r = 0; r < s.m; ++r) {
    const int code = s.basis[static_cast<std::size_t>(r)];
    y[static_cast<std::size_t>(r)] =
        s.is_artificial(code) ? 0.0 : s.obj[static_cast<std::size_t>(code)];
  }
  s.btran(y);
  sol.duals.assign(static_cast<std::size_t>(nrows), 0.0);
  for (int r = 0; r < s.m; ++r)
    sol.duals[static_cast<std::size_t>(r)] =
        obj_sign * y[static_cast<std::size_t>(r)] * s.row_scale[static_cast<std::size_t>(r)];
  sol.reduced_costs.assign(static_cast<std::size_t>(nvars), 0.0);
  for (int c = 0; c < s.ncols; ++c) {
    if (s.col_sign[static_cast<std::size_t>(c)] < 0.0) continue;  // report the + split
    const double d = s.obj[static_cast<std::size_t>(c)] - s.sparse_dot(c, y);
    sol.reduced_costs[static_cast<std::size_t>(s.col_orig[static_cast<std::size_t>(c)])] =
        obj_sign * d / s.col_scale[static_cast<std::size_t>(c)];
  }

  sol.status = LPSolution::Status::optimal;
  sol.iterations = s.iterations;
  return sol;
}

std::string write_mps(const LinearProgram& lp, const std::string& name) {
  std::string out;
  out += "NAME " + name + "\n";
  out += "OBJSENSE\n    " +
         std::string(lp.sense() == LinearProgram::Sense::maximize ? "MAX" : "MIN") + "\n";
  out += "ROWS\n N  COST\n";
  for (int r = 0; r < lp.constraint_count(); ++r)
    out += " E  R" + std::to_string(r) + "\n";

  // Column-major listing.
  std::vector<std::vector<std::pair<int, double>>> cols(
      static_cast<std::size_t>(lp.variable_count()));
  for (int r = 0; r < lp.constraint_count(); ++r)
    for (const auto& e : lp.rows()[static_cast<std::size_t>(r)].entries)
      cols[static_cast<std::size_t>(e.column)].push_back({r, e.value});

  out += "COLUMNS\n";
  for (int j = 0; j < lp.variable_count(); ++j) {
    const std::string cname = "X" + std::to_string(j);
    if (lp.objective()[static_cast<std::size_t>(j)] != 0.0)
      out += "    " + cname + " COST " +
             format_double(lp.objective()[static_cast<std::size_t>(j)]) + "\n";
    for (const auto& [row, value] : cols[static_cast<std::size_t>(j)])
      out += "    " + cname + " R" + std::to_string(row) + " " + format_double(value) + "\n";
  }

  out += "RHS\n";
  for (int r = 0; r < lp.constraint_count(); ++r) {
    const double rhs = lp.rows()[static_cast<std::size_t>(r)].rhs;
    if (rhs != 0.0)
      out += "    RHS R" + std::to_string(r) + " " + format_double(rhs) + "\n";
  }

  out += "BOUNDS\n";
  for (int j = 0; j < lp.variable_count(); ++j)
    if (!lp.nonnegative()[static_cast<std::size_t>(j)])
      out += " FR BND X" + std::to_string(j) + "\n";
  out += "ENDATA\n";
  return out;
}

} // namespace calderon::lp
