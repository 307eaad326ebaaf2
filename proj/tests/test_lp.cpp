#include <doctest.h>

#include <cmath>
#include <limits>

#include "calderon/linalg.hpp"
#include "calderon/lp.hpp"
#include "calderon/rng.hpp"

using namespace calderon;
using lp::LinearProgram;
using lp::LPSolution;

namespace {

/// Brute-force oracle: enumerate basic solutions of min c^T x, A x = b,
/// x >= 0 and return the best feasible objective.
double vertex_enumeration_min(const std::vector<std::vector<double>>& a,
                              const std::vector<double>& b,
                              const std::vector<double>& c) {
  const int rows = static_cast<int>(a.size());
  const int cols = static_cast<int>(c.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(rows));

  const auto try_basis = [&](const std::vector<int>& basis) {
    DenseMatrix m(rows, rows);
    for (int r = 0; r < rows; ++r)
      for (int k = 0; k < rows; ++k) m(r, k) = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(basis[static_cast<std::size_t>(k)])];
    std::vector<double> x;
    try {
      x = lu_solve(m, b);
    } catch (const numerical_error&) {
      return;
    }
    double obj = 0.0;
    for (int k = 0; k < rows; ++k) {
      if (x[static_cast<std::size_t>(k)] < -1e-9) return;
      obj += c[static_cast<std::size_t>(basis[static_cast<std::size_t>(k)])] * x[static_cast<std::size_t>(k)];
    }
    best = std::min(best, obj);
  };

  // All size-`rows` subsets of the columns.
  const auto recurse = [&](auto&& self, int start, int depth) -> void {
    if (depth == rows) {
      try_basis(pick);
      return;
    }
    for (int j = start; j < cols; ++j) {
      pick[static_cast<std::size_t>(depth)] = j;
      self(self, j + 1, depth + 1);
    }
  };
  recurse(recurse, 0, 0);
  return best;
}

} // namespace

TEST_CASE("max x subject to x <= 1") {
  LinearProgram prog(LinearProgram::Sense::maximize);
  const int x = prog.add_variable(1.0);
  prog.add_less_equal({{x, 1.0}}, 1.0);
  const LPSolution sol = lp::solve_lp(prog);
  REQUIRE(sol.status == LPSolution::Status::optimal);
  CHECK(sol.values[static_cast<std::size_t>(x)] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.feasibility_residual <= 1e-8);
}

TEST_CASE("infeasible system x >= 0, x <= -1") {
  LinearProgram prog(LinearProgram::Sense::maximize);
  const int x = prog.add_variable(1.0);
  prog.add_less_equal({{x, 1.0}}, -1.0);
  const LPSolution sol = lp::solve_lp(prog);
  CHECK(sol.status == LPSolution::Status::infeasible);
}

TEST_CASE("unbounded maximization is detected") {
  LinearProgram prog(LinearProgram::Sense::maximize);
  const int x = prog.add_variable(1.0);
  const int y = prog.add_variable(0.0);
  prog.add_equality({{x, 1.0}, {y, -1.0}}, 0.0);  // x = y, both free upward
  const LPSolution sol = lp::solve_lp(prog);
  CHECK(sol.status == LPSolution::Status::unbounded);
}

TEST_CASE("free variables reach negative values") {
  LinearProgram prog(LinearProgram::Sense::minimize);
  const int x = prog.add_variable(1.0, /*nonnegative=*/false);
  prog.add_equality({{x, 1.0}}, -3.0);
  const LPSolution sol = lp::solve_lp(prog);
  REQUIRE(sol.status == LPSolution::Status::optimal);
  CHECK(sol.values[static_cast<std::size_t>(x)] == doctest::Approx(-3.0).epsilon(1e-12));
}

TEST_CASE("random dense LPs match vertex enumeration") {
  CounterRng rng(404);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int rows = 2 + static_cast<int>(rng.next_u64() % 4);
    const int cols = rows + 2 + static_cast<int>(rng.next_u64() % (10 - rows));

    std::vector<std::vector<double>> a(static_cast<std::size_t>(rows),
                                       std::vector<double>(static_cast<std::size_t>(cols)));
    for (auto& row : a)
      for (double& v : row) v = rng.uniform(-1.0, 1.0);

    // Feasible by construction: b = A x0 with x0 >= 0.
    std::vector<double> x0(static_cast<std::size_t>(cols), 0.0);
    for (double& v : x0) v = rng.next_double() < 0.5 ? 0.0 : rng.uniform(0.0, 2.0);
    std::vector<double> b(static_cast<std::size_t>(rows), 0.0);
    for (int r = 0; r < rows; ++r)
      for (int j = 0; j < cols; ++j) b[static_cast<std::size_t>(r)] += a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] * x0[static_cast<std::size_t>(j)];

    // Positive costs keep the minimum finite.
    std::vector<double> c(static_cast<std::size_t>(cols));
    for (double& v : c) v = rng.uniform(0.1, 2.0);

    LinearProgram prog(LinearProgram::Sense::minimize);
    for (int j = 0; j < cols; ++j) prog.add_variable(c[static_cast<std::size_t>(j)]);
    for (int r = 0; r < rows; ++r) {
      std::vector<LinearProgram::Entry> entries;
      for (int j = 0; j < cols; ++j) entries.push_back({j, a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)]});
      prog.add_equality(std::move(entries), b[static_cast<std::size_t>(r)]);
    }

    const LPSolution sol = lp::solve_lp(prog);
    REQUIRE(sol.status == LPSolution::Status::optimal);
    const double oracle = vertex_enumeration_min(a, b, c);
    CHECK(std::abs(sol.objective - oracle) <= 1e-9 * std::max(1.0, std::abs(oracle)));
    ++solved;
  }
  CHECK(solved == 60);
}

TEST_CASE("optimal bases satisfy complementary slackness with recovered duals") {
  CounterRng rng(505);
  for (int trial = 0; trial < 30; ++trial) {
    const int rows = 2 + static_cast<int>(rng.next_u64() % 3);
    const int cols = rows + 3;
    LinearProgram prog(trial % 2 == 0 ? LinearProgram::Sense::minimize
                                      : LinearProgram::Sense::maximize);
    std::vector<std::vector<double>> a(static_cast<std::size_t>(rows),
                                       std::vector<double>(static_cast<std::size_t>(cols)));
    std::vector<double> c(static_cast<std::size_t>(cols));
    for (double& v : c)
      v = prog.sense() == LinearProgram::Sense::minimize ? rng.uniform(0.1, 2.0)
                                                         : rng.uniform(-2.0, -0.1);
    for (int j = 0; j < cols; ++j) prog.add_variable(c[static_cast<std::size_t>(j)]);
    std::vector<double> x0(static_cast<std::size_t>(cols), 0.0);
    for (double& v : x0) v = rng.next_double() < 0.5 ? 0.0 : rng.uniform(0.0, 2.0);
    for (int r = 0; r < rows; ++r) {
      double rhs = 0.0;
      std::vector<LinearProgram::Entry> entries;
      for (int j = 0; j < cols; ++j) {
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = rng.uniform(-1.0, 1.0);
        entries.push_back({j, a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)]});
        rhs += a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] * x0[static_cast<std::size_t>(j)];
      }
      prog.add_equality(std::move(entries), rhs);
    }

    const LPSolution sol = lp::solve_lp(prog);
    REQUIRE(sol.status == LPSolution::Status::optimal);

    // rc_j = c_j - y^T a_j in original units, x_j rc_j = 0, and the reduced
    // costs have the optimal sign for the sense.
    for (int j = 0; j < cols; ++j) {
      double dot = 0.0;
      for (int r = 0; r < rows; ++r) dot += sol.duals[static_cast<std::size_t>(r)] * a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
      const double rc = c[static_cast<std::size_t>(j)] - dot;
      CHECK(std::abs(rc - sol.reduced_costs[static_cast<std::size_t>(j)]) <= 1e-7 * std::max(1.0, std::abs(rc)));
      CHECK(std::abs(sol.values[static_cast<std::size_t>(j)] * rc) <= 1e-8 * std::max(1.0, std::abs(sol.objective)));
      if (prog.sense() == LinearProgram::Sense::minimize)
        CHECK(rc >= -1e-7);
      else
        CHECK(rc <= 1e-7);
    }
  }
}

TEST_CASE("identical input yields an identical solution vector") {
  CounterRng rng(606);
  LinearProgram prog(LinearProgram::Sense::maximize);
  const int cols = 8;
  for (int j = 0; j < cols; ++j) prog.add_variable(rng.uniform(-1.0, 1.0));
  for (int r = 0; r < 4; ++r) {
    std::vector<LinearProgram::Entry> entries;
    for (int j = 0; j < cols; ++j) entries.push_back({j, rng.uniform(-1.0, 1.0)});
    prog.add_less_equal(std::move(entries), rng.uniform(0.5, 2.0));
  }
  {
    // Cap the simplex to keep the instance bounded.
    std::vector<LinearProgram::Entry> cap;
    for (int j = 0; j < cols; ++j) cap.push_back({j, 1.0});
    prog.add_less_equal(std::move(cap), 10.0);
  }
  const LPSolution first = lp::solve_lp(prog);
  const LPSolution second = lp::solve_lp(prog);
  REQUIRE(first.status == second.status);
  CHECK(first.iterations == second.iterations);
  CHECK(first.values == second.values);  // bitwise
  CHECK(first.objective == second.objective);
}

TEST_CASE("degenerate LP with zero right-hand sides solves cleanly") {
  // Stationarity-style rows: every rhs is 0 except a normalization.
  LinearProgram prog(LinearProgram::Sense::maximize);
  const int c1 = prog.add_variable(0.0);
  const int c2 = prog.add_variable(1.0);
  const int z1 = prog.add_variable(0.0);
  const int z2 = prog.add_variable(0.0);
  prog.add_equality({{c1, 1.0}}, 1.0);
  prog.add_equality({{c1, 1.0}, {z1, -0.8}, {z2, -0.3}}, 0.0);
  prog.add_equality({{c2, 1.0}, {z1, -0.2}, {z2, -0.4}}, 0.0);
  const LPSolution sol = lp::solve_lp(prog);
  REQUIRE(sol.status == LPSolution::Status::optimal);
  CHECK(sol.values[static_cast<std::size_t>(c1)] == doctest::Approx(1.0));
  // max c2 = max over z >= 0 of 0.2 z1 + 0.4 z2 s.t. 0.8 z1 + 0.3 z2 = 1:
  // best puts everything on z2: z2 = 10/3, c2 = 4/3.
  CHECK(sol.values[static_cast<std::size_t>(c2)] == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("MPS export carries every section with full precision") {
  LinearProgram prog(LinearProgram::Sense::maximize);
  const int x = prog.add_variable(0.125);
  const int y = prog.add_variable(0.0, /*nonnegative=*/false);
  prog.add_equality({{x, 2.0}, {y, -1.0}}, 0.5);
  const std::string mps = lp::write_mps(prog, "SAMPLE");
  CHECK(mps.find("NAME SAMPLE") != std::string::npos);
  CHECK(mps.find("OBJSENSE") != std::string::npos);
  CHECK(mps.find("MAX") != std::string::npos);
  CHECK(mps.find("ROWS") != std::string::npos);
  CHECK(mps.find(" E  R0") != std::string::npos);
  CHECK(mps.find("X0 COST 0.125") != std::string::npos);
  CHECK(mps.find("X0 R0 2") != std::string::npos);
  CHECK(mps.find("RHS R0 0.5") != std::string::npos);
  CHECK(mps.find(" FR BND X1") != std::string::npos);
  CHECK(mps.find("ENDATA") != std::string::npos);
}
