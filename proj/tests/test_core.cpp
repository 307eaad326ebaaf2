#include <doctest.h>

#include <cmath>
#include <gmpxx.h>

#include "calderon/autodiff.hpp"
#include "calderon/dual.hpp"
#include "calderon/forward.hpp"
#include "calderon/geometry.hpp"
#include "calderon/io.hpp"
#include "calderon/linalg.hpp"
#include "calderon/rng.hpp"

using namespace calderon;

namespace {

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1e-300, std::abs(a), std::abs(b)});
}

std::vector<double> random_sigma(CounterRng& rng, int n, double lo = 0.5,
                                 double hi = 1.5) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (double& v : s) v = rng.uniform(lo, hi);
  return s;
}

double matrix_rel_error(const DenseMatrix& a, const DenseMatrix& b) {
  double diff = 0.0, scale = 0.0;
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) {
      diff = std::max(diff, std::abs(a(r, c) - b(r, c)));
      scale = std::max(scale, std::abs(a(r, c)));
    }
  return diff / std::max(scale, 1e-300);
}

/// Cofactor-expansion determinant, brute-force oracle for n <= 4.
double cofactor_det(const DenseMatrix& a) {
  const int n = a.rows();
  if (n == 1) return a(0, 0);
  double det = 0.0;
  for (int c = 0; c < n; ++c) {
    const double sign = c % 2 == 0 ? 1.0 : -1.0;
    det += sign * a(0, c) * cofactor_det(a.minor_matrix(0, c));
  }
  return det;
}

/// High-precision smallest singular value through the normal equations:
/// two-sided Jacobi eigensolve of A^T A in 512-bit floats. Independent of
/// the production one-sided Jacobi in both algorithm and arithmetic.
double svd_min_oracle(const DenseMatrix& a) {
  const int n = a.cols();
  const int rows = a.rows();
  mpf_set_default_prec(512);
  std::vector<mpf_class> g(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      mpf_class acc = 0;
      for (int r = 0; r < rows; ++r)
        acc += mpf_class(a(r, i)) * mpf_class(a(r, j));
      g[static_cast<std::size_t>(i) * n + j] = acc;
    }
  auto at = [&](int i, int j) -> mpf_class& {
    return g[static_cast<std::size_t>(i) * n + j];
  };
  for (int sweep = 0; sweep < 200; ++sweep) {
    mpf_class off = 0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off += abs(at(p, q));
    if (off < mpf_class(1e-120)) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (at(p, q) == 0) continue;
        const mpf_class theta = (at(q, q) - at(p, p)) / (2 * at(p, q));
        mpf_class t = 1 / (abs(theta) + sqrt(theta * theta + 1));
        if (theta < 0) t = -t;
        const mpf_class c = 1 / sqrt(t * t + 1);
        const mpf_class s = t * c;
        for (int k = 0; k < n; ++k) {
          const mpf_class gpk = at(p, k), gqk = at(q, k);
          at(p, k) = c * gpk - s * gqk;
          at(q, k) = s * gpk + c * gqk;
        }
        for (int k = 0; k < n; ++k) {
          const mpf_class gkp = at(k, p), gkq = at(k, q);
          at(k, p) = c * gkp - s * gkq;
          at(k, q) = s * gkp + c * gkq;
        }
      }
    }
  }
  mpf_class min_eig = at(0, 0);
  for (int i = 1; i < n; ++i)
    if (at(i, i) < min_eig) min_eig = at(i, i);
  return std::sqrt(mpf_class(min_eig).get_d());
}

} // namespace

// ---------------------------------------------------------------------------
// Geometry and domain types
// ---------------------------------------------------------------------------

TEST_CASE("default geometry uses r_i = (n - i)/n with exact endpoints") {
  const RadialGeometry geom(4);
  CHECK(geom.radius(0) == 1.0);
  CHECK(geom.radius(4) == 0.0);
  CHECK(geom.radius(2) == doctest::Approx(0.5));
  for (int i = 1; i <= 4; ++i) CHECK(geom.radius(i - 1) > geom.radius(i));
}

TEST_CASE("geometry and conductivity invariants are enforced") {
  CHECK_THROWS_AS(RadialGeometry(0), invalid_input_error);
  CHECK_THROWS_AS(RadialGeometry(std::vector<double>{1.0, 0.5, 0.1}), invalid_input_error);
  CHECK_THROWS_AS(RadialGeometry(std::vector<double>{1.0, 0.5, 0.5, 0.0}), invalid_input_error);
  CHECK_THROWS_AS(Conductivity(std::vector<double>{1.0, -2.0}), invalid_input_error);
  CHECK_THROWS_AS(Conductivity(std::vector<double>{}), invalid_input_error);
  const RadialGeometry geom(3);
  const Conductivity two(2, 1.0);
  CHECK_THROWS_AS(two.check_compatible(geom), invalid_input_error);
  CHECK_THROWS_AS(BoxPrior(1.5, 0.5), invalid_input_error);
  CHECK_THROWS_AS(BoxPrior(0.0, 1.0), invalid_input_error);
}

// ---------------------------------------------------------------------------
// RNG
// ---------------------------------------------------------------------------

TEST_CASE("derived streams are reproducible and independent") {
  CounterRng a = derive_rng(42, 7, "stream");
  CounterRng b = derive_rng(42, 7, "stream");
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());

  CounterRng c = derive_rng(42, 8, "stream");
  CounterRng d = derive_rng(42, 7, "other");
  CounterRng e = derive_rng(42, 7, "stream");
  CHECK(c.next_u64() != e.next_u64());
  CounterRng e2 = derive_rng(42, 7, "stream");
  CHECK(d.next_u64() != e2.next_u64());
}

TEST_CASE("a million derived stream keys have no birthday collision") {
  std::vector<std::uint64_t> keys;
  keys.reserve(1000000);
  for (std::uint64_t trial = 0; trial < 500000; ++trial) {
    keys.push_back(derive_seed(123, trial, "sigma"));
    keys.push_back(derive_seed(123, trial, "noise"));
  }
  std::sort(keys.begin(), keys.end());
  CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());
}

TEST_CASE("uniform draws live in the interval and gaussian moments look sane") {
  CounterRng rng(99);
  double sum = 0.0, sum2 = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const double u = rng.uniform(0.5, 1.5);
    CHECK(u >= 0.5);
    CHECK(u < 1.5);
    const double z = rng.gaussian();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / draws) < 0.05);
  CHECK(std::abs(sum2 / draws - 1.0) < 0.05);
}

// ---------------------------------------------------------------------------
// IO
// ---------------------------------------------------------------------------

TEST_CASE("format_double round-trips exactly") {
  CounterRng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.next_double() - 0.5) * std::pow(10.0, rng.uniform(-300, 300));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("conductivity and measurements serialize as JSON arrays") {
  const Conductivity sigma(std::vector<double>{0.5, 1.25});
  CHECK(to_json(sigma) == "[0.5,1.25]");
  const Conductivity back = conductivity_from_json(to_json(sigma));
  CHECK(back.values() == sigma.values());
  CHECK_THROWS_AS(conductivity_from_json("{\"a\":1}"), invalid_input_error);
  CHECK_THROWS_AS(measurement_from_json("[1,\"x\"]"), invalid_input_error);
}

TEST_CASE("csv tables carry a header and reject ragged rows") {
  CsvTable t({"a", "b"});
  t.add_row(std::vector<double>{1.0, 2.5});
  CHECK(t.content() == "a,b\n1,2.5\n");
  CHECK_THROWS_AS(t.add_row(std::vector<double>{1.0}), invalid_input_error);
}

// ---------------------------------------------------------------------------
// Dual numbers
// ---------------------------------------------------------------------------

TEST_CASE("dual arithmetic matches exact polynomial derivatives") {
  // p(x) = (x^2 + 3x) / (x - 2) at x = 5: p = 40/3, p' via quotient rule.
  const Dual x(5.0, 1.0);
  const Dual p = (x * x + Dual(3.0) * x) / (x - Dual(2.0));
  CHECK(p.v == doctest::Approx(40.0 / 3.0).epsilon(1e-15));
  // p'(x) = [(2x+3)(x-2) - (x^2+3x)] / (x-2)^2 = (13*3 - 40)/9
  CHECK(p.d == doctest::Approx((13.0 * 3.0 - 40.0) / 9.0).epsilon(1e-15));
}

TEST_CASE("dual2 mixed second derivatives are exact on rational functions") {
  // f(u, v) = u^2 v + u / v; d2f/dudv = 2u - 1/v^2.
  const double u0 = 1.7, v0 = 0.8;
  std::vector<Dual2> x = {Dual2(u0, 1.0, 0.0, 0.0), Dual2(v0, 0.0, 1.0, 0.0)};
  const Dual2 f = x[0] * x[0] * x[1] + x[0] / x[1];
  CHECK(f.v == doctest::Approx(u0 * u0 * v0 + u0 / v0).epsilon(1e-15));
  CHECK(f.da == doctest::Approx(2 * u0 * v0 + 1.0 / v0).epsilon(1e-15));
  CHECK(f.db == doctest::Approx(u0 * u0 - u0 / (v0 * v0)).epsilon(1e-15));
  CHECK(f.dab == doctest::Approx(2 * u0 - 1.0 / (v0 * v0)).epsilon(1e-14));
}

TEST_CASE("dual2 log/exp/sqrt second derivatives") {
  std::vector<Dual2> x = {Dual2(1.3, 1.0, 1.0, 0.0)};
  const Dual2 l = log(x[0]);
  CHECK(l.dab == doctest::Approx(-1.0 / (1.3 * 1.3)).epsilon(1e-14));
  const Dual2 e = exp(x[0]);
  CHECK(e.dab == doctest::Approx(std::exp(1.3)).epsilon(1e-14));
  const Dual2 s = sqrt(x[0]);
  CHECK(s.dab == doctest::Approx(-0.25 * std::pow(1.3, -1.5)).epsilon(1e-14));
}

// ---------------------------------------------------------------------------
// Dense linear algebra
// ---------------------------------------------------------------------------

TEST_CASE("lu_det on the named examples") {
  CHECK(lu_det(DenseMatrix::identity(5)) == doctest::Approx(1.0));
  const DenseMatrix j2(2, 2, {-0.75, -0.25, -15.0 / 32.0, -1.0 / 32.0});
  CHECK(lu_det(j2) == doctest::Approx(-3.0 / 32.0).epsilon(1e-14));
}

TEST_CASE("lu_det matches cofactor expansion for n <= 4") {
  CounterRng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 4);
    DenseMatrix a(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) a(r, c) = rng.uniform(-1.0, 1.0);
    CHECK(close_rel(lu_det(a), cofactor_det(a), 1e-12));
  }
}

TEST_CASE("lu_solve basics and the SPD cross-check") {
  const std::vector<double> b = {1.0, -2.0, 3.0};
  CHECK(lu_solve(DenseMatrix::identity(3), b) == b);

  DenseMatrix d(3, 3);
  for (int i = 0; i < 3; ++i) d(i, i) = 2.0;
  const std::vector<double> x = lu_solve(d, b);
  for (int i = 0; i < 3; ++i) CHECK(x[static_cast<std::size_t>(i)] == doctest::Approx(b[static_cast<std::size_t>(i)] / 2.0));

  CounterRng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 5);
    DenseMatrix m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
    // SPD via A = M^T M + I.
    DenseMatrix spd = m.transposed().multiply(m);
    for (int i = 0; i < n; ++i) spd(i, i) += 1.0;
    std::vector<double> rhs(static_cast<std::size_t>(n));
    for (double& v : rhs) v = rng.uniform(-2.0, 2.0);
    const std::vector<double> lu_x = lu_solve(spd, rhs);
    const auto lower = cholesky(spd);
    REQUIRE(lower.has_value());
    const std::vector<double> chol_x = cholesky_solve(*lower, rhs);
    for (int i = 0; i < n; ++i)
      CHECK(close_rel(lu_x[static_cast<std::size_t>(i)], chol_x[static_cast<std::size_t>(i)], 1e-10));
  }

  DenseMatrix singular(2, 2, {1.0, 2.0, 2.0, 4.0});
  CHECK_THROWS_AS(lu_solve(singular, std::vector<double>{1.0, 1.0}), numerical_error);
}

TEST_CASE("jacobi_svd on the named examples") {
  DenseMatrix diag(2, 2);
  diag(0, 0) = 3.0;
  diag(1, 1) = 1.0;
  const std::vector<double> sv = jacobi_svd(diag);
  CHECK(sv[0] == doctest::Approx(3.0));
  CHECK(sv[1] == doctest::Approx(1.0));

  const DenseMatrix j2(2, 2, {-0.75, -0.25, -15.0 / 32.0, -1.0 / 32.0});
  const std::vector<double> sv2 = jacobi_svd(j2);
  CHECK(sv2[0] * sv2[1] == doctest::Approx(3.0 / 32.0).epsilon(1e-12));
}

TEST_CASE("jacobi_svd matches the high-precision normal-equations oracle") {
  CounterRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 3 + static_cast<int>(rng.next_u64() % 3);
    const int cols = 2 + static_cast<int>(rng.next_u64() % 2);
    DenseMatrix a(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) a(r, c) = rng.uniform(-1.0, 1.0);
    const double min_sv = jacobi_svd(a).back();
    CHECK(close_rel(min_sv, svd_min_oracle(a), 1e-9));
  }
}

TEST_CASE("one-sided Jacobi resolves tiny harmonic singular values to 10 digits") {
  for (int n = 2; n <= 6; ++n) {
    const RadialGeometry geom(n);
    const Conductivity ones(n, 1.0);
    const DenseMatrix jac = analytic_jacobian(geom, ones, n);
    const double mine = jacobi_svd(jac).back();
    const double oracle = svd_min_oracle(jac);
    CHECK(close_rel(mine, oracle, 1e-10));
  }
}

TEST_CASE("determinant equals the signed product of singular values") {
  CounterRng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 7);
    DenseMatrix a(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) a(r, c) = rng.uniform(-1.0, 1.0);
    const std::vector<double> sv = jacobi_svd(a);
    double prod = 1.0;
    for (double s : sv) prod *= s;
    CHECK(close_rel(std::abs(lu_det(a)), prod, 1e-8));
  }
}

TEST_CASE("cholesky factor examples and the not-SPD flag") {
  CHECK(cholesky(DenseMatrix::identity(4)).has_value());

  const DenseMatrix a(2, 2, {4.0, 2.0, 2.0, 2.0});
  const auto l = cholesky(a);
  REQUIRE(l.has_value());
  CHECK((*l)(0, 0) == doctest::Approx(2.0));
  CHECK((*l)(1, 0) == doctest::Approx(1.0));
  CHECK((*l)(1, 1) == doctest::Approx(1.0));
  CHECK((*l)(0, 1) == 0.0);

  DenseMatrix hilbert(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) hilbert(r, c) = 1.0 / (r + c + 1);
  CHECK(cholesky(hilbert).has_value());

  const DenseMatrix indefinite(2, 2, {1.0, 3.0, 3.0, 1.0});
  CHECK_FALSE(cholesky(indefinite).has_value());
}

// ---------------------------------------------------------------------------
// Forward map
// ---------------------------------------------------------------------------

TEST_CASE("constant conductivity has zero transfer coefficients") {
  for (double s : {0.5, 1.0, 2.5}) {
    const RadialGeometry geom(4);
    const TransferCoefficients tc = transfer_coefficients(geom, Conductivity(4, s), 6);
    for (double rho : tc.rho) CHECK(rho == 0.0);
    for (double c : tc.c.data()) CHECK(c == 0.0);
  }
}

TEST_CASE("one hand-checked recurrence step: n = 2, sigma = (1,3), j = 1") {
  const RadialGeometry geom(2);
  const Conductivity sigma(std::vector<double>{1.0, 3.0});
  const TransferCoefficients tc = transfer_coefficients(geom, sigma, 1);
  CHECK(tc.rho[0] == doctest::Approx(-0.5));
  CHECK(tc.c(0, 0) == doctest::Approx(-0.125));
  const MeasurementVector y = forward_map(geom, sigma, 1);
  CHECK(y[0] == doctest::Approx(7.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("transfer coefficients match the linear-system oracle through beta/alpha") {
  CounterRng rng(17);
  const RadialGeometry geom(3);
  for (int trial = 0; trial < 25; ++trial) {
    const Conductivity sigma(random_sigma(rng, 3));
    const TransferCoefficients tc = transfer_coefficients(geom, sigma, 5);
    const PotentialCoefficients oracle = solve_potential_system(geom, sigma, 5);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 5; ++j) {
        const double ratio = oracle.beta(i, j) / oracle.alpha(i, j);
        CHECK(std::abs(tc.c(i, j) - ratio) <= 1e-12);
      }
  }
}

TEST_CASE("forward map closed form at constant conductivity") {
  for (int n : {1, 3, 8}) {
    const RadialGeometry geom(n);
    const MeasurementVector y = forward_map(geom, Conductivity(n, 1.0), 4);
    for (int j = 1; j <= 4; ++j)
      CHECK(close_rel(y[j - 1], 1.0 / j, 1e-15));
    const MeasurementVector ys = forward_map(geom, Conductivity(n, 2.0), 4);
    for (int j = 1; j <= 4; ++j)
      CHECK(close_rel(ys[j - 1], 1.0 / (2.0 * j), 1e-15));
  }
}

TEST_CASE("positivity and cap validation") {
  const RadialGeometry geom(2);
  const Conductivity sigma(2, 1.0);
  CHECK_THROWS_AS(forward_map(geom, sigma, 0), invalid_input_error);
  CHECK_THROWS_AS(forward_map(geom, sigma, 65), invalid_input_error);
  CHECK_NOTHROW(forward_map(geom, sigma, 65, 128));
  CHECK_THROWS_AS(forward_map(geom, Conductivity(3, 1.0), 2), invalid_input_error);
}

TEST_CASE("potential system oracle: harmonic case and flux normalization") {
  const RadialGeometry geom(3);
  const PotentialCoefficients p = solve_potential_system(geom, Conductivity(3, 1.0), 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 1; j <= 4; ++j) {
      CHECK(close_rel(p.alpha(i, j - 1), 1.0 / j, 1e-13));
      CHECK(std::abs(p.beta(i, j - 1)) <= 1e-14);
    }

  const RadialGeometry geom2(2);
  const Conductivity sigma(std::vector<double>{1.0, 3.0});
  const PotentialCoefficients q = solve_potential_system(geom2, sigma, 1);
  CHECK(q.alpha(0, 0) - q.beta(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("recurrence lambda equals linear-system alpha_1 + beta_1") {
  CounterRng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 6);
    const RadialGeometry geom(n);
    const Conductivity sigma(random_sigma(rng, n));
    const int m = 6;
    const MeasurementVector y = forward_map(geom, sigma, m);
    const PotentialCoefficients p = solve_potential_system(geom, sigma, m);
    for (int j = 0; j < m; ++j)
      CHECK(close_rel(y[j], p.alpha(0, j) + p.beta(0, j), 1e-12));
  }
}

TEST_CASE("fast potential coefficients agree with the oracle") {
  CounterRng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 4);
    const RadialGeometry geom(n);
    const Conductivity sigma(random_sigma(rng, n));
    const PotentialCoefficients fast = potential_coefficients(geom, sigma, 5);
    const PotentialCoefficients slow = solve_potential_system(geom, sigma, 5);
    CHECK(matrix_rel_error(fast.alpha, slow.alpha) <= 1e-11);
    CHECK(matrix_rel_error(fast.beta, slow.beta) <= 1e-11);
  }
}

TEST_CASE("analytic jacobian: harmonic closed form, named 2x2 value") {
  const RadialGeometry geom(2);
  const DenseMatrix jac = analytic_jacobian(geom, Conductivity(2, 1.0), 2);
  CHECK(jac(0, 0) == doctest::Approx(-0.75).epsilon(1e-14));
  CHECK(jac(0, 1) == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(jac(1, 0) == doctest::Approx(-15.0 / 32.0).epsilon(1e-14));
  CHECK(jac(1, 1) == doctest::Approx(-1.0 / 32.0).epsilon(1e-14));
  CHECK(lu_det(jac) == doctest::Approx(-3.0 / 32.0).epsilon(1e-13));

  for (int n : {1, 3, 5}) {
    const RadialGeometry g(n);
    const DenseMatrix a = analytic_jacobian(g, Conductivity(n, 1.0), n + 2);
    for (int j = 1; j <= n + 2; ++j)
      for (int i = 1; i <= n; ++i)
        CHECK(close_rel(a(j - 1, i - 1),
                        -(std::pow(g.radius(i - 1), 2 * j) - std::pow(g.radius(i), 2 * j)) / j,
                        1e-13));
  }
}

TEST_CASE("all jacobian entries are strictly negative at random conductivities") {
  CounterRng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 8);
    const RadialGeometry geom(n);
    const DenseMatrix jac = analytic_jacobian(geom, Conductivity(random_sigma(rng, n)), n);
    for (double v : jac.data()) CHECK(v < 0.0);
  }
}

// ---------------------------------------------------------------------------
// Autodiff drivers
// ---------------------------------------------------------------------------

TEST_CASE("jacobian of the identity map is the identity matrix") {
  auto identity = [](std::span<const Dual> x) {
    return std::vector<Dual>(x.begin(), x.end());
  };
  const std::vector<double> at = {1.0, 2.0, 3.0};
  const DenseMatrix jac = jacobian(identity, at);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(jac(r, c) == (r == c ? 1.0 : 0.0));
}

TEST_CASE("AD jacobian of the forward map matches the harmonic closed form") {
  const RadialGeometry geom(2);
  auto fwd = [&](std::span<const Dual> x) {
    return detail::forward_kernel<Dual>(geom, x, 2);
  };
  const std::vector<double> at = {1.0, 1.0};
  const DenseMatrix jac = jacobian(fwd, at);
  CHECK(jac(0, 0) == doctest::Approx(-0.75).epsilon(1e-13));
  CHECK(jac(0, 1) == doctest::Approx(-0.25).epsilon(1e-13));
  CHECK(jac(1, 0) == doctest::Approx(-15.0 / 32.0).epsilon(1e-13));
  CHECK(jac(1, 1) == doctest::Approx(-1.0 / 32.0).epsilon(1e-13));
}

TEST_CASE("analytic vs AD vs central differences on random conductivities") {
  CounterRng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 3);
    const int m = n + 1;
    const RadialGeometry geom(n);
    const std::vector<double> at = random_sigma(rng, n);

    const DenseMatrix analytic = analytic_jacobian(geom, Conductivity(at), m);
    auto fwd_dual = [&](std::span<const Dual> x) {
      return detail::forward_kernel<Dual>(geom, x, m);
    };
    const DenseMatrix ad = jacobian(fwd_dual, at);
    auto fwd_plain = [&](std::span<const double> x) {
      return detail::forward_kernel<double>(geom, x, m);
    };
    const DenseMatrix fd = finite_difference_jacobian(fwd_plain, at, 1e-6);

    CHECK(matrix_rel_error(analytic, ad) <= 1e-11);
    CHECK(matrix_rel_error(analytic, fd) <= 1e-6);
  }
}

TEST_CASE("hessian closed form for n = 1 and Gauss-Newton exactness at truth") {
  // lambda_1(sigma) = 1/sigma, second derivative 2/sigma^3.
  const RadialGeometry geom(1);
  for (double s : {0.7, 1.0, 1.4}) {
    auto f = [&](std::span<const Dual2> x) {
      return detail::forward_kernel<Dual2>(geom, x, 1)[0];
    };
    const std::vector<double> at = {s};
    const DenseMatrix h = hessian(f, at);
    CHECK(h(0, 0) == doctest::Approx(2.0 / (s * s * s)).epsilon(1e-13));
  }

  const int n = 3, m = 4;
  const RadialGeometry g3(3);
  CounterRng rng(47);
  const std::vector<double> truth = random_sigma(rng, n);
  const MeasurementVector y = forward_map(g3, Conductivity(truth), m);
  auto objective = [&](std::span<const Dual2> x) {
    const std::vector<Dual2> lam = detail::forward_kernel<Dual2>(g3, x, m);
    Dual2 acc(0.0);
    for (int j = 0; j < m; ++j) {
      const Dual2 r = lam[static_cast<std::size_t>(j)] - Dual2(y[j]);
      acc += r * r;
    }
    return Dual2(0.5) * acc;
  };
  const DenseMatrix h = hessian(objective, truth);
  const DenseMatrix jac = analytic_jacobian(g3, Conductivity(truth), m);
  const DenseMatrix gauss_newton = jac.transposed().multiply(jac);
  CHECK(matrix_rel_error(h, gauss_newton) <= 1e-11);
}

TEST_CASE("swapped-seed mixed derivatives agree to 1e-13") {
  const RadialGeometry geom(3);
  CounterRng rng(53);
  const std::vector<double> at = random_sigma(rng, 3);
  for (int p = 0; p < 3; ++p) {
    for (int q = 0; q < 3; ++q) {
      auto eval = [&](int a, int b) {
        std::vector<Dual2> x(at.begin(), at.end());
        x[static_cast<std::size_t>(a)].da = 1.0;
        x[static_cast<std::size_t>(b)].db = 1.0;
        return detail::forward_kernel<Dual2>(geom, std::span<const Dual2>(x), 3)[2].dab;
      };
      CHECK(std::abs(eval(p, q) - eval(q, p)) <= 1e-13);
    }
  }
}

TEST_CASE("hessians of lambda_j are positive semidefinite (convexity)") {
  CounterRng rng(59);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 4);
    const RadialGeometry geom(n);
    const Conductivity sigma(random_sigma(rng, n));
    const std::vector<DenseMatrix> hs = forward_map_hessians(geom, sigma, n);
    for (const DenseMatrix& h : hs) {
      DenseMatrix shifted = h;
      for (int i = 0; i < n; ++i) shifted(i, i) += 1e-10;
      CHECK(cholesky(shifted).has_value());
    }
  }
}

TEST_CASE("central differences converge at second order") {
  const RadialGeometry geom(3);
  const std::vector<double> at = {0.8, 1.1, 1.3};
  const DenseMatrix exact = analytic_jacobian(geom, Conductivity(at), 3);
  auto fwd = [&](std::span<const double> x) {
    return detail::forward_kernel<double>(geom, x, 3);
  };
  const double e1 = matrix_rel_error(exact, finite_difference_jacobian(fwd, at, 2e-3));
  const double e2 = matrix_rel_error(exact, finite_difference_jacobian(fwd, at, 1e-3));
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));

  auto linear = [](std::span<const double> x) {
    return std::vector<double>{2.0 * x[0] - x[1], x[0] + 3.0 * x[1]};
  };
  const std::vector<double> p = {1.0, 2.0};
  const DenseMatrix lj = finite_difference_jacobian(linear, p, 1e-4);
  CHECK(lj(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(lj(1, 1) == doctest::Approx(3.0).epsilon(1e-9));
}
