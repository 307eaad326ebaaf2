#include <doctest.h>

#include <cmath>

#include "calderon/autodiff.hpp"
#include "calderon/forward.hpp"
#include "calderon/landscape.hpp"
#include "calderon/rng.hpp"

using namespace calderon;

namespace {

std::vector<double> random_sigma(CounterRng& rng, int n, double lo = 0.5,
                                 double hi = 1.5) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (double& v : s) v = rng.uniform(lo, hi);
  return s;
}

bool same_order(double value, double order, double factor = 100.0) {
  return value >= order / factor && value <= order * factor;
}

} // namespace

TEST_CASE("grid coordinates hit the box endpoints exactly") {
  const GridSpec grid(5, BoxPrior(0.5, 1.5));
  CHECK(grid.coordinate(0) == 0.5);
  CHECK(grid.coordinate(4) == 1.5);
  CHECK(grid.coordinate(2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(GridSpec(1, BoxPrior(0.5, 1.5)), invalid_input_error);
}

TEST_CASE("least squares objective vanishes with zero gradient at the truth") {
  const RadialGeometry geom(3);
  CounterRng rng(3);
  const Conductivity truth(random_sigma(rng, 3));
  const MeasurementVector y = forward_map(geom, truth, 5);
  CHECK(least_squares_objective(geom, truth, y) == 0.0);
  for (double g : least_squares_gradient(geom, truth, y)) CHECK(std::abs(g) <= 1e-16);
}

TEST_CASE("n = 1 objective matches the scalar closed form") {
  const RadialGeometry geom(1);
  const double truth = 1.2;
  const int m = 4;
  const MeasurementVector y = forward_map(geom, Conductivity(1, truth), m);
  for (double s : {0.6, 0.9, 1.7}) {
    double expect = 0.0;
    for (int j = 1; j <= m; ++j) {
      const double r = 1.0 / (j * s) - 1.0 / (j * truth);
      expect += 0.5 * r * r;
    }
    CHECK(least_squares_objective(geom, Conductivity(1, s), y) ==
          doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("objective gradient agrees with central differences") {
  const RadialGeometry geom(3);
  CounterRng rng(7);
  const Conductivity truth(random_sigma(rng, 3));
  const MeasurementVector y = forward_map(geom, truth, 5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> at = random_sigma(rng, 3);
    const std::vector<double> grad = least_squares_gradient(geom, Conductivity(at), y);
    auto f = [&](std::span<const double> x) {
      return std::vector<double>{least_squares_objective(
          geom, Conductivity(std::vector<double>(x.begin(), x.end())), y)};
    };
    const DenseMatrix fd = finite_difference_jacobian(f, at, 1e-6);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(grad[static_cast<std::size_t>(i)] - fd(0, i)) <=
            1e-6 * std::max(1.0, std::abs(grad[static_cast<std::size_t>(i)])));
  }
}

TEST_CASE("harmonic jacobian examples") {
  const RadialGeometry geom(2);
  const DenseMatrix j = harmonic_jacobian(geom, 2);
  CHECK(j(0, 0) == doctest::Approx(-0.75));
  CHECK(j(0, 1) == doctest::Approx(-0.25));
  CHECK(j(1, 0) == doctest::Approx(-15.0 / 32.0));
  CHECK(j(1, 1) == doctest::Approx(-1.0 / 32.0));

  const RadialGeometry g1(1);
  const DenseMatrix j1 = harmonic_jacobian(g1, 3);
  for (int jm = 1; jm <= 3; ++jm)
    CHECK(j1(jm - 1, 0) == doctest::Approx(-1.0 / jm));

  // Matches the AD jacobian at sigma = 1 to 1e-13.
  for (int n : {3, 5}) {
    const RadialGeometry g(n);
    const DenseMatrix closed = harmonic_jacobian(g, n);
    auto fwd = [&](std::span<const Dual> x) {
      return detail::forward_kernel<Dual>(g, x, n);
    };
    const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
    const DenseMatrix ad = jacobian(fwd, ones);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        CHECK(std::abs(closed(r, c) - ad(r, c)) <= 1e-13);
  }
}

TEST_CASE("vandermonde sign check holds for n = 1..8") {
  for (int n = 1; n <= 8; ++n) CHECK(vandermonde_sign_check(RadialGeometry(n)));
}

TEST_CASE("ratio h: harmonic values 3 and 15, closed form vs jacobian, monotone in j") {
  const RadialGeometry geom(2);
  const Conductivity ones(2, 1.0);
  const RatioH h1 = ratio_h(geom, ones, 1);
  CHECK(h1.from_jacobian == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(h1.closed_form == doctest::Approx(3.0).epsilon(1e-13));
  const RatioH h2 = ratio_h(geom, ones, 2);
  CHECK(h2.from_jacobian == doctest::Approx(15.0).epsilon(1e-13));
  CHECK(h2.closed_form == doctest::Approx(15.0).epsilon(1e-13));

  CounterRng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const Conductivity sigma(random_sigma(rng, 2));
    double prev = -1e300;
    for (int j = 1; j <= 7; ++j) {
      const RatioH h = ratio_h(geom, sigma, j);
      CHECK(std::abs(h.from_jacobian - h.closed_form) <=
            1e-11 * std::abs(h.closed_form));
      CHECK(h.closed_form > prev);
      prev = h.closed_form;
    }
  }
  CHECK_THROWS_AS(ratio_h(RadialGeometry(3), Conductivity(3, 1.0), 1),
                  invalid_input_error);
}

TEST_CASE("alternating signs: n = 2 pins the indexing, larger n stay alternating") {
  const RadialGeometry geom(2);
  CounterRng rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    const AlternatingSigns alt =
        alternating_sign_check(geom, Conductivity(random_sigma(rng, 2)));
    REQUIRE(alt.g_prime.size() == 1);
    CHECK(alt.g_prime[0] < 0.0);  // annulus 2 moves down as sigma_1 moves up
    CHECK(alt.signs[0] == -1);
    CHECK(alt.alternating);
  }
  for (int n : {3, 4, 5}) {
    const RadialGeometry g(n);
    for (int trial = 0; trial < 60; ++trial) {
      const AlternatingSigns alt =
          alternating_sign_check(g, Conductivity(random_sigma(rng, n)));
      CHECK(alt.alternating);
    }
  }

  const AlternatingSigns ones =
      alternating_sign_check(RadialGeometry(3), Conductivity(3, 1.0));
  CHECK(ones.alternating);
}

TEST_CASE("determinant scan at n = 2 reproduces the table column") {
  const RadialGeometry geom(2);
  const GridSpec grid(5, BoxPrior(0.5, 1.5));
  std::vector<ScanRow> rows;
  const ScanReport report = scan_determinant_signs(geom, grid, 2, 2, &rows);

  CHECK(report.sign_violations == 0);
  CHECK(report.points_scanned == 25);
  CHECK(rows.size() == 25);
  CHECK(same_order(report.min_signed_det_full, 1e-2));
  CHECK(same_order(report.min_sigma_min_full, 1e-2));
  CHECK(same_order(report.min_signed_det_sub, 1e-1));
  // Argmin of the signed full determinant at b * 1.
  CHECK(report.argmin_det_full == std::vector<double>{1.5, 1.5});

  // Signed value at sigma = 1 is +3/32.
  bool found = false;
  for (const ScanRow& row : rows) {
    if (row.sigma == std::vector<double>{1.0, 1.0}) {
      found = true;
      CHECK(row.det_full == doctest::Approx(3.0 / 32.0).epsilon(1e-12));
    }
  }
  CHECK(found);

  CHECK_THROWS_AS(scan_determinant_signs(geom, grid, 3, 1), invalid_input_error);
}

TEST_CASE("determinant scan at n = 3 stays clean and ordered") {
  const ScanReport report =
      scan_determinant_signs(RadialGeometry(3), GridSpec(5, BoxPrior(0.5, 1.5)), 3, 2);
  CHECK(report.sign_violations == 0);
  CHECK(same_order(report.min_signed_det_full, 1e-4));
  CHECK(same_order(report.min_signed_det_sub, 1e-2));
  CHECK(same_order(report.min_signed_det_mk, 1e-3));
  CHECK(same_order(report.min_sigma_min_full, 1e-3));
  CHECK(same_order(report.min_sigma_min_sub, 1e-2));
  CHECK(report.argmin_det_full == std::vector<double>{1.5, 1.5, 1.5});
}

TEST_CASE("1-d landscape: global minimum, curvature sign change, single critical point") {
  const RadialGeometry geom(1);
  const Conductivity truth(1, 1.0);
  const auto samples = trace_1d_landscape(geom, truth, 1, 0.5, 3.0, 501);
  REQUIRE(samples.size() == 501);

  double min_f = 1e300;
  double min_at = 0.0;
  for (const auto& s : samples) {
    CHECK(s.f >= 0.0);
    if (s.f < min_f) {
      min_f = s.f;
      min_at = s.sigma;
    }
  }
  CHECK(std::abs(min_at - 1.0) <= 0.01);

  // f'' changes sign (non-convexity); for m = 1 the change point is at
  // sigma = 1.5 * truth.
  bool has_pos = false, has_neg = false;
  for (const auto& s : samples) {
    if (s.f2 > 0.0) has_pos = true;
    if (s.f2 < 0.0) has_neg = true;
    if (s.sigma < 1.45) CHECK(s.f2 > 0.0);
    if (s.sigma > 1.55) CHECK(s.f2 < 0.0);
  }
  CHECK(has_pos);
  CHECK(has_neg);

  // Exactly one sign change of f' along the grid.
  int changes = 0;
  for (std::size_t i = 2; i < samples.size(); ++i) {
    const double d_prev = samples[i - 1].f - samples[i - 2].f;
    const double d_cur = samples[i].f - samples[i - 1].f;
    if ((d_prev < 0.0 && d_cur > 0.0) || (d_prev > 0.0 && d_cur < 0.0)) ++changes;
  }
  CHECK(changes == 1);
}

TEST_CASE("implicit curves pass through the truth with strictly monotone h") {
  const RadialGeometry geom(2);
  const Conductivity truth(2, 1.0);
  const auto curve = trace_implicit_curves(geom, truth, 0.8, 1.3, 200);

  bool found = false;
  for (const auto& s : curve) {
    if (s.sigma1 == 1.0) {
      found = true;
      CHECK(s.g == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(found);

  // lambda_1 is constant along the trace.
  const MeasurementVector y = forward_map(geom, truth, 2);
  for (const auto& s : curve) {
    const MeasurementVector lam =
        forward_map(geom, Conductivity(std::vector<double>{s.sigma1, s.g}), 2);
    CHECK(std::abs(lam[0] - y[0]) <= 1e-11 * std::abs(y[0]));
  }

  // h strictly monotone; its slope matches -det/d2lambda_1, which is negative.
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].h < curve[i - 1].h);
  for (std::size_t i = 1; i + 1 < curve.size(); i += 37) {
    const Conductivity at(std::vector<double>{curve[i].sigma1, curve[i].g});
    const DenseMatrix jac = analytic_jacobian(geom, at, 2);
    const double det = jac(0, 0) * jac(1, 1) - jac(0, 1) * jac(1, 0);
    const double identity = -det / jac(0, 1);
    const double slope = (curve[i + 1].h - curve[i - 1].h) /
                         (curve[i + 1].sigma1 - curve[i - 1].sigma1);
    CHECK(identity < 0.0);
    CHECK(slope / identity == doctest::Approx(1.0).epsilon(1e-2));
  }
}

TEST_CASE("critical point scan: named example and random instances") {
  const RadialGeometry geom(2);
  const GridSpec grid(200, BoxPrior(0.5, 1.5));
  const auto named = grid_critical_point_scan(
      geom, Conductivity(std::vector<double>{0.8, 1.2}), grid, 2);
  REQUIRE(named.cells.size() == 1);
  CHECK(named.cluster_count == 1);
  CHECK(named.cells[0].contains(0.8, 1.2));

  CounterRng rng(101);
  for (int trial = 0; trial < 8; ++trial) {
    const std::vector<double> truth = random_sigma(rng, 2, 0.55, 1.45);
    const auto scan = grid_critical_point_scan(geom, Conductivity(truth), grid, 2);
    REQUIRE(scan.cells.size() == 1);
    CHECK(scan.cells[0].contains(truth[0], truth[1]));
  }
}
