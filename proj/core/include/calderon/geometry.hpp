#pragma once

#include <span>
#include <vector>

#include "calderon/errors.hpp"

namespace calderon {

/// Largest cosine-mode index accepted by default. Powers r_i^{2j} underflow
/// for very large j; callers that know their radii can raise the cap.
inline constexpr int kDefaultMaxHarmonic = 64;

/// Concentric-annuli partition of the unit disk: radii r_0 = 1 > r_1 > ... >
/// r_n = 0. Annulus i (1-based) is the ring r_i < r < r_{i-1}.
class RadialGeometry {
public:
  /// Equispaced partition r_i = (n - i) / n.
  explicit RadialGeometry(int n);

  /// Arbitrary strictly decreasing radii; requires r.front() == 1 and
  /// r.back() == 0 exactly.
  explicit RadialGeometry(std::vector<double> radii);

  int annulus_count() const { return n_; }
  const std::vector<double>& radii() const { return radii_; }
  double radius(int i) const { return radii_[static_cast<std::size_t>(i)]; }

private:
  int n_;
  std::vector<double> radii_;
};

/// Piecewise constant conductivity: one strictly positive value per annulus,
/// ordered from the boundary annulus inward.
class Conductivity {
public:
  explicit Conductivity(std::vector<double> sigma);
  Conductivity(int n, double fill);

  int size() const { return static_cast<int>(sigma_.size()); }
  const std::vector<double>& values() const { return sigma_; }
  double operator[](int i) const { return sigma_[static_cast<std::size_t>(i)]; }
  std::span<const double> span() const { return sigma_; }

  /// Throws invalid_input_error unless size() == geom.annulus_count().
  void check_compatible(const RadialGeometry& geom) const;

private:
  std::vector<double> sigma_;
};

/// Diagonal Neumann-to-Dirichlet values (lambda_j)_{j=1..m}. Noiseless data
/// is strictly positive; noisy data may not be, so only sizes are enforced.
class MeasurementVector {
public:
  MeasurementVector() = default;
  explicit MeasurementVector(std::vector<double> values);

  int size() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& values() const { return values_; }
  double operator[](int j) const { return values_[static_cast<std::size_t>(j)]; }
  std::span<const double> span() const { return values_; }

private:
  std::vector<double> values_;
};

/// A priori conductivity bounds 0 < a < b with the unknown in [a, b]^n.
struct BoxPrior {
  double a = 0.0;
  double b = 0.0;

  BoxPrior() = default;
  BoxPrior(double lo, double hi);

  double width() const { return b - a; }
  double center() const { return 0.5 * (a + b); }
};

} // namespace calderon
