#include "calderon/geometry.hpp"

#include <cmath>
#include <string>

namespace calderon {

RadialGeometry::RadialGeometry(int n) : n_(n) {
  if (n < 1) throw invalid_input_error("annulus count must be >= 1");
  radii_.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i)
    radii_[static_cast<std::size_t>(i)] = static_cast<double>(n - i) / n;
  radii_.front() = 1.0;
  radii_.back() = 0.0;
}

RadialGeometry::RadialGeometry(std::vector<double> radii)
    : n_(static_cast<int>(radii.size()) - 1), radii_(std::move(radii)) {
  if (radii_.size() < 2) throw invalid_input_error("need at least two radii");
  if (radii_.front() != 1.0 || radii_.back() != 0.0)
    throw invalid_input_error("radii must satisfy r_0 = 1 and r_n = 0 exactly");
  for (std::size_t i = 1; i < radii_.size(); ++i) {
    if (!(radii_[i - 1] > radii_[i]))
      throw invalid_input_error("radii must be strictly decreasing");
  }
}

Conductivity::Conductivity(std::vector<double> sigma) : sigma_(std::move(sigma)) {
  if (sigma_.empty()) throw invalid_input_error("conductivity must be non-empty");
  for (double s : sigma_) {
    if (!(s > 0.0) || !std::isfinite(s))
      throw invalid_input_error("conductivity entries must be finite and > 0");
  }
}

Conductivity::Conductivity(int n, double fill)
    : Conductivity(std::vector<double>(static_cast<std::size_t>(n), fill)) {}

void Conductivity::check_compatible(const RadialGeometry& geom) const {
  if (size() != geom.annulus_count())
    throw invalid_input_error("conductivity has " + std::to_string(size()) +
                              " entries for a geometry with " +
                              std::to_string(geom.annulus_count()) + " annuli");
}

MeasurementVector::MeasurementVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw invalid_input_error("measurement vector must be non-empty");
}

BoxPrior::BoxPrior(double lo, double hi) : a(lo), b(hi) {
  if (!(a > 0.0) || !(a < b))
    throw invalid_input_error("box prior requires 0 < a < b");
}

} // namespace calderon
