#include "calderon/rng.hpp"

#include <cmath>
#include <numbers>

namespace calderon {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

} // namespace

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double CounterRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

double CounterRng::gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  // u1 in (0,1] so the log is finite.
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_gaussian_ = r * std::sin(theta);
  has_cached_gaussian_ = true;
  return r * std::cos(theta);
}

double CounterRng::gaussian(double mean, double stddev) {
  return mean + stddev * gaussian();
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial_index,
                          std::string_view stream) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ (trial_index + kGamma));
  h = mix64(h ^ fnv1a(stream));
  return h;
}

CounterRng derive_rng(std::uint64_t master, std::uint64_t trial_index,
                      std::string_view stream) {
  return CounterRng(derive_seed(master, trial_index, stream));
}

} // namespace calderon
