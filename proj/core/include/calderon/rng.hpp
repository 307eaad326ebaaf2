#pragma once

#include <cstdint>
#include <string_view>

namespace calderon {

/// Counter-based random stream: draw i of a stream with key k is a fixed
/// 64-bit mix of k + i*gamma (SplitMix64). No hidden jump state, so streams
/// derived for (trial, stream-label) pairs are independent of evaluation
/// order and of how work is split across threads.
class CounterRng {
public:
  CounterRng() = default;
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double next_double();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (second deviate cached).
  double gaussian();
  double gaussian(double mean, double stddev);

private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool has_cached_gaussian_ = false;
  double cached_gaussian_ = 0.0;
};

/// Derives the stream key for (master seed, trial index, stream label).
/// Distinct inputs give independent streams; identical inputs reproduce the
/// same stream bit-for-bit.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial_index,
                          std::string_view stream);

/// Convenience wrapper returning a ready-to-draw stream.
CounterRng derive_rng(std::uint64_t master, std::uint64_t trial_index,
                      std::string_view stream);

} // namespace calderon
