#pragma once

#include <stacklq/model.hpp>

#include <array>
#include <cstdint>
#include <vector>

namespace stacklq {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds.
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// splitmix64 finalizer, used to derive channel keys from a base seed.
std::uint64_t splitmix64(std::uint64_t x);

/// Brownian increments of (W1, W2, W3) generated from counters, so any
/// increment can be regenerated from (channel key, path index, step) alone.
/// Each channel has its own key; changing one channel's seed leaves the other
/// channels' draws untouched.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed = 42);

  std::uint64_t seed() const { return seed_; }

  /// Copy with channel c (0 = W1, 1 = W2, 2 = W3) driven by its own seed.
  NoiseSource with_channel_seed(int channel, std::uint64_t seed) const;

  /// Standard normal draw for (channel, path, step).
  double normal(int channel, std::uint64_t path, std::uint64_t step) const;

  /// Increments dW[k][c] on every grid step. `path` holds the path index used
  /// for each channel (they differ only in nested-sampling oracles).
  void increments(const TimeGrid& grid, const std::array<std::uint64_t, 3>& path,
                  std::vector<std::array<double, 3>>& out) const;
  void increments(const TimeGrid& grid, std::uint64_t path,
                  std::vector<std::array<double, 3>>& out) const {
    increments(grid, {path, path, path}, out);
  }

 private:
  std::uint64_t seed_;
  std::array<PhiloxKey, 3> keys_;
};

}  // namespace stacklq
