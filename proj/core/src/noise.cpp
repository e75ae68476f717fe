#include <stacklq/noise.hpp>

#include <cmath>
#include <numbers>

namespace stacklq {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

PhiloxKey key_from(std::uint64_t v) {
  return {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32)};
}

PhiloxKey channel_key(std::uint64_t seed, int channel) {
  return key_from(splitmix64(seed ^ (0x5851F42D4C957F2Dull * static_cast<std::uint64_t>(channel + 1))));
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kM0, c[0], lo0, hi0);
    mulhilo(kM1, c[2], lo1, hi1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

NoiseSource::NoiseSource(std::uint64_t seed) : seed_(seed) {
  for (int c = 0; c < 3; ++c) keys_[c] = channel_key(seed, c);
}

NoiseSource NoiseSource::with_channel_seed(int channel, std::uint64_t seed) const {
  NoiseSource out = *this;
  out.keys_[channel] = channel_key(seed, channel);
  return out;
}

double NoiseSource::normal(int channel, std::uint64_t path, std::uint64_t step) const {
  const PhiloxCounter ctr{static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(path),
                          static_cast<std::uint32_t>(path >> 32), 0u};
  const PhiloxCounter r = philox4x32_10(ctr, keys_[channel]);
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const std::uint64_t a = ((static_cast<std::uint64_t>(r[0]) << 32) | r[1]) >> 11;
  const std::uint64_t b = ((static_cast<std::uint64_t>(r[2]) << 32) | r[3]) >> 11;
  const double u1 = (static_cast<double>(a) + 1.0) * kScale;  // (0, 1]
  const double u2 = static_cast<double>(b) * kScale;          // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void NoiseSource::increments(const TimeGrid& grid, const std::array<std::uint64_t, 3>& path,
                             std::vector<std::array<double, 3>>& out) const {
  const std::size_t N = grid.steps();
  out.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double sh = std::sqrt(grid.step(k));
    for (int c = 0; c < 3; ++c) out[k][c] = sh * normal(c, path[c], k);
  }
}

}  // namespace stacklq
