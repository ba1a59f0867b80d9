#include "ebipla/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ebipla {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::uint64_t join(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

// (0, 1] with 53 bits of resolution.
inline double open_closed(std::uint64_t x) { return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53; }
// [0, 1) with 53 bits of resolution.
inline double closed_open(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

std::array<std::uint32_t, 4> NoiseStream::block(const NoiseKey& key,
                                                 std::uint32_t block_index) const {
  if (key.j >= (1u << 24) || key.n >= (1u << 16) || block_index >= (1u << 16)) {
    throw std::out_of_range("NoiseStream: key component out of range");
  }
  const std::array<std::uint32_t, 4> ctr = {
      key.k,
      (static_cast<std::uint32_t>(key.role) << 24) | key.j,
      key.m,
      (key.n << 16) | block_index,
  };
  const std::array<std::uint32_t, 2> k = {static_cast<std::uint32_t>(seed_),
                                          static_cast<std::uint32_t>(seed_ >> 32)};
  return philox4x32(ctr, k);
}

void NoiseStream::normal(const NoiseKey& key, std::span<double> out) const {
  if (zero_) {
    for (double& v : out) v = 0.0;
    return;
  }
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const auto r = block(key, static_cast<std::uint32_t>(i / 2));
    const double u1 = open_closed(join(r[0], r[1]));
    const double u2 = closed_open(join(r[2], r[3]));
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[i] = radius * std::cos(angle);
    if (i + 1 < out.size()) out[i + 1] = radius * std::sin(angle);
  }
}

void NoiseStream::uniform(const NoiseKey& key, std::span<double> out) const {
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const auto r = block(key, static_cast<std::uint32_t>(i / 2));
    out[i] = closed_open(join(r[0], r[1]));
    if (i + 1 < out.size()) out[i + 1] = closed_open(join(r[2], r[3]));
  }
}

std::uint64_t NoiseStream::uniform_index(const NoiseKey& key, std::uint64_t i,
                                         std::uint64_t bound) const {
  const auto r = block(key, static_cast<std::uint32_t>(i / 2));
  const std::uint64_t word = (i % 2 == 0) ? join(r[0], r[1]) : join(r[2], r[3]);
  __extension__ using u128 = unsigned __int128;
  return static_cast<std::uint64_t>((static_cast<u128>(word) * bound) >> 64);
}

}  // namespace ebipla
