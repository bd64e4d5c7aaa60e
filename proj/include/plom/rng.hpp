#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>

namespace plom {

// Counter-based random streams built on Philox4x32-10. Every draw is a pure
// function of (seed, stream, index), so realizations can be generated in any
// order, on any number of threads, with bitwise-identical results, and any
// sub-stream can be replayed without storing state.
namespace rng {

namespace detail {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<uint32_t, 4>& ctr, std::array<uint32_t, 2>& key) {
  const uint64_t p0 = uint64_t(kPhiloxM0) * ctr[0];
  const uint64_t p1 = uint64_t(kPhiloxM1) * ctr[2];
  ctr = {uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], uint32_t(p1),
         uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], uint32_t(p0)};
  key[0] += kPhiloxW0;
  key[1] += kPhiloxW1;
}

inline std::array<uint32_t, 4> philox10(std::array<uint32_t, 4> ctr,
                                        std::array<uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) philox_round(ctr, key);
  return ctr;
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// (0,1) uniform from 53 high bits; never returns 0, safe under log().
inline double to_unit(uint64_t x) {
  return double(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

}  // namespace detail

// Derive a sub-seed from a master seed and a textual label, for handing
// independent streams to different pipeline stages.
inline uint64_t derive_seed(uint64_t seed, std::string_view label) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (const char c : label) {
    h ^= uint8_t(c);
    h *= 0x100000001B3ull;
  }
  return detail::splitmix64(seed ^ h);
}

// A pair of independent N(0,1) draws at (seed, stream, index) via Box-Muller.
inline std::array<double, 2> normal_pair(uint64_t seed, uint64_t stream, uint64_t index) {
  const auto out = detail::philox10(
      {uint32_t(index), uint32_t(index >> 32), uint32_t(stream), uint32_t(stream >> 32)},
      {uint32_t(seed), uint32_t(seed >> 32)});
  const double u1 = detail::to_unit(uint64_t(out[0]) | (uint64_t(out[1]) << 32));
  const double u2 = detail::to_unit(uint64_t(out[2]) | (uint64_t(out[3]) << 32));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

inline double normal_at(uint64_t seed, uint64_t stream, uint64_t index) {
  const auto pair = normal_pair(seed, stream, index / 2);
  return pair[index & 1];
}

// Fills out[0..n) with the normals of `stream` starting at element `offset`.
inline void fill_normals(uint64_t seed, uint64_t stream, uint64_t offset,
                         std::span<double> out) {
  uint64_t i = offset;
  size_t k = 0;
  if ((i & 1) && k < out.size()) {
    out[k++] = normal_at(seed, stream, i);
    ++i;
  }
  for (; k + 1 < out.size(); k += 2, i += 2) {
    const auto pair = normal_pair(seed, stream, i / 2);
    out[k] = pair[0];
    out[k + 1] = pair[1];
  }
  if (k < out.size()) out[k] = normal_at(seed, stream, i);
}

// (0,1) uniform at (seed, stream, index).
inline double uniform_at(uint64_t seed, uint64_t stream, uint64_t index) {
  const auto out = detail::philox10(
      {uint32_t(index), uint32_t(index >> 32), uint32_t(stream), uint32_t(stream >> 32)},
      {uint32_t(seed ^ 0x5DEECE66Dull), uint32_t(seed >> 32)});
  return detail::to_unit(uint64_t(out[0]) | (uint64_t(out[1]) << 32));
}

}  // namespace rng
}  // namespace plom
