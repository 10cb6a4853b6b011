//
// Copyright 2026 The GSSD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

/**
 * Counter-based random streams.
 *
 * Every draw is a pure function of (seed, label, index, counter), computed
 * with the Philox4x32-10 block cipher. Deriving a stream is O(1) and needs no
 * shared state, so one stream per projection index gives results that do not
 * depend on evaluation order or on the number of worker threads.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

namespace gssd {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
constexpr PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t kM0 = 0xD2511F53U;
  constexpr std::uint32_t kM1 = 0xCD9E8D57U;
  constexpr std::uint32_t kW0 = 0x9E3779B9U;
  constexpr std::uint32_t kW1 = 0xBB67AE85U;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

// 53-bit uniform in [0, 1) from two 32-bit words.
constexpr double to_unit(std::uint32_t a, std::uint32_t b) noexcept {
  const std::uint64_t bits =
      (std::uint64_t{a >> 5} << 26) | std::uint64_t{b >> 6};
  return static_cast<double>(bits) * 0x1.0p-53;
}

}  // namespace detail

/// Immutable root of a stream family. Cheap to copy and share.
class RngRoot {
 public:
  constexpr explicit RngRoot(std::uint64_t seed = 42) noexcept : seed_(seed) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }

  /// A new root whose stream family is independent of this one's.
  constexpr RngRoot child(std::string_view label,
                          std::uint64_t index) const noexcept {
    return RngRoot(detail::splitmix64(
        detail::splitmix64(seed_ ^ detail::splitmix64(detail::fnv1a64(label))) ^
        detail::splitmix64(index + 0x632BE59BD9B4E019ULL)));
  }

 private:
  std::uint64_t seed_;
};

/**
 * One stream of the family rooted at an RngRoot.
 *
 * The (seed, label) pair forms the Philox key; the index occupies the upper
 * half of the counter and the draw counter the lower half, so distinct
 * (label, index) pairs never share a cipher block. Each draw consumes exactly
 * one block.
 */
class RngStream {
 public:
  RngStream(const RngRoot& root, std::string_view label, std::uint64_t index)
      : seed_(root.seed()), label_(label), index_(index) {
    const std::uint64_t k = detail::splitmix64(
        root.seed() ^ detail::splitmix64(detail::fnv1a64(label)));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& label() const noexcept { return label_; }
  std::uint64_t index() const noexcept { return index_; }
  /// Number of blocks consumed so far.
  std::uint64_t counter() const noexcept { return counter_; }

  detail::PhiloxBlock next_block() noexcept {
    const detail::PhiloxBlock ctr = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(index_),
        static_cast<std::uint32_t>(index_ >> 32)};
    ++counter_;
    return detail::philox4x32_10(ctr, key_);
  }

  std::uint64_t next_u64() noexcept {
    const auto b = next_block();
    return (std::uint64_t{b[0]} << 32) | b[1];
  }

  /// Uniform in [0, 1).
  double uniform() noexcept {
    const auto b = next_block();
    return detail::to_unit(b[0], b[1]);
  }

  /// Standard normal via Box-Muller on a single block; no rejection loop.
  double standard_normal() noexcept {
    const auto b = next_block();
    const double u1 = 1.0 - detail::to_unit(b[0], b[1]);  // (0, 1]
    const double u2 = detail::to_unit(b[2], b[3]);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::uint64_t index_;
  detail::PhiloxKey key_{};
  std::uint64_t counter_ = 0;
};

inline RngStream derive_stream(const RngRoot& root, std::string_view label,
                               std::uint64_t index) {
  return RngStream(root, label, index);
}

inline double draw_standard_normal(RngStream& stream) noexcept {
  return stream.standard_normal();
}

}  // namespace gssd
