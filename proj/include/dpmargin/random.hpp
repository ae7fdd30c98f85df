//
// Copyright 2026 The dpmargin Authors
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

// Counter-based random streams. Every draw is a pure function of
// (key, counter), so values do not depend on evaluation order or on how work
// is split across threads.

#ifndef DPMARGIN_RANDOM_HPP_
#define DPMARGIN_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace dpmargin {

// SplitMix64 output function.
constexpr std::uint64_t Mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t HashString(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Derives an independent stream key from a parent seed, a purpose tag and an
// index. Distinct (tag, index) pairs give unrelated keys.
constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view tag,
                                   std::uint64_t index = 0) noexcept {
  return Mix64(Mix64(seed ^ HashString(tag)) + Mix64(index));
}

constexpr std::uint64_t BitsAt(std::uint64_t key,
                               std::uint64_t counter) noexcept {
  return Mix64(key ^ Mix64(counter + 0x632BE59BD9B4E019ULL));
}

// Uniform on the open interval (0, 1).
constexpr double ToUnitOpen(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double UniformAt(std::uint64_t key, std::uint64_t counter) noexcept {
  return ToUnitOpen(BitsAt(key, counter));
}

// Standard normal draw number `counter` of stream `key` (Box-Muller, cosine
// branch, consuming sub-counters 2c and 2c+1).
inline double GaussianAt(std::uint64_t key, std::uint64_t counter) noexcept {
  const double u1 = UniformAt(key, 2 * counter);
  const double u2 = UniformAt(key, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Sequential view of a counter stream; satisfies UniformRandomBitGenerator so
// it can drive <random> distributions.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  explicit CounterStream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return BitsAt(key_, counter_++); }

  double Uniform() noexcept { return ToUnitOpen((*this)()); }
  double Gaussian() noexcept { return GaussianAt(key_, gaussian_counter_++); }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  // Gaussian draws use a disjoint sub-stream so mixing Uniform() and
  // Gaussian() calls never reuses bits.
  std::uint64_t gaussian_counter_ = std::uint64_t{1} << 62;
};

}  // namespace dpmargin

#endif  // DPMARGIN_RANDOM_HPP_
