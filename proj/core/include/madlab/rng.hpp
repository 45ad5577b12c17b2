/*
 * Copyright 2026 The madlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MADLAB_RNG_HPP
#define MADLAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>

namespace madlab
{

constexpr std::uint64_t
splitmix64(std::uint64_t z) noexcept
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

/// FNV-1a, used to turn identifiers into stream key components.
constexpr std::uint64_t
hash_string(std::string_view s) noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t
combine_key(std::uint64_t key, std::uint64_t component) noexcept
{
  return splitmix64(key ^ splitmix64(component + 0x632be59bd9b4e019ULL));
}

/// Counter-based random stream.
///
/// Draw n of a stream is a pure function of (key, n), so a stream keyed by
/// (seed, question, round, agent) yields the same values no matter which
/// thread or in which order rollouts are generated.
class RandomStream
{
 public:
  explicit constexpr RandomStream(std::uint64_t key) noexcept : key_{key} {}

  constexpr RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> components) noexcept : key_{seed}
  {
    for (const auto c : components) key_ = combine_key(key_, c);
  }

  constexpr std::uint64_t next_u64() noexcept { return splitmix64(key_ ^ splitmix64(counter_++)); }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept { return static_cast<double>(next_u64() >> 11U) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes two draws.
  double normal() noexcept
  {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, n).
  constexpr std::uint64_t below(std::uint64_t n) noexcept
  {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_{};
};

}  // namespace madlab

#endif  // MADLAB_RNG_HPP
