// Copyright 2026 The dpmix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPMIX_RNG_HPP
#define DPMIX_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dpmix {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace detail

// Seeded, splittable random stream (xoshiro256++ core, seeded via splitmix64).
//
// All randomized operations in the library take an explicit stream, so runs
// are bit-reproducible across platforms for a fixed master seed. Parallel
// tasks must use split(task_index), which derives a disjoint sub-stream from
// (root seed, task index) rather than from the current state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : root_seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_) w = detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1); safe as input to log-based inverse transforms.
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal draw via Box-Muller; consumes exactly two 64-bit words,
  // keeps no cached state.
  double gaussian() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double gaussian(double mu, double sigma) { return mu + sigma * gaussian(); }

  // Disjoint sub-stream for parallel task `task`, derived from the root seed
  // only. Deterministic regardless of how much this stream has been consumed.
  RandomStream split(std::uint64_t task) const {
    std::uint64_t sm = root_seed_ ^ (0xD1B54A32D192ED03ULL * (task + 1));
    return RandomStream(detail::splitmix64(sm));
  }

  std::uint64_t root_seed() const { return root_seed_; }

 private:
  std::uint64_t state_[4];
  std::uint64_t root_seed_;
};

}  // namespace dpmix

#endif  // DPMIX_RNG_HPP
