// Copyright 2026 The dp-la Authors
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

#ifndef DPLA_RNG_H_
#define DPLA_RNG_H_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>

namespace dpla {

// SplitMix64 finalizer. Used for seeding and for keying substreams.
constexpr uint64_t MixBits(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Folds an ordered list of labels into a 64-bit key. Order matters.
constexpr uint64_t DeriveSeed(uint64_t seed,
                              std::initializer_list<uint64_t> labels) {
  uint64_t key = MixBits(seed);
  for (uint64_t label : labels) key = MixBits(key ^ MixBits(label + 1));
  return key;
}

// Seeded xoshiro256** generator with explicit substream derivation.
//
// Every sample drawn from this library goes through one of the methods
// below, so a given seed produces the same stream on every build that uses
// IEEE-754 doubles and the same libm. The type also satisfies
// UniformRandomBitGenerator for use with <algorithm>.
class Rng {
 public:
  using result_type = uint64_t;

  explicit Rng(uint64_t seed) : seed_(seed) {
    uint64_t s = seed;
    for (auto& word : state_) {
      s = MixBits(s);
      word = s;
    }
  }

  // Independent generator keyed by (this seed, label...). Does not advance
  // this generator.
  Rng Substream(std::initializer_list<uint64_t> labels) const {
    return Rng(DeriveSeed(seed_, labels));
  }

  uint64_t seed() const { return seed_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<uint64_t>::max();
  }

  result_type operator()() { return Next(); }

  uint64_t Next() {
    const uint64_t result = Rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = Rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double UniformPositive() { return 1.0 - Uniform(); }

  // Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  uint64_t UniformInt(uint64_t bound) {
    if (bound <= 1) return 0;
    const uint64_t threshold = (0 - bound) % bound;
    while (true) {
      const unsigned __int128 m =
          static_cast<unsigned __int128>(Next()) * bound;
      if (static_cast<uint64_t>(m) >= threshold) {
        return static_cast<uint64_t>(m >> 64);
      }
    }
  }

  // Standard normal via Box-Muller; one draw per call.
  double Gaussian() {
    const double u1 = UniformPositive();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Laplace(0, 1) by inverse CDF. Scaling the result by b gives Lap(0, b)
  // exactly, sample for sample.
  double StandardLaplace() {
    while (true) {
      const double u = Uniform() - 0.5;
      const double tail = 1.0 - 2.0 * std::abs(u);
      if (tail > 0.0) return u < 0 ? std::log(tail) : -std::log(tail);
    }
  }

  // Exponential with unit mean.
  double StandardExponential() { return -std::log(UniformPositive()); }

  // Gamma(shape, 1) for integer shape as a sum of exponentials.
  double GammaIntegerShape(int shape) {
    double sum = 0.0;
    for (int i = 0; i < shape; ++i) sum += StandardExponential();
    return sum;
  }

 private:
  static constexpr uint64_t Rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  uint64_t seed_;
  uint64_t state_[4];
};

// In-place Fisher-Yates shuffle driven by Rng::UniformInt.
template <typename T>
void Shuffle(T& container, Rng& rng) {
  for (size_t i = container.size(); i > 1; --i) {
    const size_t j = rng.UniformInt(i);
    using std::swap;
    swap(container[i - 1], container[j]);
  }
}

}  // namespace dpla

#endif  // DPLA_RNG_H_
