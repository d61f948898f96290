//
// Copyright 2026 The dpsynth Authors
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

#ifndef DPSYNTH_RNG_HPP_
#define DPSYNTH_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

// Seedable deterministic randomness. Every stream in the project is derived
// from a master seed through DeriveSeed, so a run is a pure function of its
// configuration. The sampling algorithms below are part of the on-disk
// contract and must not change between versions:
//
//   * engine:    std::mt19937_64 (bit-exact sequence fixed by the standard)
//   * uniform:   high 53 bits of one engine draw, mapped to [0, 1)
//   * gaussian:  Box-Muller, cosine branch only, two draws per sample
//   * laplace:   inverse CDF from one uniform draw
//   * integers:  rejection sampling on the raw 64-bit output
//
// std::normal_distribution and friends are avoided on purpose: their output
// sequences differ across standard library implementations.

namespace dpsynth {

// SplitMix64 output function. Used only for seed derivation.
constexpr uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Independent stream labels. Numeric values are frozen; appending is fine,
// reordering is not (it would silently reseed every component).
enum class SeedDomain : uint64_t {
  kPartition = 1,
  kGeneratorInit = 2,
  kTeacherInit = 3,
  kTeacherData = 4,
  kNoise = 5,
  kProjection = 6,
  kLatent = 7,
  kLabel = 8,
  kLaplace = 9,
};

// Derives the seed for one component stream: two SplitMix64 rounds over
// (master, domain, counter). The counter picks an instance within a domain,
// e.g. the teacher index or the aggregation query index.
constexpr uint64_t DeriveSeed(uint64_t master, SeedDomain domain,
                              uint64_t counter) {
  const uint64_t tagged = master ^ SplitMix64(static_cast<uint64_t>(domain));
  return SplitMix64(SplitMix64(tagged) ^ counter);
}

class RngStream {
 public:
  explicit RngStream(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (cosine branch). Consumes exactly two
  // engine draws.
  double Gaussian() {
    const double u1 = 1.0 - Uniform01();  // (0, 1], keeps log finite
    const double u2 = Uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double Gaussian(double mean, double stddev) {
    return mean + stddev * Gaussian();
  }

  // Zero-mean Laplace sample with the given scale (inverse CDF method).
  double Laplace(double scale) {
    const double u = Uniform01() - 0.5;
    double t = 1.0 - 2.0 * std::abs(u);
    if (t <= 0.0) t = std::numeric_limits<double>::min();
    const double mag = -scale * std::log(t);
    return u < 0.0 ? -mag : mag;
  }

  // Uniform integer in [0, n). Rejection sampling, unbiased.
  uint64_t UniformBelow(uint64_t n) {
    const uint64_t max = std::numeric_limits<uint64_t>::max();
    const uint64_t limit = max - max % n;
    uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dpsynth

#endif  // DPSYNTH_RNG_HPP_
