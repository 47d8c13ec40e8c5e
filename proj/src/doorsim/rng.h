// Copyright 2026 The doorsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DOORSIM_RNG_H_
#define DOORSIM_RNG_H_

#include <cmath>
#include <cstdint>

namespace doorsim {

// SplitMix64-based generator. Deliberately self-contained so that streams are
// bit-reproducible across platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t NextU64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double Uniform01() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }

  int UniformInt(int n) {  // in [0, n)
    return static_cast<int>(NextU64() % static_cast<uint64_t>(n));
  }

  // Standard normal via Box-Muller. Draws a fresh pair per call so the
  // stream has no hidden cache state.
  double Normal() {
    double u1 = (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
    double u2 = Uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Derives an independent stream from a base seed and a stream id.
  static uint64_t Split(uint64_t seed, uint64_t stream) {
    Rng mix(seed ^ (0x632be59bd9b4e019ULL + stream * 0x9e3779b97f4a7c15ULL));
    mix.NextU64();
    return mix.NextU64();
  }

 private:
  uint64_t state_;
};

}  // namespace doorsim

#endif  // DOORSIM_RNG_H_
