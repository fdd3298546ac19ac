// Copyright 2026 The DEXA Authors.
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

#ifndef DEXA_RANDOM_H_
#define DEXA_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>

namespace dexa {

// Seeded generator with platform-independent derived draws. The standard
// distributions are implementation defined, so uniform reals and bounded
// integers are derived here directly from the mt19937_64 output stream.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(Mix(seed)) {}

  uint64_t Next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Uniform in [0, n) by rejection; n must be positive.
  uint64_t Below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = Next();
    } while (x >= limit);
    return x % n;
  }

  // splitmix64 finalizer, used to derive independent seeds.
  static uint64_t Mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static uint64_t Derive(uint64_t seed, uint64_t stream) {
    return Mix(seed ^ Mix(stream + 0x632be59bd9b4e019ULL));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dexa

#endif  // DEXA_RANDOM_H_
