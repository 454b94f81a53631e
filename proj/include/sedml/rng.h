// Copyright 2026 The SEDML Authors
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

#ifndef SEDML_RNG_H_
#define SEDML_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sedml {

// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hashes a seed together with a path of stream labels.
constexpr uint64_t DeriveSeed(uint64_t seed,
                              std::initializer_list<uint64_t> path) {
  uint64_t h = Mix64(seed);
  for (uint64_t p : path) h = Mix64(h ^ Mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

// Deterministic, splittable generator. Every role (client, dealer, server)
// gets its own child stream so a whole run is reproducible from one seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(Mix64(seed)) {}

  uint64_t seed() const { return seed_; }

  // Independent child stream; does not advance this generator.
  Rng Split(std::initializer_list<uint64_t> path) const {
    return Rng(DeriveSeed(seed_, path));
  }

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 2^bits).
  uint64_t NextBits(unsigned bits) {
    uint64_t v = engine_();
    return bits >= 64 ? v : v & ((uint64_t{1} << bits) - 1);
  }

  // Uniform in [0, n).
  uint64_t Below(uint64_t n) {
    return std::uniform_int_distribution<uint64_t>(0, n - 1)(engine_);
  }

  // Uniform double in [0, 1).
  double Uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64& engine() { return engine_; }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace sedml

#endif  // SEDML_RNG_H_
