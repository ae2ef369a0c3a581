// Copyright (c) 2026 wwspot authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WWS_RNG_HPP_
#define WWS_RNG_HPP_

#include <cstdint>
#include <random>

namespace wws {

// splitmix64 step; also used to derive independent stream seeds.
inline std::uint64_t SplitMix64(std::uint64_t* state) {
  std::uint64_t z = (*state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Mixes up to three values into one substream seed. Used so that
// per-utterance randomness depends only on (seed, epoch, utterance index)
// and never on scheduling order.
inline std::uint64_t DeriveSeed(std::uint64_t a, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
  std::uint64_t s = a;
  std::uint64_t out = SplitMix64(&s);
  s ^= b + 0x9e3779b97f4a7c15ULL + (out << 6) + (out >> 2);
  out = SplitMix64(&s);
  s ^= c + 0x9e3779b97f4a7c15ULL + (out << 6) + (out >> 2);
  return SplitMix64(&s);
}

// Seeded generator over std::mt19937_64. The raw engine is fully specified
// by the standard; the distributions below are hand-rolled because the
// std::*_distribution classes are implementation-defined and would break
// cross-toolchain reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi). Returns lo when the interval is degenerate.
  double Uniform(double lo, double hi) {
    return lo + (hi - lo) * Uniform();
  }

  // Uniform integer in [0, n). n must be positive.
  int UniformInt(int n) {
    return static_cast<int>(Uniform() * static_cast<double>(n));
  }

  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wws

#endif  // WWS_RNG_HPP_
