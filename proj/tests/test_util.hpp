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

#ifndef WWSPOT_TESTS_TEST_UTIL_HPP_
#define WWSPOT_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "wws/wav.hpp"

namespace wwstest {

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / (tag + "_" + std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    std::abort();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string Str(const std::string& rel = "") const {
    return rel.empty() ? path_.string() : (path_ / rel).string();
  }

 private:
  std::filesystem::path path_;
};

inline wws::AudioBuffer MakeSine(double freq_hz, double seconds,
                                 int sample_rate_hz = 16000,
                                 double amplitude = 0.5) {
  wws::AudioBuffer audio;
  audio.sample_rate_hz = sample_rate_hz;
  auto n = static_cast<std::size_t>(std::lround(seconds * sample_rate_hz));
  audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    audio.samples[i] =
        amplitude * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) /
                             sample_rate_hz);
  }
  return audio;
}

// Frequency of the largest magnitude bin of a naive DFT, in Hz.
inline double DominantFrequencyHz(const wws::AudioBuffer& audio) {
  const std::size_t n = audio.samples.size();
  double best_mag = -1.0;
  std::size_t best_k = 0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ang = -2.0 * M_PI * static_cast<double>(k) *
                   static_cast<double>(i) / static_cast<double>(n);
      re += audio.samples[i] * std::cos(ang);
      im += audio.samples[i] * std::sin(ang);
    }
    double mag = re * re + im * im;
    if (mag > best_mag) {
      best_mag = mag;
      best_k = k;
    }
  }
  return static_cast<double>(best_k) * audio.sample_rate_hz /
         static_cast<double>(n);
}

}  // namespace wwstest

#endif  // WWSPOT_TESTS_TEST_UTIL_HPP_
