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
//
// Waveform-level augmentation: gain, SNR-targeted noise mixing and
// band-limited speed perturbation. All functions are pure; randomness is
// injected through an explicit Rng so parallel schedules cannot change
// results.

#ifndef WWS_AUDIO_HPP_
#define WWS_AUDIO_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wws/rng.hpp"
#include "wws/wav.hpp"

namespace wws {

// Per-utterance augmentation policy. Gain is always applied, noise with
// probability noise_prob, speed always (a rate of exactly 1.0 is a no-op).
struct AugPolicy {
  double gain_lo = 0.9;
  double gain_hi = 1.1;
  double noise_prob = 0.15;
  double snr_lo_db = 8.0;
  double snr_hi_db = 20.0;
  double speed_lo = 0.9;
  double speed_hi = 1.1;
  std::uint64_t seed = 0;

  void Validate() const {
    if (gain_lo > gain_hi || snr_lo_db > snr_hi_db || speed_lo > speed_hi) {
      throw std::invalid_argument("aug policy: empty range");
    }
    if (gain_lo <= 0.0) {
      throw std::invalid_argument("aug policy: non-positive gain");
    }
    if (noise_prob < 0.0 || noise_prob > 1.0) {
      throw std::invalid_argument("aug policy: noise_prob outside [0,1]");
    }
  }
};

inline double ClampSample(double s) {
  return s < -1.0 ? -1.0 : (s > 1.0 ? 1.0 : s);
}

// Multiplies every sample by `factor`, clamping the result to [-1, 1].
inline AudioBuffer ApplyGain(const AudioBuffer& audio, double factor) {
  if (!(factor > 0.0)) {
    throw std::invalid_argument("apply_gain: factor must be positive");
  }
  AudioBuffer out;
  out.sample_rate_hz = audio.sample_rate_hz;
  out.samples.resize(audio.samples.size());
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    out.samples[i] = ClampSample(audio.samples[i] * factor);
  }
  return out;
}

inline double MeanSquarePower(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

// Adds noise scaled so that 10*log10(P_signal / (g^2 * P_noise)) equals
// target_snr_db, powers measured over the mixed region. The noise buffer is
// tiled (or cropped) to the signal length.
inline AudioBuffer MixNoise(const AudioBuffer& signal, const AudioBuffer& noise,
                            double target_snr_db) {
  if (signal.sample_rate_hz != noise.sample_rate_hz) {
    throw std::invalid_argument("mix_noise: sample-rate mismatch");
  }
  if (noise.samples.empty()) {
    throw std::invalid_argument("mix_noise: empty noise buffer");
  }
  std::vector<double> track(signal.samples.size());
  for (std::size_t i = 0; i < track.size(); ++i) {
    track[i] = noise.samples[i % noise.samples.size()];
  }
  double p_noise = MeanSquarePower(track);
  if (p_noise <= 0.0) {
    throw std::invalid_argument("mix_noise: silent noise buffer");
  }
  double p_signal = MeanSquarePower(signal.samples);
  double gain = std::sqrt(p_signal / (p_noise * std::pow(10.0, target_snr_db / 10.0)));

  AudioBuffer out;
  out.sample_rate_hz = signal.sample_rate_hz;
  out.samples.resize(signal.samples.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = ClampSample(signal.samples[i] + gain * track[i]);
  }
  return out;
}

namespace detail {

inline double Sinc(double x) {
  if (x == 0.0) return 1.0;
  double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace detail

// Resamples so that playback is `rate` times faster: a sine of frequency f
// comes out at f*rate when replayed at the original sample rate. Uses a
// Hann-windowed sinc kernel with the cutoff lowered to 1/rate when
// compressing, which keeps the result band-limited.
inline AudioBuffer SpeedPerturb(const AudioBuffer& audio, double rate) {
  if (!(rate >= 0.5 && rate <= 2.0)) {
    throw std::invalid_argument("speed_perturb: rate outside [0.5, 2.0]");
  }
  constexpr int kHalfTaps = 16;
  const double cutoff = rate > 1.0 ? 1.0 / rate : 1.0;
  const std::size_t in_len = audio.samples.size();

  AudioBuffer out;
  out.sample_rate_hz = audio.sample_rate_hz;
  if (in_len == 0) return out;
  std::size_t out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(in_len) / rate));
  out.samples.resize(out_len);

  for (std::size_t i = 0; i < out_len; ++i) {
    double pos = static_cast<double>(i) * rate;
    auto j = static_cast<std::ptrdiff_t>(std::floor(pos));
    double frac = pos - static_cast<double>(j);
    double acc = 0.0;
    double norm = 0.0;
    for (int m = -kHalfTaps + 1; m <= kHalfTaps; ++m) {
      double u = static_cast<double>(m) - frac;
      double window = 0.5 + 0.5 * std::cos(M_PI * u / kHalfTaps);
      double h = cutoff * detail::Sinc(cutoff * u) * window;
      norm += h;
      std::ptrdiff_t src = j + m;
      if (src >= 0 && src < static_cast<std::ptrdiff_t>(in_len)) {
        acc += audio.samples[static_cast<std::size_t>(src)] * h;
      }
    }
    out.samples[i] = ClampSample(acc / norm);
  }
  return out;
}

// What Augment actually did for one utterance; handy for logging and tests.
struct AugTrace {
  double gain = 1.0;
  bool noise_applied = false;
  int noise_index = -1;
  double snr_db = 0.0;
  std::size_t noise_offset = 0;
  double speed = 1.0;
};

// Applies gain, then (with probability noise_prob) noise mixing, then speed
// perturbation. Draw order is fixed: gain factor, noise coin, [noise index,
// offset, SNR], speed rate.
inline AudioBuffer Augment(const AudioBuffer& audio,
                           const std::vector<AudioBuffer>& noise_pool,
                           const AugPolicy& policy, Rng* rng,
                           AugTrace* trace = nullptr) {
  policy.Validate();
  if (policy.noise_prob > 0.0 && noise_pool.empty()) {
    throw std::invalid_argument("augment: empty noise pool with noise_prob > 0");
  }

  AugTrace local;
  local.gain = rng->Uniform(policy.gain_lo, policy.gain_hi);
  AudioBuffer out = ApplyGain(audio, local.gain);

  local.noise_applied = rng->Bernoulli(policy.noise_prob);
  if (local.noise_applied) {
    local.noise_index = rng->UniformInt(static_cast<int>(noise_pool.size()));
    const AudioBuffer& noise = noise_pool[static_cast<std::size_t>(local.noise_index)];
    if (noise.samples.empty()) {
      throw std::invalid_argument("augment: empty noise buffer in pool");
    }
    local.noise_offset = static_cast<std::size_t>(
        rng->UniformInt(static_cast<int>(noise.samples.size())));
    local.snr_db = rng->Uniform(policy.snr_lo_db, policy.snr_hi_db);
    AudioBuffer rotated;
    rotated.sample_rate_hz = noise.sample_rate_hz;
    rotated.samples.resize(noise.samples.size());
    for (std::size_t i = 0; i < noise.samples.size(); ++i) {
      rotated.samples[i] =
          noise.samples[(local.noise_offset + i) % noise.samples.size()];
    }
    out = MixNoise(out, rotated, local.snr_db);
  }

  local.speed = rng->Uniform(policy.speed_lo, policy.speed_hi);
  if (local.speed != 1.0) {
    out = SpeedPerturb(out, local.speed);
  }

  if (trace != nullptr) *trace = local;
  return out;
}

}  // namespace wws

#endif  // WWS_AUDIO_HPP_
