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
// Log-Mel filterbank features: periodic Hann window, radix-2 FFT, HTK-style
// triangular mel filters (mel = 2595*log10(1 + f/700)) interpolated in the
// mel domain, natural log with a fixed floor. No pre-emphasis, no dither,
// so outputs are exactly reproducible.

#ifndef WWS_FEATURES_HPP_
#define WWS_FEATURES_HPP_

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wws/wav.hpp"

namespace wws {

struct FeatConfig {
  int n_mels = 80;
  double window_ms = 25.0;
  double shift_ms = 10.0;
  int fft_size = 512;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  double log_floor = 1e-10;

  int WindowSamples(int sample_rate_hz) const {
    return static_cast<int>(std::lround(window_ms * sample_rate_hz / 1000.0));
  }
  int ShiftSamples(int sample_rate_hz) const {
    return static_cast<int>(std::lround(shift_ms * sample_rate_hz / 1000.0));
  }

  void Validate(int sample_rate_hz) const {
    if (sample_rate_hz <= 0) {
      throw std::invalid_argument("feat config: sample rate must be positive");
    }
    if (!(window_ms > shift_ms && shift_ms > 0.0)) {
      throw std::invalid_argument("feat config: need window_ms > shift_ms > 0");
    }
    if (n_mels < 1) {
      throw std::invalid_argument("feat config: n_mels must be >= 1");
    }
    if (fft_size < WindowSamples(sample_rate_hz)) {
      throw std::invalid_argument("feat config: fft_size smaller than window");
    }
    if ((fft_size & (fft_size - 1)) != 0) {
      throw std::invalid_argument("feat config: fft_size must be a power of two");
    }
    if (!(fmin_hz >= 0.0 && fmin_hz < fmax_hz &&
          fmax_hz <= sample_rate_hz / 2.0)) {
      throw std::invalid_argument("feat config: need 0 <= fmin < fmax <= sr/2");
    }
    if (!(log_floor > 0.0)) {
      throw std::invalid_argument("feat config: log_floor must be positive");
    }
  }
};

// frames x n_mels, row-major.
struct FeatureMatrix {
  int frames = 0;
  int n_mels = 0;
  double frame_shift_ms = 10.0;
  std::vector<double> data;

  double& At(int t, int m) { return data[static_cast<std::size_t>(t) * n_mels + m]; }
  double At(int t, int m) const { return data[static_cast<std::size_t>(t) * n_mels + m]; }
  const double* Row(int t) const { return data.data() + static_cast<std::size_t>(t) * n_mels; }
};

// Frame count for a given signal length: 1 + floor((n - win) / shift) when
// n >= win, else 0.
inline int NumFrames(std::size_t num_samples, int window_samples,
                     int shift_samples) {
  if (num_samples < static_cast<std::size_t>(window_samples)) return 0;
  return 1 + static_cast<int>((num_samples - window_samples) / shift_samples);
}

inline double HzToMel(double hz) {
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

inline double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

namespace detail {

// In-place iterative radix-2 Cooley-Tukey. n must be a power of two.
inline void Fft(std::vector<std::complex<double>>* buf) {
  std::size_t n = buf->size();
  if (n <= 1) return;
  auto& a = *buf;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double angle = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace detail

// Precomputes the window and mel weights for one (config, sample rate) pair.
class LogMelExtractor {
 public:
  LogMelExtractor(const FeatConfig& cfg, int sample_rate_hz)
      : cfg_(cfg), sample_rate_hz_(sample_rate_hz) {
    cfg.Validate(sample_rate_hz);
    window_samples_ = cfg.WindowSamples(sample_rate_hz);
    shift_samples_ = cfg.ShiftSamples(sample_rate_hz);
    n_bins_ = cfg.fft_size / 2 + 1;

    // Periodic Hann.
    window_.resize(window_samples_);
    for (int i = 0; i < window_samples_; ++i) {
      window_[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / window_samples_);
    }

    // Triangular filters with edges equally spaced on the mel scale,
    // weights interpolated in the mel domain.
    double mel_lo = HzToMel(cfg.fmin_hz);
    double mel_hi = HzToMel(cfg.fmax_hz);
    double mel_step = (mel_hi - mel_lo) / (cfg.n_mels + 1);
    mel_weights_.assign(static_cast<std::size_t>(cfg.n_mels) * n_bins_, 0.0);
    center_freqs_hz_.resize(cfg.n_mels);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double left = mel_lo + m * mel_step;
      double center = left + mel_step;
      double right = center + mel_step;
      center_freqs_hz_[m] = MelToHz(center);
      for (int k = 0; k < n_bins_; ++k) {
        double mel_k = HzToMel(static_cast<double>(k) * sample_rate_hz /
                               cfg.fft_size);
        double w = 0.0;
        if (mel_k > left && mel_k < right) {
          w = mel_k <= center ? (mel_k - left) / (center - left)
                              : (right - mel_k) / (right - center);
        }
        mel_weights_[static_cast<std::size_t>(m) * n_bins_ + k] = w;
      }
    }
  }

  FeatureMatrix Compute(const AudioBuffer& audio) const {
    if (audio.sample_rate_hz != sample_rate_hz_) {
      throw std::invalid_argument("log_mel: sample rate does not match extractor");
    }
    FeatureMatrix feats;
    feats.n_mels = cfg_.n_mels;
    feats.frame_shift_ms = cfg_.shift_ms;
    feats.frames = NumFrames(audio.samples.size(), window_samples_, shift_samples_);
    feats.data.resize(static_cast<std::size_t>(feats.frames) * cfg_.n_mels);

    const double floor_log = std::log(cfg_.log_floor);
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg_.fft_size));
    for (int t = 0; t < feats.frames; ++t) {
      const double* frame = audio.samples.data() +
                            static_cast<std::size_t>(t) * shift_samples_;
      for (int i = 0; i < window_samples_; ++i) {
        buf[i] = std::complex<double>(frame[i] * window_[i], 0.0);
      }
      for (int i = window_samples_; i < cfg_.fft_size; ++i) {
        buf[i] = std::complex<double>(0.0, 0.0);
      }
      detail::Fft(&buf);
      for (int m = 0; m < cfg_.n_mels; ++m) {
        const double* w = mel_weights_.data() +
                          static_cast<std::size_t>(m) * n_bins_;
        double energy = 0.0;
        for (int k = 0; k < n_bins_; ++k) {
          if (w[k] != 0.0) energy += w[k] * std::norm(buf[k]);
        }
        feats.At(t, m) = energy > cfg_.log_floor ? std::log(energy) : floor_log;
      }
    }
    return feats;
  }

  const std::vector<double>& center_freqs_hz() const { return center_freqs_hz_; }
  int window_samples() const { return window_samples_; }
  int shift_samples() const { return shift_samples_; }

 private:
  FeatConfig cfg_;
  int sample_rate_hz_;
  int window_samples_ = 0;
  int shift_samples_ = 0;
  int n_bins_ = 0;
  std::vector<double> window_;
  std::vector<double> mel_weights_;     // n_mels x n_bins
  std::vector<double> center_freqs_hz_;
};

inline FeatureMatrix LogMel(const AudioBuffer& audio, const FeatConfig& cfg) {
  return LogMelExtractor(cfg, audio.sample_rate_hz).Compute(audio);
}

// Feature dump: magic "DWF1", u32 frames, u32 n_mels, then frames*n_mels
// little-endian f32, row-major.
inline void WriteFeatureFile(const std::string& path, const FeatureMatrix& feats) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("feature dump: cannot open " + path);
  f.write("DWF1", 4);
  auto put_u32 = [&f](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    f.write(reinterpret_cast<const char*>(b), 4);
  };
  put_u32(static_cast<std::uint32_t>(feats.frames));
  put_u32(static_cast<std::uint32_t>(feats.n_mels));
  for (double v : feats.data) {
    float x = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &x, 4);
    put_u32(bits);
  }
  if (!f) throw std::runtime_error("feature dump: short write: " + path);
}

inline FeatureMatrix ReadFeatureFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("feature dump: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "DWF1", 4) != 0) {
    throw std::runtime_error("feature dump: bad magic in " + path);
  }
  auto get_u32 = [&f, &path]() {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw std::runtime_error("feature dump: truncated " + path);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  FeatureMatrix feats;
  feats.frames = static_cast<int>(get_u32());
  feats.n_mels = static_cast<int>(get_u32());
  feats.data.resize(static_cast<std::size_t>(feats.frames) * feats.n_mels);
  for (double& v : feats.data) {
    std::uint32_t bits = get_u32();
    float x;
    std::memcpy(&x, &bits, 4);
    v = static_cast<double>(x);
  }
  return feats;
}

}  // namespace wws

#endif  // WWS_FEATURES_HPP_
