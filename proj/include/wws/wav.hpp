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

#ifndef WWS_WAV_HPP_
#define WWS_WAV_HPP_

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wws {

// Mono PCM audio. Samples live in [-1, 1]; 16-bit files are normalized
// by 1/32768 on load.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

namespace detail {

inline std::uint32_t ReadLE32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t ReadLE16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void PutLE32(std::uint32_t v, std::string* out) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
  out->push_back(static_cast<char>((v >> 16) & 0xff));
  out->push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void PutLE16(std::uint16_t v, std::string* out) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

// Reads a RIFF/WAVE file. Only 16-bit little-endian PCM mono is accepted;
// anything else is reported as a distinct error.
inline AudioBuffer LoadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("wav: cannot open file: " + path);
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("wav: not a RIFF/WAVE container: " + path);
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    std::uint32_t chunk_size = detail::ReadLE32(hdr + 4);
    std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) {
      // Tolerate a truncated final chunk size from sloppy writers.
      chunk_size = static_cast<std::uint32_t>(bytes.size() - body);
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0 && chunk_size >= 16) {
      format = detail::ReadLE16(bytes.data() + body);
      channels = detail::ReadLE16(bytes.data() + body + 2);
      sample_rate = detail::ReadLE32(bytes.data() + body + 4);
      bits = detail::ReadLE16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) {
    throw std::runtime_error("wav: missing fmt/data chunk: " + path);
  }
  if (format != 1) {
    throw std::runtime_error("wav: non-PCM encoding (format tag " +
                             std::to_string(format) + "): " + path);
  }
  if (channels != 1) {
    throw std::runtime_error("wav: expected mono input, got " +
                             std::to_string(channels) + " channels: " + path);
  }
  if (bits != 16) {
    throw std::runtime_error("wav: expected 16-bit samples, got " +
                             std::to_string(bits) + "-bit: " + path);
  }

  AudioBuffer audio;
  audio.sample_rate_hz = static_cast<int>(sample_rate);
  std::size_t n = data_size / 2;
  audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int16_t v = static_cast<std::int16_t>(
        detail::ReadLE16(data + 2 * i));
    audio.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return audio;
}

// Writes 16-bit PCM mono. Samples are clamped to [-1, 1] and rounded to
// the nearest integer code, so load(write(load(f))) is bit-stable.
inline void WriteWav(const std::string& path, const AudioBuffer& audio) {
  std::string out;
  std::uint32_t data_size =
      static_cast<std::uint32_t>(audio.samples.size() * 2);
  out.reserve(44 + data_size);
  out.append("RIFF");
  detail::PutLE32(36 + data_size, &out);
  out.append("WAVE");
  out.append("fmt ");
  detail::PutLE32(16, &out);
  detail::PutLE16(1, &out);  // PCM
  detail::PutLE16(1, &out);  // mono
  detail::PutLE32(static_cast<std::uint32_t>(audio.sample_rate_hz), &out);
  detail::PutLE32(static_cast<std::uint32_t>(audio.sample_rate_hz) * 2, &out);
  detail::PutLE16(2, &out);   // block align
  detail::PutLE16(16, &out);  // bits
  out.append("data");
  detail::PutLE32(data_size, &out);
  for (double s : audio.samples) {
    double clamped = s < -1.0 ? -1.0 : (s > 1.0 ? 1.0 : s);
    long v = std::lround(clamped * 32768.0);
    if (v > 32767) v = 32767;
    if (v < -32768) v = -32768;
    detail::PutLE16(static_cast<std::uint16_t>(static_cast<std::int16_t>(v)),
                    &out);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("wav: cannot open for writing: " + path);
  }
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) {
    throw std::runtime_error("wav: short write: " + path);
  }
}

}  // namespace wws

#endif  // WWS_WAV_HPP_
