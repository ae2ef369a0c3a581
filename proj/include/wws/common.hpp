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

#ifndef WWS_COMMON_HPP_
#define WWS_COMMON_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace wws {

inline constexpr const char* kVersion = "0.1.0";

// Label used for the non-wake-word class everywhere: manifests, decisions,
// references, reports.
inline constexpr int kFillerLabel = -1;

// FNV-1a 64-bit; used for config hashing and stage stamps.
inline std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string HexU64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Number of Unicode scalar values in a UTF-8 string (continuation bytes
// are not counted). Wake-word lengths are defined this way so multi-byte
// scripts count characters, not bytes.
inline std::size_t Utf8Length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xc0) != 0x80) ++n;
  }
  return n;
}

}  // namespace wws

#endif  // WWS_COMMON_HPP_
