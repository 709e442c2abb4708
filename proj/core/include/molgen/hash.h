//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_HASH_H_
#define MOLGEN_HASH_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace molgen {
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// 64-bit FNV-1a, resumable through `state`.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t state = kFnvOffset) {
  for (char c: bytes) {
    state ^= static_cast<std::uint8_t>(c);
    state *= kFnvPrime;
  }
  return state;
}

inline std::uint64_t fnv1a64(std::span<const std::byte> bytes,
                             std::uint64_t state = kFnvOffset) {
  for (std::byte b: bytes) {
    state ^= static_cast<std::uint8_t>(b);
    state *= kFnvPrime;
  }
  return state;
}
}  // namespace molgen

#endif  // MOLGEN_HASH_H_
