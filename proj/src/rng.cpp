// SPDX-License-Identifier: Apache-2.0
#include "dcwhash/rng.hpp"

namespace dcwhash {
namespace {

// FNV-1a, 64-bit.
std::uint64_t hash_purpose(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::string_view purpose, std::uint64_t index) {
  const std::uint64_t tag = hash_purpose(purpose);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

}  // namespace dcwhash
