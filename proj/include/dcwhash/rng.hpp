// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dcwhash {

using Rng = std::mt19937_64;

// Independent generator for one purpose ("init", "prior", "batch", ...).
// Every random draw in the toolkit comes from a stream derived from a single
// user seed, so reordering one consumer never perturbs another.
Rng make_stream(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0);

}  // namespace dcwhash
