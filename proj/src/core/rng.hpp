#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace opinn {

// All randomness in the pipeline flows from a single experiment seed through
// named sub-streams (graph, init-opinions, noise, weights, batching, ...), so
// that changing one component does not perturb the streams of the others.
std::mt19937_64 make_stream(std::uint64_t seed, std::string_view name);

// Stable 64-bit mix of (seed, name) used to derive sub-stream seeds.
std::uint64_t stream_seed(std::uint64_t seed, std::string_view name);

}  // namespace opinn
