#include "core/rng.hpp"

namespace opinn {

namespace {

// FNV-1a over the stream name.
std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::string_view name) {
    return splitmix64(seed ^ fnv1a(name));
}

std::mt19937_64 make_stream(std::uint64_t seed, std::string_view name) {
    return std::mt19937_64(stream_seed(seed, name));
}

}  // namespace opinn
