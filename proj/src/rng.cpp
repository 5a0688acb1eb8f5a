#include "sqz/rng.hpp"

namespace sqz::rng {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t tag(std::string_view name) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t component, std::uint64_t block) {
    return mix(mix(mix(seed) ^ component) ^ block);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view component, std::uint64_t block) {
    return derive_seed(seed, tag(component), block);
}

} // namespace sqz::rng
