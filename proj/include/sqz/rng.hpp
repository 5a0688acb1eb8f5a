#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sqz::rng {

/// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t x);

/// Stable 64-bit tag for a component name (FNV-1a).
std::uint64_t tag(std::string_view name);

/// Sub-seed for (seed, component, block). Depends on nothing else, so
/// streams are the same whatever order or thread count generates them.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t component, std::uint64_t block = 0);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view component, std::uint64_t block = 0);

using Engine = std::mt19937_64;

} // namespace sqz::rng
