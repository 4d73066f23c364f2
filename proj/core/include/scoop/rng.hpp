#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace scoop {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Counter-based stream: the value depends only on the key tuple, never on call order.
constexpr std::uint64_t keyed_u64(std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = 0x243F6A8885A308D3ull;
    for (auto k : keys) h = splitmix64(h ^ splitmix64(k));
    return h;
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double keyed_uniform(std::initializer_list<std::uint64_t> keys) noexcept {
    return to_unit(keyed_u64(keys));
}

/// FNV-1a, used for stable digests of canonical serializations.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace scoop
