#pragma once

#include <cstdint>
#include <cstring>
#include <random>

namespace pcdecomp {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for an independent substream `stream` of `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, double key) noexcept {
    std::uint64_t bits = 0;
    static_assert(sizeof(bits) == sizeof(key));
    std::memcpy(&bits, &key, sizeof(bits));
    return derive_seed(master, bits);
}

} // namespace pcdecomp
