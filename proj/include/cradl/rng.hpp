#pragma once

#include <cstdint>
#include <initializer_list>
#include <algorithm>
#include <random>
#include <string_view>
#include <vector>

namespace cradl {

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed of the independent stream labelled (seed, tag, keys...).
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::string_view tag,
                                    std::initializer_list<std::uint64_t> keys = {}) {
    std::uint64_t s = mix64(seed ^ mix64(hash_tag(tag)));
    for (std::uint64_t k : keys) s = mix64(s ^ mix64(k + 0x632be59bd9b4e019ULL));
    return s;
}

inline Rng make_rng(std::uint64_t seed, std::string_view tag,
                    std::initializer_list<std::uint64_t> keys = {}) {
    return Rng(stream_seed(seed, tag, keys));
}

/// Uniform k-subset of {0..n-1}, returned in ascending order.
inline std::vector<std::size_t> sample_subset(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace cradl
