#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace wavelab {

/// SplitMix64: tiny, fast, and fully portable across platforms/compilers,
/// which is why it is used here instead of std:: distributions (their output
/// is implementation-defined and would break byte-level reproducibility).
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in the open interval (0, 1).
    double next_unit() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }
};

/// Combine a seed with a small integer into a fresh, well-mixed seed.
inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t extra) {
    SplitMix64 g(seed ^ (0xD1B54A32D192ED03ULL * (extra + 1)));
    g.next();
    return g.next();
}

/// FNV-1a over raw bytes; used for content hashes in manifests.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xCBF29CE484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(std::string_view s) {
    return fnv1a(s.data(), s.size());
}

/// Named sub-stream seed: every consumer of randomness derives its own seed
/// from (master seed, role, index) so adding a consumer never shifts another
/// consumer's stream.
inline std::uint64_t subseed(std::uint64_t master, std::string_view role,
                             std::uint64_t index = 0) {
    return hash_combine(hash_combine(master, fnv1a(role)), index);
}

/// i-th standard normal draw of the stream identified by `seed`.
/// Box-Muller on two SplitMix64 uniforms; random access by index.
inline double standard_normal(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 g(hash_combine(seed, index));
    double u1 = g.next_unit();
    double u2 = g.next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace wavelab
