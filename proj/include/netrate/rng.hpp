#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace netrate {

// SplitMix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Named substreams derived from one master seed. Every source of randomness
/// in the tool draws from its own substream, so results do not depend on the
/// order or parallelism of the consuming code.
class SeedSequence {
public:
    explicit SeedSequence(std::uint64_t master) : master_(master) {}

    std::uint64_t master() const { return master_; }

    std::uint64_t stream(std::string_view name) const {
        return mix64(master_ ^ fnv1a(name));
    }

    std::uint64_t stream(std::string_view name, std::uint64_t index) const {
        return mix64(stream(name) + 0x632be59bd9b4e019ULL * (index + 1));
    }

    /// Derived sequence for a sub-component (e.g. one replication).
    SeedSequence child(std::string_view name, std::uint64_t index) const {
        return SeedSequence(stream(name, index));
    }

private:
    std::uint64_t master_;
};

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

}  // namespace netrate
