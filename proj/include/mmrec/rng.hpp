#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace mmrec {

// Deterministic, platform-independent RNG. std::uniform_int_distribution and
// std::shuffle are implementation-defined, which would break byte-identical
// replay across toolchains, so sampling is done by hand on top of splitmix64.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, n) via rejection sampling. n must be > 0.
    uint64_t below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

private:
    uint64_t state_;
};

template <typename T>
void shuffle_vec(std::vector<T>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives an independent stream seed from a base seed and a salt.
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    Rng r(seed ^ (salt * 0x9e3779b97f4a7c15ULL));
    return r.next();
}

} // namespace mmrec
