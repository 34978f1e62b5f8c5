#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace pf {

// Bad user input (files, dimensions, config). CLI maps this to exit code 2.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// External scorer failed (crash, malformed output). CLI maps this to exit code 3.
struct ScorerError : std::runtime_error {
    explicit ScorerError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariant. CLI maps this to exit code 4.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

#define PF_CHECK(cond, msg)                                        \
    do {                                                           \
        if (!(cond)) throw ::pf::InputError(std::string(msg));     \
    } while (0)

#define PF_ASSERT(cond, msg)                                       \
    do {                                                           \
        if (!(cond))                                               \
            throw ::pf::InternalError(std::string("assertion failed: ") + (msg)); \
    } while (0)

// splitmix64; used to derive independent seeds (per candidate, per level, ...).
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// 64-bit FNV-1a; used for content hashes recorded in reports.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a_str(const std::string& s, uint64_t h = 0xcbf29ce484222325ull) {
    return fnv1a(s.data(), s.size(), h);
}

// Deterministic RNG. mt19937_64 output is pinned by the standard, and the
// bounded draw below is hand-rolled (Lemire rejection) so sequences never
// depend on the platform's distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : eng_(seed) {}

    uint64_t next() { return eng_(); }

    // uniform in [0, n)
    uint64_t below(uint64_t n) {
        if (n == 0) throw InternalError("Rng::below(0)");
        uint64_t mask = ~uint64_t(0);
        if (n & (n - 1)) {
            uint64_t bound = mask - mask % n;
            uint64_t v;
            do {
                v = eng_();
            } while (v >= bound);
            return v % n;
        }
        return eng_() & (n - 1);
    }

    // uniform integer in [lo, hi]
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace pf
