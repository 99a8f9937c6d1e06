#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace hsr {

// FNV-1a 64-bit hash, used for seed derivation tags and config hashes.
uint64_t fnv1a64(std::string_view s);

// SplitMix64 step. Used to expand seeds; also usable as a tiny standalone RNG.
uint64_t splitmix64_next(uint64_t& state);

// Derives an independent child seed from a parent seed and a stage tag, so
// pipeline stages can be re-run in isolation with reproducible streams.
uint64_t derive_seed(uint64_t seed, std::string_view tag);

// xoshiro256++ seeded through SplitMix64. This is the single RNG used across
// the library; the algorithm is fixed so integer streams are identical on any
// platform. Floating-point draws additionally depend on the platform's libm
// rounding for log/cos (normal variates), which is stable per platform.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // Unbiased integer in [0, n), n > 0. Rejection sampling on the top bits.
    uint64_t below(uint64_t n);

    // Uniform double in [0, 1), 53 random bits.
    double real();
    double real(double lo, double hi);

    // Standard normal via Box-Muller; the second variate is cached.
    double normal();
    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent generator for a named substream.
    Rng fork(std::string_view tag) const { return Rng(derive_seed(seed_, tag)); }

private:
    uint64_t state_[4];
    uint64_t seed_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace hsr
