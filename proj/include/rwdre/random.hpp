#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace rwdre {

// SplitMix64 finalizer. Used both as the engine step and as a seed mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent child seed from a parent seed and a list of labels.
// All per-site, per-block and per-replica streams in the library come from here,
// so a stream's content never depends on the order in which streams are opened.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) noexcept {
    std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ULL);
    for (std::uint64_t label : labels) {
        h = mix64(h ^ mix64(label + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

inline std::uint64_t site_label(std::int64_t x) noexcept { return static_cast<std::uint64_t>(x); }

// Uniform in [0,1) from the top 53 bits.
inline double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based uniform: a pure function of its seed and labels.
inline double hashed_uniform(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) noexcept {
    return to_unit(derive_seed(seed, labels));
}

// SplitMix64 generator. Satisfies UniformRandomBitGenerator. The distribution
// helpers are written out here rather than taken from <random> because the
// standard distributions are implementation-defined, and replay must be
// bit-identical across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    double uniform() noexcept { return to_unit((*this)()); }

    // Exp(rate); +inf when rate is zero.
    double exponential(double rate) noexcept {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log1p(-uniform()) / rate;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    std::uint64_t state_;
};

}  // namespace rwdre
