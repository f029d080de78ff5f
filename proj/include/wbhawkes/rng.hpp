#pragma once

#include <cmath>
#include <cstdint>

namespace wbhawkes {

// Splittable deterministic RNG built on the splitmix64 mixer.
//
// Streams are keyed by (seed, stream id), so any unit of work (a simulated
// sequence, a parameter draw) owns an independent stream whose output does
// not depend on scheduling order. Uniform/exponential transforms are done
// by hand so that output bytes do not depend on the standard library's
// distribution implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Exponential with the given rate; rate must be positive.
    double next_exponential(double rate) { return -std::log1p(-next_unit()) / rate; }

private:
    std::uint64_t state_;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

// Key of an independent stream derived from a master seed and stream id.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return detail::mix64(seed ^ detail::mix64(stream + 0x632be59bd9b4e019ULL));
}

inline SplitMix64 rng_stream(std::uint64_t seed, std::uint64_t stream) {
    return SplitMix64(derive_seed(seed, stream));
}

} // namespace wbhawkes
