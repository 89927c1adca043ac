#pragma once

#include <cmath>
#include <cstdint>

namespace swave::rng {

/// SplitMix64 finalizer: bijective avalanche mix of a 64-bit word.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Combine key material into a stream key (order-sensitive).
inline std::uint64_t combine_key(std::uint64_t key, std::uint64_t word) {
    return mix64(key + kGolden + word);
}

/// Counter-based uniform generator: draw i of a keyed stream is a pure
/// function of (key, i), so streams are reproducible under any scheduling
/// and random-accessible. Equivalent to SplitMix64 seeded with `key`.
struct CounterRng {
    std::uint64_t key = 0;

    std::uint64_t bits(std::uint64_t i) const { return mix64(key + (i + 1) * kGolden); }

    /// Uniform double in (0, 1]; never 0, so log() is safe.
    double uniform(std::uint64_t i) const {
        return static_cast<double>((bits(i) >> 11) + 1) * 0x1.0p-53;
    }
};

/// Sequential standard-normal stream over a counter generator (Box-Muller,
/// one uniform pair per normal pair; consumption is position-based).
class NormalStream {
public:
    explicit NormalStream(CounterRng gen) : gen_(gen) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = gen_.uniform(pos_++);
        const double u2 = gen_.uniform(pos_++);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    CounterRng gen_;
    std::uint64_t pos_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace swave::rng
