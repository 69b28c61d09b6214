#pragma once

#include <cstdint>

namespace upmp {

/// SplitMix64 (Steele, Lea, Flood). Fully described by one 64-bit word, so
/// generator positions can be checkpointed and reproduced on any platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound). Plain modulo reduction; the bias is below
    /// 2^-50 for the bounds used here and keeps the draw order trivial to port.
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

    /// Uniform double in [0, 1) from the top 53 bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    [[nodiscard]] std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace upmp
