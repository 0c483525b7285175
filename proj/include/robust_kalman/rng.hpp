#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace robust_kalman {

/// splitmix64 finalizer; bijective avalanche on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

/// Counter-based random stream: variate i is a pure function of
/// (seed, stream_id, i), so independently seeded streams can run on any
/// thread without reordering randomness.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
        : base_(mix64(seed + kGolden) ^ mix64(stream_id + kStreamSalt)),
          seed_(seed),
          stream_id_(stream_id) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix64(base_ + counter_ * kGolden);
    }

    /// Uniform in [0, 1), 53 mantissa bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (cosine branch; two uniforms per draw).
    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Exponential(1).
    double exponential() noexcept { return -std::log(1.0 - uniform()); }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;

    std::uint64_t base_;
    std::uint64_t counter_ = 0;
    std::uint64_t seed_;
    std::uint64_t stream_id_;
};

}  // namespace robust_kalman
