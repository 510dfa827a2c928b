#pragma once

#include <cstdint>

namespace lorentz {

/// Mix two 64-bit words into one; used to derive per-task seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// xoshiro256** with splitmix64 seeding. Every draw is defined by the
/// integer state, so streams are identical across platforms and builds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;
    Rng(std::uint64_t seed, std::uint64_t stream) noexcept : Rng(mix_seed(seed, stream)) {}

    std::uint64_t next() noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n) noexcept;
    double normal() noexcept;

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lorentz
