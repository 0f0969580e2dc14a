#pragma once
// Seeded, build-stable random streams.
//
// Every random decision in the pipeline draws from an RngStream keyed by
// (master_seed, stage_label, index). The key derivation and the generator are
// fixed here and never delegate to <random> distributions, whose outputs are
// implementation-defined.
//
//   key    = mix(mix(master_seed ^ fnv1a64(stage_label)) + index * GOLDEN)
//   next() = mix(key + (++counter) * GOLDEN)        (SplitMix64 finalizer)

#include <cstdint>
#include <string_view>

namespace lunaforge {

std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::string_view stage_label,
              std::uint64_t index = 0) noexcept;

    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() noexcept;
    /// Uniform in the open interval (0, 1).
    double uniform01_open() noexcept;
    double uniform(double lo, double hi) noexcept;
    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n) noexcept;

    /// Standard normal via the Marsaglia polar method.
    double normal() noexcept;
    double normal(double mean, double sigma) noexcept { return mean + sigma * normal(); }

    /// Poisson variate; inversion for small means, PTRS transformed
    /// rejection (Hoermann 1993) for mean >= 10.
    std::uint64_t poisson(double mean) noexcept;

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lunaforge
