#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cvdsim {

/// Throws InvalidParameterError unless `probs` is non-negative and sums to 1
/// within 1e-9.
void check_probability_vector(std::span<const double> probs);

/// Inverse standard-normal CDF on (0, 1) (Wichura's AS241 rational
/// approximation, accurate to ~1e-16 relative).
double normal_quantile(double p);

/// Deterministic, stream-splittable pseudo-random source.
///
/// Every generation stage owns its own stream, identified by
/// (master_seed, stage_tag). Identical pairs reproduce the identical draw
/// sequence across runs and platforms; distinct tags give statistically
/// independent streams. The core generator is xoshiro256++ seeded through
/// SplitMix64 from the master seed mixed with an FNV-1a hash of the tag.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::string_view stage_tag);

    std::uint64_t master_seed() const { return master_seed_; }
    const std::string& stage_tag() const { return stage_tag_; }

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_uniform();

    /// Uniform double in (0, 1), both endpoints excluded.
    double next_uniform_open();

    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t next_below(std::uint64_t bound);

    /// One N(mean, sd) draw via inverse-CDF; sd = 0 returns mean exactly.
    double next_normal(double mean, double sd);

    /// n i.i.d. N(mean, sd) draws. Negative sd is an InvalidParameterError.
    std::vector<double> normal(double mean, double sd, std::size_t n);

    /// One categorical index draw; `probs` must already be validated.
    std::size_t next_categorical(std::span<const double> probs);

    /// n categorical index draws with validation of `probs`.
    std::vector<std::size_t> categorical(std::span<const double> probs, std::size_t n);

    /// One Bernoulli(p) bit per entry of `p`; each p must lie in [0, 1].
    std::vector<std::uint8_t> bernoulli(std::span<const double> p);

    /// Seed-deterministic uniformly random permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::uint64_t master_seed_;
    std::string stage_tag_;
    std::uint64_t state_[4];
};

/// Spec-level alias: derive the stage stream for (master_seed, stage_tag).
inline RngStream derive_stream(std::uint64_t master_seed, std::string_view stage_tag) {
    return RngStream(master_seed, stage_tag);
}

}  // namespace cvdsim
