#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace nrpp {

/// Philox4x32-10 counter-based block function.
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                                         std::array<std::uint32_t, 2> key) noexcept;

/// Identifies one independent random stream: the key is the master seed, the
/// stream index occupies the upper half of the Philox counter. Two streams with
/// different indices never share a counter value.
struct RngStream {
    std::uint64_t master_seed{0};
    std::uint64_t stream_index{0};

    [[nodiscard]] RngStream offset(std::uint64_t delta) const noexcept {
        return {master_seed, stream_index + delta};
    }
};

/// Stream-index layout used by the experiment harness. Trajectory j of
/// replicate r at the k-th sample size lives at base + j.
namespace streams {
inline constexpr std::uint64_t kTrajectoryBits = 24;
inline constexpr std::uint64_t kReplicateBits = 24;
inline constexpr std::uint64_t kLimitDomain = std::uint64_t{1} << 63;

[[nodiscard]] constexpr std::uint64_t replicate_base(std::uint64_t n_index, std::uint64_t replicate) noexcept {
    return (n_index << (kTrajectoryBits + kReplicateBits)) | (replicate << kTrajectoryBits);
}
[[nodiscard]] constexpr std::uint64_t limit_draw(std::uint64_t draw) noexcept { return kLimitDomain | draw; }
} // namespace streams

/// UniformRandomBitGenerator over a single RngStream. Consecutive 128-bit
/// blocks are produced by incrementing the lower half of the counter.
class CounterEngine {
public:
    using result_type = std::uint32_t;

    explicit CounterEngine(RngStream stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform double in [0,1) with 53 random bits.
    [[nodiscard]] double uniform() noexcept;
    /// Uniform double in (0,1).
    [[nodiscard]] double uniform_open() noexcept;
    /// Exponential variate with the given rate.
    [[nodiscard]] double exponential(double rate) noexcept;
    /// Standard normal variate.
    [[nodiscard]] double normal();

    [[nodiscard]] const RngStream& stream() const noexcept { return stream_; }

private:
    void refill() noexcept;

    RngStream stream_;
    std::uint64_t block_{0};
    std::array<std::uint32_t, 4> buffer_{};
    int used_{4};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace nrpp
