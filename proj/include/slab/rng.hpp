#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based random numbers (Philox4x32-10, Salmon et al., SC 2011).
//
// Every random quantity in the library is addressed by a 96-bit stream id
// plus a draw index inside the stream, all keyed by the 64-bit master seed.
// Stream ids encode (trial, group, worker) or (trial, purpose tag), so any
// draw can be reproduced independently of evaluation order or thread count.

namespace slab {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) noexcept {
    constexpr std::uint64_t kMul0 = 0xD2511F53u;
    constexpr std::uint64_t kMul1 = 0xCD9E8D57u;
    const std::uint64_t p0 = kMul0 * ctr[0];
    const std::uint64_t p1 = kMul1 * ctr[2];
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

} // namespace detail

/// One 10-round Philox4x32 block: 128-bit counter, 64-bit key -> 128 bits.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(counter, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return counter;
}

/// SplitMix64 finalizer; used to derive sub-seeds from (seed, id) pairs.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
    return mix64(seed ^ mix64(a ^ mix64(b)));
}

/// A single logical substream: counter = [draw, lane0, lane1, lane2],
/// key = master seed. Distinct lanes never overlap.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t lane0, std::uint32_t lane1,
               std::uint32_t lane2) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          lanes_{lane0, lane1, lane2} {}

    std::uint64_t next_u64() noexcept {
        if (buffered_ == 0) {
            const auto out = philox4x32({draw_, lanes_[0], lanes_[1], lanes_[2]}, key_);
            ++draw_;
            buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
            buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
            buffered_ = 2;
        }
        return buf_[--buffered_];
    }

    /// Uniform on the open interval (0, 1); never returns an endpoint.
    double next_unit() noexcept {
        const double mantissa = static_cast<double>(next_u64() >> 11) + 0.5;
        return mantissa * 0x1.0p-53;
    }

    /// Inverse-CDF exponential draw; strictly positive and finite.
    double next_exponential(double rate) noexcept {
        return -std::log(next_unit()) / rate;
    }

    /// Uniform on [0, bound). Unbiased via rejection of the wrap region.
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    double next_uniform(double low, double high) noexcept {
        return low + (high - low) * next_unit();
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 3> lanes_;
    std::uint32_t draw_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int buffered_ = 0;
};

/// Purpose tags kept in the top byte of lane1 so that different uses of the
/// same (trial, group, worker) coordinates stay on disjoint streams.
namespace stream_tag {
inline constexpr std::uint32_t completion_times = 1u << 24;
inline constexpr std::uint32_t product_placement = 2u << 24;
inline constexpr std::uint32_t generator_coeffs = 3u << 24;
inline constexpr std::uint32_t system_draw = 4u << 24;
} // namespace stream_tag

} // namespace slab
