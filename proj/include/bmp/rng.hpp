#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// ============================================================================
// Counter-based RNG (Philox4x32-10). A stream is keyed by (seed, stream id),
// so replicate r of a run with seed s always sees the same draw sequence, no
// matter how replicates are scheduled across workers. Verified against the
// published known-answer vectors.
// ============================================================================

namespace bmp::rng {

struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
            const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
            ctr = Counter{static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                          static_cast<std::uint32_t>(p1),
                          static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                          static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }
};

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint32_t next_u32() {
        if (word_ == 4) refill();
        return buffer_[word_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform on (0, 1), 53-bit resolution, never exactly 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    /// Exponential with rate 1.
    double exponential() { return -std::log(uniform()); }

private:
    void refill() {
        buffer_ = Philox4x32::block(
            {static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
             static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32)},
            {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
        ++block_;
        word_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int word_ = 4;
};

/// Stream ids reserved for non-replicate draws (probe vectors and the like);
/// replicate r of an estimator uses stream id r.
inline constexpr std::uint64_t kAuxStreamBase = 0x8000000000000000ull;

}  // namespace bmp::rng
