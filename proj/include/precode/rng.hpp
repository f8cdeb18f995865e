#ifndef PRECODE_RNG_HPP
#define PRECODE_RNG_HPP

#include <cstdint>
#include <random>

#include "precode/types.hpp"

namespace precode {

/// Counter-addressed random stream. A stream is identified by a (seed, path)
/// pair where the path is a short list of counters (snr index, trial index,
/// ...). Streams addressed by distinct paths are independent regardless of
/// which worker draws from them, which keeps parallel Monte Carlo runs
/// reproducible.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(mix(seed ^ kPhi)) {}

    /// Derive a child stream; children with different counters never collide.
    RngStream substream(std::uint64_t counter) const {
        RngStream child(0);
        child.state_ = mix(state_ ^ mix(counter + kPhi));
        return child;
    }
    RngStream substream(std::uint64_t c0, std::uint64_t c1) const {
        return substream(c0).substream(c1);
    }

    std::uint64_t next_u64() {
        // splitmix64 step
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform in (0, 1] (never exactly 0, safe for log()).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (no cached spare, fully deterministic).
    double next_normal() {
        double u1 = next_uniform();
        double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    /// Circular complex Gaussian with E|z|^2 = var.
    cplx next_cnormal(double var = 1.0) {
        double u1 = next_uniform();
        double u2 = next_uniform();
        double r = std::sqrt(-var * std::log(u1));
        return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
    }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // 128-bit multiply rejection-free mapping; bias < 2^-64, irrelevant here
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    static constexpr std::uint64_t kPhi = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace precode

#endif
