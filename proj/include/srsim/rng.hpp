#pragma once

#include <cmath>
#include <cstdint>

namespace srsim {

/// Mixing finalizer of the SplitMix64 generator. Used both for the stream
/// itself and for deriving per-configuration seeds, so any configuration of
/// an ensemble can be regenerated in isolation from (master_seed, index).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// seed_i = mix64(master_seed + (i + 1) * 0x9E3779B97F4A7C15)
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    return mix64(master_seed + (index + 1) * 0x9E3779B97F4A7C15ull);
}

/// SplitMix64 stream. Chosen over std::mt19937 + std::normal_distribution
/// because the standard distributions are implementation-defined; this
/// stream produces identical output on every platform and is simple enough
/// to replicate outside C++.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Standard-normal draws via Box-Muller on a SplitMix64 stream.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u in (0, 1] so the log is finite
        const double u = 1.0 - rng_.next_double();
        const double v = rng_.next_double();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    SplitMix64& uniform_stream() { return rng_; }

private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}
