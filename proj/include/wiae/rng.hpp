#pragma once

#include <cstdint>
#include <vector>

namespace wiae {

/// Counter-based splittable random generator.
///
/// Output i of a stream is a pure function of (key, i), so substreams derived
/// with split() are reproducible and independent of the order in which other
/// streams are consumed. The mixer is the SplitMix64 finalizer.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : key_(mix(seed ^ kKeyTweak)) {}

    /// Derives an independent child stream. Deterministic in (parent key, label).
    SplitRng split(std::uint64_t label) const {
        return SplitRng(FromKey{}, mix(key_ ^ mix(label + kSplitTweak)));
    }

    SplitRng split(std::uint64_t label_a, std::uint64_t label_b) const {
        return split(label_a).split(label_b);
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Uniform integer on [0, n). n must be > 0.
    std::uint64_t next_index(std::uint64_t n) {
        // Rejection-free 128-bit scaling; bias is negligible for n << 2^64.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    std::vector<double> uniform_vector(std::size_t n, double lo, double hi) {
        std::vector<double> out(n);
        for (auto& v : out) v = next_uniform(lo, hi);
        return out;
    }

private:
    struct FromKey {};
    SplitRng(FromKey, std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kKeyTweak = 0xD1B54A32D192ED03ull;
    static constexpr std::uint64_t kSplitTweak = 0x8CB92BA72F3D8DD7ull;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace wiae
