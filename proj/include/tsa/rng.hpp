#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace tsa {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based stream: output n is a keyed hash of n, so any position is
// reproducible and streams with distinct keys never share state.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream() = default;
    explicit Stream(std::uint64_t key) : key_(mix64(key)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix64(key_ ^ mix64(ctr_++)); }

    Stream derive(std::uint64_t sub) const { return Stream(key_ ^ mix64(sub * 0x632be59bd9b4e019ULL + 1)); }

    // uniform on (0, 1)
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    bool bit() { return ((*this)() >> 63) != 0; }

    double normal() {
        double u1 = uniform(), u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // standard normal conditioned on [lo, hi], by rejection
    double truncated_normal(double lo, double hi) {
        for (;;) {
            double x = normal();
            if (x >= lo && x <= hi) return x;
        }
    }

    std::uint64_t counter() const { return ctr_; }
    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_ = mix64(0);
    std::uint64_t ctr_ = 0;
};

// sub-stream ids used across modules
enum StreamId : std::uint64_t {
    kDelta = 1,
    kDeltaTilde = 2,
    kNoise = 3,
    kTruth = 4,
    kInit = 5,
    kSensor = 6,
};

inline Stream replicate_stream(std::uint64_t base_seed, std::uint64_t scenario_hash, std::uint64_t replicate) {
    return Stream(mix64(base_seed ^ replicate) ^ scenario_hash);
}

}  // namespace tsa
