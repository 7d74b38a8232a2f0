#pragma once

#include <cstdint>
#include <random>

namespace sdprop {

// Seedable RNG with fully specified stream semantics so sampled outputs are
// bit-reproducible across platforms. The engine is std::mt19937_64 (its output
// sequence is pinned by the standard); bounded draws use classic unbiased
// rejection instead of std::uniform_int_distribution, whose mapping is
// implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0, bound), bound >= 1.
    uint64_t bounded(uint64_t bound) {
        const uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = eng_();
            if (r >= threshold)
                return r % bound;
        }
    }

    // Uniform in [0, 1) with 53 bits.
    double unit() { return double(eng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 eng_;
};

} // namespace sdprop
