#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace loadcast::rng {

namespace detail {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
constexpr uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}
}  // namespace detail

// Small counter-style generator with cheap substream derivation.
//
// Every instance is a pure function of (seed, derivation path), so datasets
// can be generated per-index in any order and on any number of workers while
// staying byte-identical. The standard <random> distributions are not used
// anywhere because their output is implementation-defined.
class Stream {
public:
    explicit Stream(uint64_t seed) : state_(detail::mix(seed + detail::kGolden)) {}

    // Independent substream keyed by (a, b); fold-in style derivation.
    Stream derive(uint64_t a, uint64_t b = 0) const {
        uint64_t s = state_;
        s = detail::mix(s + detail::kGolden + a);
        s = detail::mix(s + detail::kGolden + b);
        return Stream(s, tag{});
    }

    uint64_t next_u64() {
        state_ += detail::kGolden;
        return detail::mix(state_);
    }

    // [0, 1) with 53 random bits
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // unbiased integer in [0, n), n > 0 (Lemire rejection)
    uint64_t next_below(uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    // unbiased value in [0, n), n > 0, for 128-bit bounds (composition DP)
    unsigned __int128 next_u128_below(unsigned __int128 n) {
        if (n <= ~uint64_t{0}) return next_below(static_cast<uint64_t>(n));
        // top limb via rejection, low limb uniform
        while (true) {
            unsigned __int128 x = (static_cast<unsigned __int128>(next_u64()) << 64) | next_u64();
            // rejection zone keeps the draw unbiased
            unsigned __int128 limit = ~static_cast<unsigned __int128>(0);
            unsigned __int128 usable = limit - limit % n;
            if (x < usable || usable == 0) return x % n;
        }
    }

    // inclusive bounds
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(next_below(static_cast<uint64_t>(hi - lo) + 1));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = next_below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    struct tag {};
    Stream(uint64_t raw_state, tag) : state_(raw_state) {}
    uint64_t state_;
};

}  // namespace loadcast::rng
