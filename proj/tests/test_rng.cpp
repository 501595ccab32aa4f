#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "loadcast/rng.hpp"

using loadcast::rng::Stream;

TEST_CASE("streams are deterministic and derivation is order-free", "[rng]") {
    Stream a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Stream base(7);
    auto s1 = base.derive(3, 1);
    auto s2 = base.derive(3, 1);
    REQUIRE(s1.next_u64() == s2.next_u64());

    // deriving never mutates the parent
    Stream p(9);
    (void)p.derive(1);
    (void)p.derive(2);
    Stream q(9);
    REQUIRE(p.next_u64() == q.next_u64());
}

TEST_CASE("substreams with different keys diverge", "[rng]") {
    Stream base(1234);
    std::set<uint64_t> firsts;
    for (uint64_t i = 0; i < 1000; ++i) firsts.insert(base.derive(i).next_u64());
    REQUIRE(firsts.size() == 1000);
}

TEST_CASE("next_below is unbiased over small ranges", "[rng]") {
    Stream s(5);
    std::array<int, 7> hist{};
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++hist[s.next_below(7)];
    for (int c : hist) {
        REQUIRE(c > n / 7 - 600);
        REQUIRE(c < n / 7 + 600);
    }
}

TEST_CASE("uniform doubles land in [0,1) with sane mean", "[rng]") {
    Stream s(99);
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double x = s.next_double();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    REQUIRE(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("uniform_int covers inclusive bounds", "[rng]") {
    Stream s(11);
    bool saw_lo = false, saw_hi = false;
    for (int i = 0; i < 1000; ++i) {
        auto v = s.uniform_int(-3, 3);
        REQUIRE(v >= -3);
        REQUIRE(v <= 3);
        saw_lo |= v == -3;
        saw_hi |= v == 3;
    }
    REQUIRE(saw_lo);
    REQUIRE(saw_hi);
}
