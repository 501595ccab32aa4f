#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "loadcast/sampling.hpp"

using namespace loadcast;

namespace {

// all railcar compositions achieving an exact platform total (oracle)
void enumerate_compositions(const std::array<int, kRailcarTypes>& plats_per_type, int type, int left,
                            std::array<int, kRailcarTypes>& cur,
                            std::vector<std::array<int, kRailcarTypes>>& out) {
    if (type == kRailcarTypes) {
        if (left == 0) out.push_back(cur);
        return;
    }
    for (int c = 0; c * plats_per_type[type] <= left; ++c) {
        cur[type] = c;
        enumerate_compositions(plats_per_type, type + 1, left - c * plats_per_type[type], cur, out);
    }
    cur[type] = 0;
}

uint64_t instance_fingerprint(const FullInstance& inst) {
    uint64_t h = 0xCBF29CE484222325ULL;
    auto v = inst.sketch.as_vector();
    h = fnv1a64(v.data(), sizeof(v), h);
    for (const auto& w : inst.weights)
        if (!w.empty()) h = fnv1a64(w.data(), w.size() * sizeof(double), h);
    return h;
}

}  // namespace

TEST_CASE("sample_sketch respects class ranges", "[sampling]") {
    const auto& fleet = default_fleet();
    SECTION("class A") {
        InstanceGenerator gen(fleet, DataClass::standard(ClassTag::A), 42);
        for (int i = 0; i < 500; ++i) {
            auto s = gen.sketch_at(i);
            REQUIRE(s.total_containers() >= 1);
            REQUIRE(s.total_containers() <= 150);
            REQUIRE(s.total_platforms(fleet) >= 1);
            REQUIRE(s.total_platforms(fleet) <= 50);
        }
    }
    SECTION("class D") {
        InstanceGenerator gen(fleet, DataClass::standard(ClassTag::D), 42);
        for (int i = 0; i < 500; ++i) {
            auto s = gen.sketch_at(i);
            REQUIRE(s.total_containers() >= 151);
            REQUIRE(s.total_containers() <= 300);
            REQUIRE(s.total_platforms(fleet) >= 51);
            REQUIRE(s.total_platforms(fleet) <= 100);
        }
    }
}

TEST_CASE("same seed gives identical sketches", "[sampling]") {
    const auto& fleet = default_fleet();
    InstanceGenerator g1(fleet, DataClass::standard(ClassTag::A), 42);
    InstanceGenerator g2(fleet, DataClass::standard(ClassTag::A), 42);
    for (int i = 0; i < 50; ++i) REQUIRE(g1.sketch_at(i) == g2.sketch_at(i));
}

TEST_CASE("railcar composition is uniform over compositions", "[sampling]") {
    const auto& fleet = default_fleet();
    std::array<int, kRailcarTypes> ppt{};
    for (int j = 0; j < kRailcarTypes; ++j)
        ppt[j] = static_cast<int>(fleet.railcar_types[j].platforms.size());

    std::vector<std::array<int, kRailcarTypes>> all;
    std::array<int, kRailcarTypes> cur{};
    enumerate_compositions(ppt, 0, 4, cur, all);
    REQUIRE(all.size() > 5);

    SketchSampler sampler(fleet, DataClass::custom(1, 1, 4, 4));
    std::map<std::array<int, kRailcarTypes>, int> freq;
    const int n = 40000;
    rng::Stream rng(7);
    for (int i = 0; i < n; ++i) {
        auto stream = rng.derive(i);
        auto s = sampler.sample(stream);
        REQUIRE(s.total_platforms(fleet) == 4);
        ++freq[s.railcar_counts];
    }
    REQUIRE(freq.size() == all.size());

    double expected = double(n) / double(all.size());
    double chi2 = 0;
    for (const auto& comp : all) {
        double obs = freq.count(comp) ? freq.at(comp) : 0.0;
        chi2 += (obs - expected) * (obs - expected) / expected;
    }
    // df = |compositions| - 1 = 16; 99.9th percentile ~ 39
    REQUIRE(chi2 < 39.0);

    // literal rejection sampling draws the same distribution
    std::map<std::array<int, kRailcarTypes>, int> rej_freq;
    rng::Stream rrng(8);
    int accepted = 0;
    while (accepted < n) {
        std::array<int, kRailcarTypes> c{};
        int total = 0;
        for (int j = 0; j < kRailcarTypes; ++j) {
            c[j] = static_cast<int>(rrng.uniform_int(0, 4 / ppt[j]));
            total += c[j] * ppt[j];
        }
        if (total != 4) continue;
        ++rej_freq[c];
        ++accepted;
    }
    double chi2_rej = 0;
    for (const auto& comp : all) {
        double obs = rej_freq.count(comp) ? rej_freq.at(comp) : 0.0;
        chi2_rej += (obs - expected) * (obs - expected) / expected;
    }
    REQUIRE(chi2_rej < 39.0);
}

TEST_CASE("unattainable platform ranges are a configuration error", "[sampling]") {
    Fleet fleet = default_fleet();
    // remove all single-platform types so a total of 1 becomes unattainable
    fleet.railcar_types[0].platforms.push_back(fleet.railcar_types[0].platforms[0]);
    fleet.railcar_types[1].platforms.push_back(fleet.railcar_types[1].platforms[0]);
    REQUIRE_THROWS_AS(SketchSampler(fleet, DataClass::custom(1, 10, 1, 1)), ConfigError);
    REQUIRE_NOTHROW(SketchSampler(fleet, DataClass::custom(1, 10, 2, 2)));
}

TEST_CASE("sample_weights follows the three-step recipe", "[sampling]") {
    const auto& fleet = default_fleet();
    InstanceSketch sketch;
    sketch.container_counts = {40, 30};

    SECTION("empty containers weigh their tare") {
        WeightModel m = WeightModel::for_fleet(fleet);
        m.empty_probability_bounds = {{{1.0, 1.0}, {1.0, 1.0}}};
        rng::Stream rng(3);
        auto inst = sample_weights(sketch, m, fleet, rng);
        for (double w : inst.weights[0]) REQUIRE(w == fleet.spec(ContainerLength::L40).tare_kg);
        for (double w : inst.weights[1]) REQUIRE(w == fleet.spec(ContainerLength::L53).tare_kg);
    }
    SECTION("non-empty grosses live in [tare + 0.1 cap, tare + 0.9 cap]") {
        WeightModel m = WeightModel::for_fleet(fleet);
        m.empty_probability_bounds = {{{0.0, 0.0}, {0.0, 0.0}}};
        rng::Stream rng(4);
        auto inst = sample_weights(sketch, m, fleet, rng);
        for (ContainerLength l : kLengths) {
            const auto& spec = fleet.spec(l);
            for (double w : inst.weights[index_of(l)]) {
                REQUIRE(w >= spec.tare_kg + 0.1 * spec.net_capacity_kg);
                REQUIRE(w <= spec.tare_kg + 0.9 * spec.net_capacity_kg);
            }
        }
    }
    SECTION("weight support invariant with default bounds") {
        WeightModel m = WeightModel::for_fleet(fleet);
        REQUIRE(m.empty_probability_bounds[0].first == Catch::Approx(0.05));
        REQUIRE(m.empty_probability_bounds[0].second == Catch::Approx(0.25));
        rng::Stream rng(5);
        for (int i = 0; i < 50; ++i) {
            auto st = rng.derive(i);
            auto inst = sample_weights(sketch, m, fleet, st);
            for (ContainerLength l : kLengths) {
                const auto& spec = fleet.spec(l);
                for (double w : inst.weights[index_of(l)]) {
                    REQUIRE(w >= spec.tare_kg);
                    REQUIRE(w <= spec.tare_kg + 0.9 * spec.net_capacity_kg);
                }
            }
        }
    }
}

TEST_CASE("non-empty load is uniform: Kolmogorov-Smirnov < 0.02 on 10k draws", "[sampling]") {
    const auto& fleet = default_fleet();
    const auto& spec = fleet.spec(ContainerLength::L40);
    InstanceSketch sketch;
    sketch.container_counts = {1, 0};
    WeightModel m = WeightModel::for_fleet(fleet);
    m.empty_probability_bounds = {{{0.0, 0.0}, {0.0, 0.0}}};

    const int n = 10000;
    std::vector<double> loads;
    loads.reserve(n);
    rng::Stream rng(2718);
    for (int i = 0; i < n; ++i) {
        auto st = rng.derive(i);
        auto inst = sample_weights(sketch, m, fleet, st);
        loads.push_back(inst.weights[0][0] - spec.tare_kg);
    }
    std::sort(loads.begin(), loads.end());
    double lo = 0.1 * spec.net_capacity_kg, hi = 0.9 * spec.net_capacity_kg;
    double ks = 0;
    for (int i = 0; i < n; ++i) {
        double f = (loads[i] - lo) / (hi - lo);
        ks = std::max(ks, std::abs(f - double(i) / n));
        ks = std::max(ks, std::abs(f - double(i + 1) / n));
    }
    REQUIRE(ks < 0.02);
}

TEST_CASE("generate_1S basics", "[sampling]") {
    const auto& fleet = default_fleet();
    SECTION("n = 0 gives an empty stream") {
        REQUIRE(generate_1S(0, DataClass::standard(ClassTag::A), fleet, 1).empty());
    }
    SECTION("1000 class-A instances, all in range, all distinct") {
        auto insts = generate_1S(1000, DataClass::standard(ClassTag::A), fleet, 1);
        REQUIRE(insts.size() == 1000);
        std::set<uint64_t> prints;
        auto cls = DataClass::standard(ClassTag::A);
        for (const auto& inst : insts) {
            REQUIRE(cls.contains(inst.sketch, fleet));
            prints.insert(instance_fingerprint(inst));
        }
        REQUIRE(prints.size() == 1000);
    }
    SECTION("per-index determinism regardless of access order") {
        InstanceGenerator gen(fleet, DataClass::standard(ClassTag::A), 99);
        auto direct = gen.instance_at(5);
        (void)gen.instance_at(2);
        (void)gen.instance_at(9);
        auto again = gen.instance_at(5);
        REQUIRE(instance_fingerprint(direct) == instance_fingerprint(again));
    }
}

TEST_CASE("generate_2S cohorts share sketches", "[sampling]") {
    const auto& fleet = default_fleet();
    SECTION("k = 1 wraps single instances") {
        auto cohorts = generate_2S(5, 1, DataClass::standard(ClassTag::A), fleet, 3);
        REQUIRE(cohorts.size() == 5);
        for (const auto& c : cohorts) {
            REQUIRE(c.members.size() == 1);
            REQUIRE(c.members[0].sketch == c.sketch);
        }
    }
    SECTION("10 cohorts x 100 members") {
        auto cohorts = generate_2S(10, 100, DataClass::standard(ClassTag::A), fleet, 3);
        size_t total = 0;
        for (const auto& c : cohorts) {
            total += c.members.size();
            for (const auto& m : c.members) REQUIRE(m.sketch == c.sketch);
        }
        REQUIRE(total == 1000);
    }
    SECTION("k < 1 rejected") {
        REQUIRE_THROWS_AS(generate_2S(1, 0, DataClass::standard(ClassTag::A), fleet, 3),
                          InvalidInputError);
    }
}

TEST_CASE("aggregate_railcar_inputs takes per-type lower medians", "[sampling]") {
    const auto& base = default_fleet();
    std::map<int, std::vector<RailcarObservation>> raw;
    for (int id = 1; id <= 10; ++id) raw[id] = {{50000, 12000}};

    SECTION("constant observations pass through") {
        auto fleet = aggregate_railcar_inputs(base, raw);
        for (const auto& t : fleet.railcar_types)
            for (const auto& p : t.platforms) {
                REQUIRE(p.capacity_kg == 50000);
                REQUIRE(p.tare_kg == 12000);
            }
    }
    SECTION("odd count takes the middle value") {
        raw[3] = {{10000, 1000}, {20000, 2000}, {30000, 3000}};
        auto fleet = aggregate_railcar_inputs(base, raw);
        REQUIRE(fleet.type(3).platforms[0].capacity_kg == 20000);
        REQUIRE(fleet.type(3).platforms[0].tare_kg == 2000);
    }
    SECTION("even count takes the lower median, matching a sort oracle") {
        std::vector<double> vals{30000, 10000, 40000, 20000};
        raw[7].clear();
        for (double v : vals) raw[7].push_back({v, v / 10});
        auto fleet = aggregate_railcar_inputs(base, raw);

        std::sort(vals.begin(), vals.end());
        double oracle = vals[(vals.size() - 1) / 2];
        REQUIRE(oracle == 20000);
        REQUIRE(fleet.type(7).platforms[0].capacity_kg == oracle);
    }
    SECTION("missing observations are a configuration error") {
        raw.erase(5);
        REQUIRE_THROWS_AS(aggregate_railcar_inputs(base, raw), ConfigError);
    }
}
