#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "loadcast/rng.hpp"
#include "loadcast/solver.hpp"

using namespace loadcast;

namespace {

FullInstance make_instance(const std::array<int, kRailcarTypes>& cars,
                           std::vector<double> w40, std::vector<double> w53) {
    FullInstance inst;
    inst.sketch.railcar_counts = cars;
    inst.sketch.container_counts = {static_cast<int>(w40.size()), static_cast<int>(w53.size())};
    inst.weights[0] = std::move(w40);
    inst.weights[1] = std::move(w53);
    return inst;
}

// random instance within the brute-force oracle range
FullInstance random_tiny_instance(rng::Stream& rng, const Fleet& fleet, int max_platforms = 4,
                                  int max_containers = 8) {
    std::array<int, kRailcarTypes> cars{};
    int plats = 0;
    for (int tries = 0; tries < 100; ++tries) {
        int j = static_cast<int>(rng.next_below(kRailcarTypes));
        int p = static_cast<int>(fleet.railcar_types[j].platforms.size());
        if (plats + p > max_platforms) continue;
        if (rng.next_below(2) == 0 && plats > 0) break;
        ++cars[j];
        plats += p;
    }
    int n = static_cast<int>(rng.next_below(static_cast<uint64_t>(max_containers) + 1));
    std::vector<double> w40, w53;
    for (int i = 0; i < n; ++i) {
        bool is40 = rng.next_below(2) == 0;
        const auto& spec = fleet.spec(is40 ? ContainerLength::L40 : ContainerLength::L53);
        double gross = spec.tare_kg + rng.uniform_real(0, 0.9 * spec.net_capacity_kg);
        (is40 ? w40 : w53).push_back(gross);
    }
    return make_instance(cars, std::move(w40), std::move(w53));
}

bool same_solution(const DetailedSolution& a, const DetailedSolution& b) {
    if (!(a.objective == b.objective)) return false;
    if (a.loaded_per_length != b.loaded_per_length || a.used_railcars != b.used_railcars) return false;
    for (int t = 0; t < kRailcarTypes; ++t) {
        if (a.railcars[t].size() != b.railcars[t].size()) return false;
        for (size_t c = 0; c < a.railcars[t].size(); ++c) {
            const auto& pa = a.railcars[t][c].platforms;
            const auto& pb = b.railcars[t][c].platforms;
            if (pa.size() != pb.size()) return false;
            for (size_t i = 0; i < pa.size(); ++i)
                if (pa[i].pattern_index != pb[i].pattern_index ||
                    pa[i].bottom_container != pb[i].bottom_container ||
                    pa[i].top_container != pb[i].top_container)
                    return false;
        }
    }
    return true;
}

int total_slots_of_used(const DetailedSolution& sol, const Fleet& fleet) {
    int total = 0;
    for (int t = 0; t < kRailcarTypes; ++t)
        total += sol.used_railcars[t] * fleet.railcar_types[t].slot_count();
    return total;
}

}  // namespace

TEST_CASE("zero containers solve to the all-zero solution", "[solver]") {
    const auto& fleet = default_fleet();
    auto inst = make_instance({2, 1, 0, 0, 1, 0, 0, 0, 0, 0}, {}, {});
    auto sol = solve_lpp(inst, fleet);
    REQUIRE(sol.objective == LexObjective{0, 0, 0});
    REQUIRE(sol.loaded_per_length == std::array<int, 2>{0, 0});
    REQUIRE(sol.used_railcars == std::array<int, kRailcarTypes>{});
    REQUIRE(verify_solution(inst, fleet, sol));
}

TEST_CASE("single 53 ft platform loads both containers: objective (2, 53, 93)", "[solver]") {
    const auto& fleet = default_fleet();
    auto inst = make_instance({0, 1, 0, 0, 0, 0, 0, 0, 0, 0}, {9000.0}, {10000.0});
    auto sol = solve_lpp(inst, fleet);
    REQUIRE(sol.objective == LexObjective{2, 53, 93});
    REQUIRE(verify_solution(inst, fleet, sol));

    auto oracle = brute_force_lpp(inst, fleet);
    REQUIRE(oracle.objective == LexObjective{2, 53, 93});
    REQUIRE(same_solution(sol, oracle));
}

TEST_CASE("brute force on the empty instance", "[solver]") {
    const auto& fleet = default_fleet();
    auto inst = make_instance({}, {}, {});
    auto sol = brute_force_lpp(inst, fleet);
    REQUIRE(sol.objective == LexObjective{0, 0, 0});
}

TEST_CASE("brute force refuses instances over the size cap", "[solver]") {
    const auto& fleet = default_fleet();
    auto inst = make_instance({0, 0, 0, 0, 0, 0, 0, 0, 2, 0}, {}, {});  // 10 platforms
    REQUIRE_THROWS_AS(brute_force_lpp(inst, fleet), SizeCapError);
}

TEST_CASE("overweight tops leave top slots empty", "[solver]") {
    const auto& fleet = default_fleet();
    // type 3: two 40 ft platforms, 53-capable tops; top weight cap is
    // 11000 * 2.6 / 1.8 = 15889 kg, so 20 t boxes can ride bottom only
    auto heavy = 20000.0;
    SECTION("three heavy boxes: only the two bottoms load") {
        auto inst = make_instance({0, 0, 1, 0, 0, 0, 0, 0, 0, 0}, {heavy, heavy, heavy}, {});
        auto sol = solve_lpp(inst, fleet);
        REQUIRE(sol.objective == LexObjective{2, 80, 80});
        REQUIRE(same_solution(sol, brute_force_lpp(inst, fleet)));
    }
    SECTION("two heavy plus one light: light box tops off") {
        auto inst = make_instance({0, 0, 1, 0, 0, 0, 0, 0, 0, 0}, {heavy, heavy, 8000.0}, {});
        auto sol = solve_lpp(inst, fleet);
        REQUIRE(sol.objective == LexObjective{3, 80, 120});
        // the light box sits on top of a heavy one
        for (const auto& pl : sol.railcars[2][0].platforms)
            if (pl.top_container >= 0) REQUIRE(pl.top_container == 2);
        REQUIRE(same_solution(sol, brute_force_lpp(inst, fleet)));
    }
}

TEST_CASE("solver matches the brute-force oracle on random tiny instances", "[solver]") {
    const auto& fleet = default_fleet();
    rng::Stream rng(20240601);
    int nontrivial = 0;
    for (int iter = 0; iter < 250; ++iter) {
        auto stream = rng.derive(iter);
        auto inst = random_tiny_instance(stream, fleet);
        INFO("iter " << iter);
        auto sol = solve_lpp(inst, fleet);
        auto oracle = brute_force_lpp(inst, fleet);
        REQUIRE(sol.objective == oracle.objective);
        REQUIRE(same_solution(sol, oracle));
        REQUIRE(verify_solution(inst, fleet, sol));
        if (sol.objective.loaded_containers > 0) ++nontrivial;
    }
    REQUIRE(nontrivial > 100);
}

TEST_CASE("repeated solves are identical", "[solver]") {
    const auto& fleet = default_fleet();
    rng::Stream rng(77);
    auto inst = random_tiny_instance(rng, fleet, 8, 14);
    auto a = solve_lpp(inst, fleet);
    auto b = solve_lpp(inst, fleet);
    REQUIRE(same_solution(a, b));
}

TEST_CASE("monotonicity: more cars never load less, fewer boxes never load more", "[solver]") {
    const auto& fleet = default_fleet();
    rng::Stream rng(31337);
    for (int iter = 0; iter < 60; ++iter) {
        auto stream = rng.derive(iter);
        auto inst = random_tiny_instance(stream, fleet, 4, 6);
        auto base = solve_lpp(inst, fleet).objective.loaded_containers;

        auto more = inst;
        ++more.sketch.railcar_counts[0];
        REQUIRE(solve_lpp(more, fleet).objective.loaded_containers >= base);

        if (inst.sketch.container_counts[0] > 0) {
            auto fewer = inst;
            fewer.weights[0].pop_back();
            --fewer.sketch.container_counts[0];
            REQUIRE(solve_lpp(fewer, fleet).objective.loaded_containers <= base);
        }
    }
}

TEST_CASE("loaded containers never exceed the slots of used railcars", "[solver]") {
    const auto& fleet = default_fleet();
    rng::Stream rng(414);
    for (int iter = 0; iter < 60; ++iter) {
        auto stream = rng.derive(iter);
        auto inst = random_tiny_instance(stream, fleet, 6, 10);
        auto sol = solve_lpp(inst, fleet);
        REQUIRE(sol.objective.loaded_containers <= total_slots_of_used(sol, fleet));
    }
}

TEST_CASE("scalarization orders triples exactly like the lexicographic rule", "[solver]") {
    const auto& fleet = default_fleet();
    InstanceSketch sketch;
    sketch.railcar_counts = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
    sketch.container_counts = {4, 4};
    int64_t m = scalarization_constant(sketch, fleet);

    rng::Stream rng(5150);
    int max_len = 40 + 53 + 80;
    for (int i = 0; i < 20000; ++i) {
        LexObjective a{static_cast<int>(rng.next_below(9)), static_cast<int>(rng.next_below(max_len + 1)),
                       static_cast<int>(rng.next_below(8 * 53 + 1))};
        LexObjective b{static_cast<int>(rng.next_below(9)), static_cast<int>(rng.next_below(max_len + 1)),
                       static_cast<int>(rng.next_below(8 * 53 + 1))};
        bool lex = lex_better(a, b);
        bool scal = lex_scalarize(a, m) > lex_scalarize(b, m);
        REQUIRE(lex == scal);
    }
}

TEST_CASE("verify_solution rejects tampered solutions", "[solver]") {
    const auto& fleet = default_fleet();
    auto inst = make_instance({0, 1, 0, 0, 0, 0, 0, 0, 0, 0}, {9000.0, 9500.0}, {});
    auto sol = solve_lpp(inst, fleet);
    REQUIRE(sol.objective.loaded_containers == 2);
    REQUIRE(verify_solution(inst, fleet, sol));

    SECTION("container assigned twice") {
        auto bad = sol;
        auto& pl = bad.railcars[1][0].platforms[0];
        pl.top_container = pl.bottom_container;
        REQUIRE_FALSE(verify_solution(inst, fleet, bad));
    }
    SECTION("platform over capacity by 1 kg") {
        // bottom-only load at exactly the platform capacity is feasible;
        // one extra kilogram on the instance weight flips it
        auto cap = fleet.type(2).platforms[0].capacity_kg;
        auto exact = make_instance({0, 1, 0, 0, 0, 0, 0, 0, 0, 0}, {cap}, {});
        auto good = solve_lpp(exact, fleet);
        REQUIRE(good.objective.loaded_containers == 1);
        REQUIRE(verify_solution(exact, fleet, good));
        auto heavier = exact;
        heavier.weights[0][0] = cap + 1;
        REQUIRE_FALSE(verify_solution(heavier, fleet, good));
    }
    SECTION("objective tampering") {
        auto bad = sol;
        bad.objective.loaded_containers = 1;
        REQUIRE_FALSE(verify_solution(inst, fleet, bad));
    }
}

TEST_CASE("gap mode stays within the stated gap and 0 gap is exact", "[solver]") {
    const auto& fleet = default_fleet();
    rng::Stream rng(808);
    for (int iter = 0; iter < 30; ++iter) {
        auto stream = rng.derive(iter);
        auto inst = random_tiny_instance(stream, fleet, 4, 8);
        auto exact = solve_lpp(inst, fleet);
        auto zero_gap = solve_lpp(inst, fleet, SolverConfig{0.0, std::nullopt});
        REQUIRE(same_solution(exact, zero_gap));

        SolverConfig relaxed{0.05, std::nullopt};
        auto approx = solve_lpp(inst, fleet, relaxed);
        REQUIRE(verify_solution(inst, fleet, approx));
        int64_t m = scalarization_constant(inst.sketch, fleet);
        double s_exact = static_cast<double>(lex_scalarize(exact.objective, m));
        double s_approx = static_cast<double>(lex_scalarize(approx.objective, m));
        REQUIRE(s_approx >= (1.0 - relaxed.gap) * s_exact - 1e-6);
    }
}

TEST_CASE("node limit returns a flagged feasible solution", "[solver]") {
    const auto& fleet = default_fleet();
    rng::Stream rng(9091);
    auto inst = random_tiny_instance(rng, fleet, 8, 16);
    SolverConfig limited{0.0, uint64_t{3}};
    SolveInfo info;
    auto sol = solve_lpp(inst, fleet, limited, &info);
    REQUIRE_FALSE(sol.proven_optimal);
    REQUIRE(info.nodes >= 3);
    REQUIRE(verify_solution(inst, fleet, sol));
}

TEST_CASE("inconsistent instances are rejected", "[solver]") {
    const auto& fleet = default_fleet();
    auto inst = make_instance({1, 0, 0, 0, 0, 0, 0, 0, 0, 0}, {9000.0}, {});
    inst.sketch.container_counts[0] = 2;  // weights vector has one entry
    REQUIRE_THROWS_AS(solve_lpp(inst, fleet), InvalidInputError);
}
