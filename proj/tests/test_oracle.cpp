#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>
#include <sstream>

#include "vrpqaoa/oracle.hpp"

using namespace vrpqaoa;

namespace {

// Naive reference: no Gray code, no incremental updates.  Slow but
// unarguable; used to vouch for the sweep at 12 variables.
template <class Model>
std::pair<double, std::vector<std::uint64_t>> naive_ground_state(const Model& model, int num_vars) {
    auto energy_of = [&](std::uint64_t z) {
        if constexpr (std::is_same_v<Model, QuboModel>)
            return qubo_energy(model, z);
        else
            return ising_energy(model, z);
    };
    double best = energy_of(0);
    for (std::uint64_t z = 1; z < (std::uint64_t{1} << num_vars); ++z) best = std::min(best, energy_of(z));
    std::vector<std::uint64_t> argmin;
    for (std::uint64_t z = 0; z < (std::uint64_t{1} << num_vars); ++z)
        if (energy_of(z) <= best + 1e-9) argmin.push_back(z);
    return {best, argmin};
}

ProblemInstance random_instance(int n, int k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> weight(0.5, 100.0);
    std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) w[static_cast<std::size_t>(i) * n + j] = weight(rng);
    return ProblemInstance(n, k, std::move(w));
}

}  // namespace

TEST_CASE("exhaustive ground state", "[oracle]") {
    auto d1 = preset_instance("vrp-4-2");

    SECTION("matches a naive full scan") {
        auto m = build_qubo(d1, 437.0);
        auto report = exhaustive_ground_state(m);
        auto [naive_min, naive_argmin] = naive_ground_state(m, m.num_vars);
        CHECK_THAT(report.minimum, Catch::Matchers::WithinAbs(naive_min, 1e-9));
        CHECK(report.argmin == naive_argmin);

        auto ising = qubo_to_ising(m);
        auto ising_report = exhaustive_ground_state(ising);
        auto [ising_min, ising_argmin] = naive_ground_state(ising, ising.num_spins);
        CHECK_THAT(ising_report.minimum, Catch::Matchers::WithinAbs(ising_min, 1e-9));
        CHECK(ising_report.argmin == ising_argmin);
    }

    SECTION("first-instance optimum: two mirrored route sets") {
        auto report = exhaustive_ground_state(build_qubo(d1, 437.0), d1);
        CHECK_THAT(report.minimum, Catch::Matchers::WithinAbs(124.871, 1e-3));
        CHECK(report.argmin == std::vector<std::uint64_t>{779, 2125});
        REQUIRE(report.argmin_classes.size() == 2);
        CHECK(report.argmin_classes[0] == RouteClass::route_feasible);
        CHECK(report.argmin_classes[1] == RouteClass::route_feasible);
        for (double e : report.argmin_energies) CHECK_THAT(e, Catch::Matchers::WithinAbs(report.minimum, 1e-9));
    }

    SECTION("third-instance optimum decodes to the published adjacency") {
        auto d4 = preset_instance("vrp-5-3");
        auto report = exhaustive_ground_state(build_qubo(d4, 86.0), d4);
        CHECK_THAT(report.minimum, Catch::Matchers::WithinAbs(30.530, 1e-3));
        REQUIRE(report.argmin == std::vector<std::uint64_t>{69963, 74014});
        auto cls = classify(Configuration(5, 69963), d4);
        REQUIRE(cls.cls == RouteClass::route_feasible);
        REQUIRE(cls.routes.size() == 3);
        CHECK(cls.routes[0] == std::vector<int>{0, 1, 3});
        CHECK(cls.routes[1] == std::vector<int>{0, 2});
        CHECK(cls.routes[2] == std::vector<int>{0, 4});
    }

    SECTION("qubo and ising sweeps agree at 20 variables") {
        auto d2 = preset_instance("vrp-5-2");
        auto m = build_qubo(d2, d2.default_penalty());
        auto qr = exhaustive_ground_state(m);
        auto ir = exhaustive_ground_state(qubo_to_ising(m));
        CHECK_THAT(qr.minimum, Catch::Matchers::WithinAbs(ir.minimum, 1e-6));
        CHECK(qr.argmin == ir.argmin);
    }

    SECTION("zero weights leave exactly the degree-feasible set at energy zero") {
        ProblemInstance flat(4, 2, std::vector<double>(16, 0.0));
        auto report = exhaustive_ground_state(build_qubo(flat, 50.0), flat);
        CHECK_THAT(report.minimum, Catch::Matchers::WithinAbs(0.0, 1e-9));
        std::vector<std::uint64_t> feasible;
        for (std::uint64_t z = 0; z < (1u << 12); ++z)
            if (classify(Configuration(4, z), flat).cls != RouteClass::degree_infeasible) feasible.push_back(z);
        CHECK(report.argmin == feasible);
        for (auto cls : report.argmin_classes) CHECK(cls != RouteClass::degree_infeasible);
    }

    SECTION("histogram covers all assignments") {
        auto m = build_qubo(d1, 437.0);
        auto report = exhaustive_ground_state(m, 32);
        REQUIRE(report.histogram.size() == 32);
        std::size_t total = 0;
        for (auto c : report.histogram) total += c;
        CHECK(total == (1u << 12));
        CHECK(report.histogram_low <= report.minimum + 1e-9);
        CHECK(report.histogram_high >= report.histogram_low);
        CHECK(report.histogram[0] > 0);  // the ground state lands in the lowest bucket
    }

    SECTION("resource guard") {
        QuboModel wide;
        wide.num_vars = 25;
        wide.linear.assign(25, 0.0);
        wide.quadratic.assign(25 * 25, 0.0);
        CHECK_THROWS_AS(exhaustive_ground_state(wide), resource_error);
        QuboModel empty;
        CHECK_THROWS_AS(exhaustive_ground_state(empty), std::domain_error);
    }

    SECTION("instance/model width mismatch is rejected") {
        auto m = build_qubo(d1, 437.0);
        CHECK_THROWS_AS(exhaustive_ground_state(m, preset_instance("vrp-5-2")), std::domain_error);
    }
}

TEST_CASE("incremental flip deltas agree with direct evaluation", "[oracle]") {
    auto d2 = preset_instance("vrp-5-2");
    auto m = build_qubo(d2, d2.default_penalty());
    auto ising = qubo_to_ising(m);
    detail::QuboFlipDelta qdelta(m);
    detail::IsingFlipDelta idelta(ising);

    std::mt19937_64 rng(555);
    std::uniform_int_distribution<std::uint64_t> zdist(0, (1u << 20) - 1);
    std::uniform_int_distribution<int> bdist(0, 19);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::uint64_t z = zdist(rng);
        const int bit = bdist(rng);
        const std::uint64_t flipped = z ^ (std::uint64_t{1} << bit);
        REQUIRE_THAT(qdelta(z, bit), Catch::Matchers::WithinAbs(qubo_energy(m, flipped) - qubo_energy(m, z), 1e-8));
        REQUIRE_THAT(idelta(z, bit),
                     Catch::Matchers::WithinAbs(ising_energy(ising, flipped) - ising_energy(ising, z), 1e-8));
    }
}

TEST_CASE("optimal routes", "[oracle]") {
    SECTION("first instance: optimum and its mirror") {
        auto sol = optimal_routes(preset_instance("vrp-4-2"));
        CHECK_THAT(sol.cost, Catch::Matchers::WithinAbs(124.871, 1e-3));
        REQUIRE(sol.route_sets.size() == 2);
        CHECK(sol.route_sets[0] == std::vector<std::vector<int>>{{0, 1}, {0, 2, 3}});
        CHECK(sol.route_sets[1] == std::vector<std::vector<int>>{{0, 1}, {0, 3, 2}});
        CHECK(sol.configurations == std::vector<std::uint64_t>{779, 2125});
    }

    SECTION("second instance: route optimum the encoding should have found") {
        auto sol = optimal_routes(preset_instance("vrp-5-2"));
        CHECK_THAT(sol.cost, Catch::Matchers::WithinAbs(138.511, 1e-3));
        const std::vector<std::vector<int>> expected{{0, 1}, {0, 3, 2, 4}};
        CHECK(std::find(sol.route_sets.begin(), sol.route_sets.end(), expected) != sol.route_sets.end());
    }

    SECTION("third instance matches the exhaustive sweep") {
        auto d4 = preset_instance("vrp-5-3");
        auto sol = optimal_routes(d4);
        CHECK_THAT(sol.cost, Catch::Matchers::WithinAbs(30.530, 1e-3));
        CHECK(sol.configurations == std::vector<std::uint64_t>{69963, 74014});
    }

    SECTION("k = n-1 forces single-stop round trips") {
        auto d1 = preset_instance("vrp-4-2");
        ProblemInstance star(4, 3, std::vector<double>(d1.weights()));
        auto sol = optimal_routes(star);
        double expected = 0.0;
        for (int i = 1; i < 4; ++i) expected += star.weight(0, i) + star.weight(i, 0);
        CHECK_THAT(sol.cost, Catch::Matchers::WithinAbs(expected, 1e-9));
        REQUIRE(sol.route_sets.size() == 1);
        CHECK(sol.route_sets[0] == std::vector<std::vector<int>>{{0, 1}, {0, 2}, {0, 3}});

        std::mt19937_64 rng(99);
        auto inst = random_instance(5, 4, rng);
        expected = 0.0;
        for (int i = 1; i < 5; ++i) expected += inst.weight(0, i) + inst.weight(i, 0);
        CHECK_THAT(optimal_routes(inst).cost, Catch::Matchers::WithinAbs(expected, 1e-9));
    }

    SECTION("nine nodes enumerate without 64-bit indices") {
        std::vector<double> w(81, 0.0);
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 9; ++j)
                if (i != j) w[static_cast<std::size_t>(i) * 9 + j] = 1.0 + 0.01 * i + 0.17 * j;
        auto sol = optimal_routes(ProblemInstance(9, 2, std::move(w)));
        REQUIRE(!sol.route_sets.empty());
        CHECK(sol.configurations.empty());
        for (const auto& routes : sol.route_sets) {
            REQUIRE(routes.size() == 2);
            for (const auto& r : routes) CHECK(r.front() == 0);
        }
    }

    SECTION("factorial guard") {
        CHECK_THROWS_AS(optimal_routes(ProblemInstance(10, 1, std::vector<double>(100, 0.0))), resource_error);
    }
}

TEST_CASE("degree-feasible minimum", "[oracle]") {
    SECTION("second instance: the subtour undercut") {
        auto d2 = preset_instance("vrp-5-2");
        auto dfm = degree_feasible_minimum(d2);
        CHECK_THAT(dfm.cost, Catch::Matchers::WithinAbs(128.545, 1e-3));
        bool found_subtour = false;
        for (std::uint64_t z : dfm.argmin) {
            auto cls = classify(Configuration(5, z), d2);
            CHECK(cls.cls != RouteClass::degree_infeasible);
            if (cls.cls == RouteClass::degree_feasible_with_subtour && cls.subtours ==
                std::vector<std::vector<int>>{{2, 3}})
                found_subtour = true;
        }
        CHECK(found_subtour);

        // the gap the encoding cannot see
        CHECK(dfm.cost < optimal_routes(d2).cost - 1e-6);
    }

    SECTION("first instance: no subtour beats the route optimum") {
        auto d1 = preset_instance("vrp-4-2");
        auto dfm = degree_feasible_minimum(d1);
        CHECK_THAT(dfm.cost, Catch::Matchers::WithinAbs(124.871, 1e-3));
        CHECK(dfm.argmin == std::vector<std::uint64_t>{779, 2125});
    }

    SECTION("zero weights floor at zero") {
        CHECK(degree_feasible_minimum(ProblemInstance(4, 2, std::vector<double>(16, 0.0))).cost == 0.0);
    }

    SECTION("route optimum never undercuts the degree-feasible optimum") {
        std::mt19937_64 rng(13);
        for (int trial = 0; trial < 12; ++trial) {
            const int n = trial % 2 ? 4 : 5;
            std::uniform_int_distribution<int> kdist(1, n - 2);
            auto inst = random_instance(n, kdist(rng), rng);
            CAPTURE(trial);
            CHECK(optimal_routes(inst).cost >= degree_feasible_minimum(inst).cost - 1e-9);
        }
    }

    SECTION("ground state of the penalized model sits on the degree-feasible optimum") {
        for (const auto& name : preset_names()) {
            auto inst = preset_instance(name);
            auto report = exhaustive_ground_state(build_qubo(inst, inst.default_penalty()), inst);
            auto dfm = degree_feasible_minimum(inst);
            CAPTURE(name);
            CHECK_THAT(report.minimum, Catch::Matchers::WithinAbs(dfm.cost, 1e-6));
            CHECK(report.argmin == dfm.argmin);
            for (auto cls : report.argmin_classes) CHECK(cls != RouteClass::degree_infeasible);
        }
    }
}

TEST_CASE("ground-state report rendering", "[oracle]") {
    auto d1 = preset_instance("vrp-4-2");
    auto report = exhaustive_ground_state(build_qubo(d1, 437.0), d1, 8);

    std::ostringstream plain, decorated, again;
    write_ground_state_report(plain, report);
    write_ground_state_report(decorated, report, d1);
    write_ground_state_report(again, report, d1);

    CHECK(decorated.str() == again.str());
    CHECK(plain.str().find("minimum 124.8") != std::string::npos);
    CHECK(plain.str().find("argmin 2") != std::string::npos);
    CHECK(decorated.str().find("779 energy") != std::string::npos);
    CHECK(decorated.str().find("class route-feasible") != std::string::npos);
    CHECK(decorated.str().find("route 0 1 0") != std::string::npos);
    CHECK(decorated.str().find("histogram 8") != std::string::npos);

    auto d2 = preset_instance("vrp-5-2");
    auto subtour_state = exhaustive_ground_state(build_qubo(d2, d2.default_penalty()), d2);
    std::ostringstream sub;
    write_ground_state_report(sub, subtour_state, d2);
    CHECK(sub.str().find("subtour 2 3") != std::string::npos);
}
