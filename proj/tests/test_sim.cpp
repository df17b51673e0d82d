#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "stopspa/dp.hpp"
#include "stopspa/sim.hpp"

using namespace stopspa;

TEST_CASE("immediate stop") {
    const auto m = fixtures::wsc();
    RandomStream rng(1);
    const auto t = simulate_path(m, 0.5, 0.7, 200, rng);
    REQUIRE(t.stop_index);
    CHECK(*t.stop_index == 0);
    CHECK(t.discounted_reward == doctest::Approx(8 * 0.3));
    CHECK(t.states.size() == 1);
}

TEST_CASE("never stopping sums the geometric series") {
    const auto m = fixtures::wsc();
    RandomStream rng(2);
    for (std::size_t n : {0u, 1u, 10u, 200u}) {
        const auto t = simulate_path(m, 1.0, 0.0, n, rng);
        CHECK_FALSE(t.stop_index);
        CHECK_FALSE(t.died);
        CHECK(t.states.size() == n + 1);
        CHECK(t.discounted_reward == doctest::Approx(0.5 * (1 - std::pow(0.97, n + 1)) / 0.03));
    }
}

TEST_CASE("death ends the path with no reward") {
    const auto m = fixtures::wsc(0.97, 0.6);
    RandomStream rng(3);
    const auto t = simulate_path(m, 1.0, 0.61, 50, rng);
    CHECK(t.died);
    CHECK(t.discounted_reward == 0.0);
}

TEST_CASE("replications are reproducible across worker counts") {
    const auto m = fixtures::wsc();
    const RandomStreamFactory f(20240101);
    const auto a = simulate_replications(m, 0.5, 0.0, 200, 5000, f, 1);
    const auto b = simulate_replications(m, 0.5, 0.0, 200, 5000, f, 4);
    const auto c = simulate_replications(m, 0.5, 0.0, 200, 5000, f, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].v_n == b[i].v_n);
        CHECK(a[i].stop_index == b[i].stop_index);
        CHECK(a[i].v_n == c[i].v_n);
    }
    auto r0 = f.stream(0);
    auto r0b = f.stream(0);
    const auto p = simulate_path(m, 0.5, 0.0, 200, r0);
    const auto q = simulate_path(m, 0.5, 0.0, 200, r0b);
    CHECK(p.states == q.states);
    auto r1 = f.stream(1);
    CHECK(simulate_path(m, 0.5, 0.0, 200, r1).states != p.states);
}

TEST_CASE("path rewards are bounded and grow with the horizon") {
    const auto m = fixtures::wsc();
    const RandomStreamFactory f(8);
    for (std::size_t i = 0; i < 200; ++i) {
        double prev = -1.0;
        for (std::size_t n : {0u, 1u, 2u, 5u, 20u, 200u}) {
            auto rng = f.stream(i);
            const double v = simulate_path(m, 0.9, 0.0, n, rng).discounted_reward;
            CHECK(v <= m.value_bound());
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("monotone coupling in theta") {
    const auto m = fixtures::wsc();
    const RandomStreamFactory f(77);
    for (std::size_t i = 0; i < 500; ++i) {
        auto a = f.stream(i);
        auto b = f.stream(i);
        const auto lo = simulate_path(m, 0.4, 0.0, 200, a);
        const auto hi = simulate_path(m, 0.6, 0.0, 200, b);
        REQUIRE(lo.stop_index);
        const std::size_t M = *lo.stop_index;
        REQUIRE(hi.states.size() >= M + 1);
        for (std::size_t k = 0; k <= M; ++k) CHECK(lo.states[k] == hi.states[k]);
        if (hi.stop_index) CHECK(*hi.stop_index >= M);
    }
}

TEST_CASE("estimate_value edge cases") {
    const auto m = fixtures::wsc();
    const RandomStreamFactory f(4);
    const auto e = estimate_value(m, 0.0, 0.25, 200, 100, f);
    CHECK(e.mean == doctest::Approx(6.0));
    CHECK(e.se == 0.0);
    CHECK(e.truncation_bound == doctest::Approx(std::pow(0.97, 201) * 8 / 0.03));
    CHECK_THROWS_AS(estimate_value(m, 0.5, 0.0, 200, 1, f), std::invalid_argument);
    CHECK_THROWS_AS(estimate_value(m, 0.5, -0.5, 200, 10, f), std::domain_error);
}

TEST_CASE("Monte Carlo value agrees with the grid evaluation") {
    const auto m = fixtures::wsc();
    const RandomStreamFactory f(31337);
    const auto e = estimate_value(m, 0.5, 0.0, 200, 1000000, f);
    const double pv = policy_value(m, 0.5, 0.0, uniform_grid(m, 1025)).value;
    CHECK(std::abs(e.mean - pv) <= 3 * e.se);
    CHECK(e.se < 5e-3);
}
