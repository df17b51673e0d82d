#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "stopspa/model.hpp"

using namespace stopspa;

TEST_CASE("stage rewards") {
    const auto m = fixtures::wsc();
    CHECK(stage_reward(m, 0.5, Action::transplant) == doctest::Approx(4.0));
    CHECK(stage_reward(m, 0.3, Action::wait) == doctest::Approx(0.5));
    CHECK(stage_reward(m, 1.0, Action::wait) == 0.0);
    CHECK(stage_reward(m, 1.0, Action::transplant) == 0.0);

    const auto d = fixtures::wsc(0.97, 0.9);
    CHECK(stage_reward(d, 0.9, Action::wait) == 0.0);
    CHECK(stage_reward(d, 0.95, Action::transplant) == 0.0);
    CHECK(stage_reward(d, 0.89, Action::wait) == doctest::Approx(0.5));
    CHECK(d.has_death_region());
    CHECK_FALSE(m.has_death_region());
}

TEST_CASE("control limit policy") {
    const ControlLimitPolicy p(0.5);
    CHECK(policy_action(p, 0.49) == Action::wait);
    CHECK(policy_action(p, 0.5) == Action::transplant);
    CHECK(policy_action(p, 0.5) == policy_action(p, 0.5));
    const ControlLimitPolicy zero(0.0);
    for (double h : linspace(0.0, 1.0, 11)) CHECK(policy_action(zero, h) == Action::transplant);

    bool seen = false;
    for (double h : linspace(0.0, 1.0, 1001)) {
        if (p.action(h) == Action::transplant) seen = true;
        else CHECK_FALSE(seen);
    }
    CHECK(std::string(to_string(Action::wait)) == "WAIT");
}

TEST_CASE("model validation") {
    auto c = RewardFunction::constant(0.5);
    auto r = RewardFunction::linear_decreasing(8, 8);
    auto k = make_kernel("uniform-deterioration");
    CHECK_THROWS_AS(StoppingModel(1.0, 1.0, c, r, k), std::invalid_argument);
    CHECK_THROWS_AS(StoppingModel(1.0, 0.0, c, r, k), std::invalid_argument);
    CHECK_THROWS_AS(StoppingModel(0.0, 0.9, c, r, k), std::invalid_argument);
    CHECK_THROWS_AS(StoppingModel(1.1, 0.9, c, r, k), std::invalid_argument);
    CHECK_THROWS_AS(StoppingModel(1.0, 0.9, c, r, nullptr), std::invalid_argument);
    const auto m = fixtures::wsc();
    CHECK(m.value_bound() == doctest::Approx(8.0 / 0.03));
}

TEST_CASE("reward functions") {
    const auto lin = RewardFunction::linear_decreasing(8, 8);
    CHECK(lin(0.25) == doctest::Approx(6.0));
    CHECK(lin(1.0) == 0.0);
    const auto tab = RewardFunction::tabulated({0.0, 0.5, 1.0}, {4.0, 2.0, 1.0});
    CHECK(tab(0.25) == doctest::Approx(3.0));
    CHECK(tab(0.75) == doctest::Approx(1.5));
    CHECK(tab(-1.0) == 4.0);
    CHECK(tab(2.0) == 1.0);
    CHECK_THROWS_AS(RewardFunction::tabulated({0.5, 0.2}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(RewardFunction::tabulated({0.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(RewardFunction::constant(-1.0), std::invalid_argument);
}

TEST_CASE("assumptions on the uniform example") {
    const auto m = fixtures::wsc();
    const auto rep = check_assumptions(m, assumption_grid(m));
    CHECK(rep.get("A1").pass);
    CHECK(rep.get("A2").pass);
    CHECK(rep.get("A3").pass);
    CHECK_FALSE(rep.get("A4").applicable);
    CHECK_FALSE(rep.get("A5").applicable);
    CHECK(rep.all_pass());
    CHECK(rep.ifr.pass);
}

TEST_CASE("increasing transplant reward fails A1 with a witness") {
    StoppingModel m(1.0, 0.97, RewardFunction::constant(0.5), RewardFunction::tabulated({0.0, 1.0}, {0.0, 1.0}),
                    make_kernel("uniform-deterioration"));
    const auto rep = check_assumptions(m, assumption_grid(m));
    const auto& a1 = rep.get("A1");
    CHECK_FALSE(a1.pass);
    REQUIRE(a1.witness.size() == 2);
    CHECK(a1.witness[0] < a1.witness[1]);
    CHECK(m.transplant_reward(a1.witness[0]) < m.transplant_reward(a1.witness[1]));
    CHECK_FALSE(rep.all_pass());
}

TEST_CASE("short-sighted discounting fails A5") {
    const auto m = fixtures::wsc(0.01, 0.9);
    const auto rep = check_assumptions(m, assumption_grid(m));
    CHECK(rep.get("A5").applicable);
    CHECK_FALSE(rep.get("A5").pass);
    CHECK(rep.get("A1").pass);
}

TEST_CASE("non-IFR kernel fails A3") {
    StoppingModel m(1.0, 0.9, RewardFunction::constant(0.5), RewardFunction::linear_decreasing(8, 8),
                    make_kernel("uniform-improving"));
    const auto rep = check_assumptions(m, assumption_grid(m));
    CHECK_FALSE(rep.get("A3").pass);
}

TEST_CASE("point mass kernel fails the density assumption") {
    StoppingModel m(1.0, 0.9, RewardFunction::constant(0.5), RewardFunction::linear_decreasing(8, 8),
                    make_kernel("deterministic-drift", 0.1));
    const auto rep = check_assumptions(m, assumption_grid(m));
    CHECK_FALSE(rep.get("A2").pass);
}

TEST_CASE("assumption grid must stay inside the live region") {
    const auto m = fixtures::wsc(0.97, 0.9);
    const std::vector<double> bad{0.0, 0.95};
    CHECK_THROWS_AS(check_assumptions(m, bad), std::invalid_argument);
    const std::vector<double> unsorted{0.5, 0.1};
    CHECK_THROWS_AS(check_assumptions(m, unsorted), std::invalid_argument);
}
