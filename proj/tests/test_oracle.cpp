#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <string>

#include <qsd/analytic.hpp>
#include <qsd/oracle.hpp>
#include <qsd/povm.hpp>

#include "helpers.hpp"

using namespace qsd;

TEST_CASE("oracle reproduces closed-form minima", "[oracle]") {
    const double s32 = std::sqrt(3.0) / 2.0;
    const auto trine = Ensemble::from_states({{"A", {1.0 / 3, {0, 0, 1.0 / 3}}},
                                              {"B", {1.0 / 3, {s32 / 3, 0, -0.5 / 3}}},
                                              {"C", {1.0 / 3, {-s32 / 3, 0, -0.5 / 3}}}});
    const auto rt = oracle_solve(trine, 1e-8);
    REQUIRE(rt.converged);
    REQUIRE(rt.t == Catch::Approx(2.0 / 3).margin(1e-8));

    const auto hel = Ensemble::from_states(
        {{"A", {0.5, {0, 0, 0.5}}}, {"B", {0.5, {0.5, 0, 0}}}});
    const auto rh = oracle_solve(hel, 1e-8);
    REQUIRE(rh.converged);
    REQUIRE(rh.t == Catch::Approx(0.853553).margin(1e-6));
    REQUIRE(rh.t == Catch::Approx(0.5 + std::sqrt(2.0) / 4).margin(1e-8));
}

TEST_CASE("oracle on a single state returns it immediately", "[oracle]") {
    const auto ens = Ensemble::from_states({{"A", {1.0, {0.3, 0.2, 0.1}}}});
    const auto res = oracle_solve(ens, 1e-9);
    REQUIRE(res.converged);
    REQUIRE(res.t == Catch::Approx(1.0));
    REQUIRE(norm(res.s - Vec3{0.3, 0.2, 0.1}) < 1e-12);
    REQUIRE(res.iterations <= 2);
}

TEST_CASE("random_ensemble is deterministic and well-formed", "[oracle]") {
    const auto a = random_ensemble(7, 3, Purity::Pure);
    const auto b = random_ensemble(7, 3, Purity::Pure);
    REQUIRE(a.size() == b.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a.op(i).p == b.op(i).p);
        REQUIRE(norm(a.op(i).r - b.op(i).r) == 0.0);
        sum += a.op(i).p;
        // pure draws sit exactly on the Bloch boundary
        REQUIRE(norm(a.op(i).r) == Catch::Approx(a.op(i).p).margin(1e-12));
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));

    const auto m = random_ensemble(11, 4, Purity::Mixed);
    for (std::size_t i = 0; i < m.size(); ++i) {
        REQUIRE(norm(m.op(i).r) <= m.op(i).p + 1e-12);
    }
    REQUIRE_NOTHROW(random_ensemble(3, 1, Purity::Mixed));
}

TEST_CASE("random_ensemble seeds do not collide", "[oracle]") {
    std::set<std::string> seen;
    for (int seed = 0; seed < 1000; ++seed) {
        const auto ens = random_ensemble(seed, 2, Purity::Mixed);
        char key[128];
        std::snprintf(key, sizeof(key), "%.17g:%.17g:%.17g:%.17g", ens.op(0).p, ens.op(0).r.x,
                      ens.op(1).p, ens.op(1).r.y);
        seen.insert(key);
    }
    REQUIRE(seen.size() == 1000);
}

TEST_CASE("any synthesized measurement stays below the oracle value", "[oracle]") {
    for (int seed = 50; seed < 60; ++seed) {
        const auto ens = random_ensemble(seed, 4, Purity::Mixed);
        const auto lag = solve_ensemble(ens, Method::Analytic);
        const auto povm = optimal_povm(lag, ens);
        const auto orc = oracle_solve(ens, 1e-8);
        REQUIRE(guessing_probability(ens, povm) <= orc.t + 1e-6);
    }
}

TEST_CASE("oracle certifies convergence on random instances at 1e-6", "[oracle]") {
    for (int seed = 200; seed < 215; ++seed) {
        const auto ens = random_ensemble(seed, 3 + seed % 3, Purity::Mixed);
        const auto res = oracle_solve(ens, 1e-6);
        REQUIRE(res.converged);
        // converged means the reported value is within tol of the true minimum,
        // so any probe point must sit above t - tol.
        REQUIRE(covering_objective(res.s, ens) <= res.t + 1e-12);
    }
}
