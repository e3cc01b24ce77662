#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <vector>

#include "mgsim/lp.hpp"
#include "mgsim/rng.hpp"
#include "test_util.hpp"

using namespace mgsim;

namespace {

LinearProgram make_lp(std::vector<double> obj, std::vector<VarBound> bounds,
                      std::vector<LinearConstraint> cons) {
    LinearProgram lp;
    lp.objective = std::move(obj);
    lp.bounds = std::move(bounds);
    lp.constraints = std::move(cons);
    return lp;
}

/// Random LP with finite box bounds (hence a bounded feasible region) for the
/// oracle comparison. Coefficients land on a coarse lattice so degenerate
/// vertices show up regularly.
LinearProgram random_lp(Rng& rng, int max_vars = 6, int max_rows = 5) {
    const int n = 1 + static_cast<int>(rng.uniform_int(max_vars));
    const int m = 1 + static_cast<int>(rng.uniform_int(max_rows));
    LinearProgram lp;
    lp.objective.resize(n);
    lp.bounds.resize(n);
    const auto lattice = [&](double lo, double hi) {
        return std::round(rng.uniform(lo, hi) * 4.0) / 4.0;
    };
    for (int j = 0; j < n; ++j) {
        lp.objective[j] = lattice(-3.0, 3.0);
        const double lo = lattice(-4.0, 0.0);
        lp.bounds[j] = {lo, lo + std::max(0.25, lattice(0.0, 5.0))};
    }
    for (int i = 0; i < m; ++i) {
        LinearConstraint c;
        c.coeffs.resize(n);
        for (int j = 0; j < n; ++j) c.coeffs[j] = lattice(-2.0, 2.0);
        c.rel = rng.uniform() < 0.5 ? Relation::le : Relation::ge;
        c.rhs = lattice(-4.0, 4.0);
        lp.constraints.push_back(std::move(c));
    }
    return lp;
}

}  // namespace

TEST_CASE("one-variable programs") {
    // min x s.t. x >= 3
    auto lp = make_lp({1.0}, {{0.0, kLpInf}},
                      {LinearConstraint{{1.0}, Relation::ge, 3.0}});
    const LPSolution s = solve(lp);
    REQUIRE(s.status == LpStatus::optimal);
    REQUIRE_THAT(s.x[0], Catch::Matchers::WithinAbs(3.0, 1e-9));
    REQUIRE_THAT(s.objective_value, Catch::Matchers::WithinAbs(3.0, 1e-9));
}

TEST_CASE("two-variable box program") {
    // min -x-y s.t. x+y <= 1, x,y in [0,1] -> objective -1
    auto lp = make_lp({-1.0, -1.0}, {{0.0, 1.0}, {0.0, 1.0}},
                      {LinearConstraint{{1.0, 1.0}, Relation::le, 1.0}});
    const LPSolution s = solve(lp);
    REQUIRE(s.status == LpStatus::optimal);
    REQUIRE_THAT(s.objective_value, Catch::Matchers::WithinAbs(-1.0, 1e-9));
    REQUIRE(feasibility_check(lp, s.x) <= 1e-7);
}

TEST_CASE("contradictory rows are infeasible") {
    auto lp = make_lp({1.0}, {{0.0, kLpInf}},
                      {LinearConstraint{{1.0}, Relation::ge, 2.0},
                       LinearConstraint{{1.0}, Relation::le, 1.0}});
    REQUIRE(solve(lp).status == LpStatus::infeasible);
}

TEST_CASE("open direction is unbounded") {
    auto lp = make_lp({-1.0}, {{0.0, kLpInf}},
                      {LinearConstraint{{1.0}, Relation::ge, 0.0}});
    REQUIRE(solve(lp).status == LpStatus::unbounded);
}

TEST_CASE("equality constraints and fixed variables") {
    // min x s.t. x + y = 1, y in [0, 0.4] -> x = 0.6
    auto lp = make_lp({1.0, 0.0}, {{0.0, kLpInf}, {0.0, 0.4}},
                      {LinearConstraint{{1.0, 1.0}, Relation::eq, 1.0}});
    const LPSolution s = solve(lp);
    REQUIRE(s.status == LpStatus::optimal);
    REQUIRE_THAT(s.objective_value, Catch::Matchers::WithinAbs(0.6, 1e-9));

    // Fixed variable: z pinned to 2.
    auto lp2 = make_lp({1.0, 5.0}, {{0.0, kLpInf}, {2.0, 2.0}},
                       {LinearConstraint{{1.0, 1.0}, Relation::ge, 5.0}});
    const LPSolution s2 = solve(lp2);
    REQUIRE(s2.status == LpStatus::optimal);
    REQUIRE_THAT(s2.x[1], Catch::Matchers::WithinAbs(2.0, 1e-12));
    REQUIRE_THAT(s2.objective_value, Catch::Matchers::WithinAbs(13.0, 1e-9));
}

TEST_CASE("negative lower bounds and unconstrained programs") {
    auto lp = make_lp({2.0, -1.0}, {{-3.0, 5.0}, {-2.0, 4.0}}, {});
    const LPSolution s = solve(lp);
    REQUIRE(s.status == LpStatus::optimal);
    REQUIRE_THAT(s.objective_value, Catch::Matchers::WithinAbs(2.0 * -3.0 - 4.0, 1e-12));
}

TEST_CASE("feasibility_check measures the worst violation") {
    auto lp = make_lp({1.0}, {{0.0, kLpInf}},
                      {LinearConstraint{{1.0}, Relation::ge, 3.0}});
    REQUIRE(feasibility_check(lp, {5.0}) == 0.0);
    REQUIRE_THAT(feasibility_check(lp, {0.0}), Catch::Matchers::WithinAbs(3.0, 1e-12));
    REQUIRE_THROWS_AS(feasibility_check(lp, {1.0, 2.0}), ShapeError);
}

TEST_CASE("shape validation") {
    LinearProgram lp;
    lp.objective = {1.0, 2.0};
    lp.bounds = {{0.0, 1.0}};
    REQUIRE_THROWS_AS(solve(lp), ShapeError);

    lp.bounds = {{0.0, 1.0}, {2.0, 1.0}};
    REQUIRE_THROWS_AS(solve(lp), ShapeError);

    lp.bounds = {{0.0, 1.0}, {0.0, 1.0}};
    lp.constraints.push_back(LinearConstraint{{1.0}, Relation::le, 1.0});
    REQUIRE_THROWS_AS(solve(lp), ShapeError);
}

TEST_CASE("solver agrees with vertex enumeration on random programs") {
    Rng rng(2024);
    int feasible_cases = 0;
    for (int k = 0; k < 300; ++k) {
        const LinearProgram lp = random_lp(rng);
        const auto oracle = testutil::enumerate_optimum(lp);
        const LPSolution s = solve(lp);
        if (!oracle.feasible) {
            REQUIRE(s.status == LpStatus::infeasible);
            continue;
        }
        ++feasible_cases;
        REQUIRE(s.status == LpStatus::optimal);
        REQUIRE(feasibility_check(lp, s.x) <= 1e-6);
        REQUIRE_THAT(s.objective_value,
                     Catch::Matchers::WithinAbs(oracle.objective, 1e-6 * (1.0 + std::fabs(oracle.objective))));
    }
    REQUIRE(feasible_cases > 100);
}

TEST_CASE("scaling the objective scales the optimum") {
    Rng rng(77);
    for (int k = 0; k < 50; ++k) {
        LinearProgram lp = random_lp(rng);
        const LPSolution base = solve(lp);
        if (base.status != LpStatus::optimal) continue;

        LinearProgram scaled = lp;
        const double c = 3.5;
        for (double& v : scaled.objective) v *= c;
        const LPSolution s = solve(scaled);
        REQUIRE(s.status == LpStatus::optimal);
        REQUIRE(feasibility_check(lp, s.x) <= 1e-6);
        if (std::fabs(base.objective_value) > 1e-9) {
            REQUIRE_THAT(s.objective_value / base.objective_value,
                         Catch::Matchers::WithinAbs(c, 1e-6));
        } else {
            REQUIRE_THAT(s.objective_value, Catch::Matchers::WithinAbs(0.0, 1e-6));
        }
    }
}

TEST_CASE("solve is bit-deterministic") {
    Rng rng(31);
    for (int k = 0; k < 20; ++k) {
        const LinearProgram lp = random_lp(rng);
        const LPSolution a = solve(lp);
        const LPSolution b = solve(lp);
        REQUIRE(a.status == b.status);
        if (a.status == LpStatus::optimal) {
            REQUIRE(a.objective_value == b.objective_value);
            REQUIRE(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
        }
    }
}

TEST_CASE("lp dump lists objective, rows and bounds") {
    auto lp = make_lp({1.0, -2.0}, {{0.0, 1.0}, {0.0, kLpInf}},
                      {LinearConstraint{{1.0, 1.0}, Relation::le, 1.5}});
    const std::string text = dump_lp(lp);
    REQUIRE(text.find("minimize 1 -2") != std::string::npos);
    REQUIRE(text.find("row 1 1 <= 1.5") != std::string::npos);
    REQUIRE(text.find("bounds") != std::string::npos);
}
