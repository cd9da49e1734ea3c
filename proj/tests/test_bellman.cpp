#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rsic/bellman.hpp"
#include "rsic/errors.hpp"
#include "support/models.hpp"

TEST_CASE("per-grid solve walks the exhaustion ladder") {
    const rsic::ModelSpec spec = testsup::m3();
    const rsic::LambdaDeltaResult r = rsic::lambda_delta(spec, 0);
    REQUIRE(r.per_level.size() == 2);
    CHECK(r.per_level[0].m == 0);
    CHECK(r.per_level[0].lambda == doctest::Approx(-0.40132827156323553).epsilon(1e-11));
    CHECK(r.per_level[1].m == 1);
    CHECK(r.per_level[1].lambda == doctest::Approx(-0.2789223529854428).epsilon(1e-11));
    CHECK(r.lambda == r.per_level[1].lambda);
    CHECK(r.full_level.m == 1);
    CHECK(r.monotone_in_m);
    CHECK(r.delta == 1.0);
}

TEST_CASE("full solve aggregates grids and levels") {
    const rsic::ModelSpec spec = testsup::m3();
    const rsic::BellmanSolution sol = rsic::lambda_full(spec);

    CHECK(sol.r_f == doctest::Approx(-0.36054386678261907).epsilon(1e-11));
    CHECK(sol.lambda == doctest::Approx(-0.2471991628352424).epsilon(1e-11));
    CHECK(sol.finest_k == 1);
    CHECK(sol.finest_delta == 0.5);
    CHECK(!sol.degenerate);
    CHECK(sol.monotone_in_m);
    CHECK(sol.monotone_in_k);

    // ladder rows come out grid-major: (m, k) = (0,0), (1,0), (0,1), (1,1)
    REQUIRE(sol.ladder.size() == 4);
    CHECK(sol.ladder[0].m == 0);
    CHECK(sol.ladder[0].k == 0);
    CHECK(sol.ladder[1].m == 1);
    CHECK(sol.ladder[1].k == 0);
    CHECK(sol.ladder[2].k == 1);
    CHECK(sol.ladder[2].lambda == doctest::Approx(-0.4049849476758813).epsilon(1e-11));
    CHECK(sol.ladder[3].lambda == doctest::Approx(-0.2471991628352424).epsilon(1e-11));

    REQUIRE(sol.full_per_k.size() == 2);
    CHECK(sol.full_per_k[0].lambda == doctest::Approx(-0.2789223529854428).epsilon(1e-11));

    // constrained level values may dip below r(f); the full level may not
    CHECK(sol.ladder[0].lambda < sol.r_f);
    for (const rsic::EigenSolution& full : sol.full_per_k)
        CHECK(full.lambda >= sol.r_f - 1e-9);
}

TEST_CASE("two-state refinement keeps the same eigenvector") {
    const rsic::ModelSpec spec = testsup::m2();
    const rsic::BellmanSolution sol = rsic::lambda_full(spec);

    CHECK(sol.lambda == doctest::Approx(-0.2486675109820756).epsilon(1e-11));
    CHECK(sol.r_f == doctest::Approx(-2.0 + std::sqrt(2.0)).epsilon(1e-12));
    CHECK(sol.finest_k == 2);
    CHECK(sol.w(0) == 0.0);
    CHECK(sol.w(1) == doctest::Approx(-0.1).epsilon(1e-12));
    // Mw(x) = c(x, s0) + w(s0) = -0.1 at both states
    CHECK(sol.Mw(0) == doctest::Approx(-0.1).epsilon(1e-13));
    CHECK(sol.Mw(1) == doctest::Approx(-0.1).epsilon(1e-13));

    REQUIRE(sol.refinement.size() == 3);
    CHECK(sol.refinement[0].lambda_gap == 0.0);
    for (size_t i = 1; i < 3; ++i) {
        CHECK(sol.refinement[i].lambda_gap > 0.0);
        CHECK(sol.refinement[i].w_gap < 1e-12); // w = (0, -0.1) at every grid
        CHECK(sol.refinement[i].mw_gap < 1e-12);
    }
    const auto rows = rsic::dyadic_refinement_diagnostics(spec, sol);
    REQUIRE(rows.size() == 3);
    CHECK(rows[2].lambda == sol.lambda);
}

TEST_CASE("degenerate model is flagged, not hidden") {
    const rsic::ModelSpec spec = testsup::m1();
    const rsic::BellmanSolution sol = rsic::lambda_full(spec);
    CHECK(sol.degenerate);
    CHECK(sol.lambda == doctest::Approx(-0.5).epsilon(1e-13));
    CHECK(std::abs(sol.lambda - sol.r_f) < 1e-12);

    // the stopping reconstruction genuinely fails in the degenerate case:
    // the gap measures the failure (w = 0 vs forced payoff -1), not noise
    CHECK(rsic::bellman_residual(spec, sol, 50) == doctest::Approx(1.0).epsilon(1e-12));

    rsic::BellmanSolution flat = sol;
    flat.lambda = flat.r_f;
    CHECK_THROWS_AS(rsic::suggested_residual_horizon(flat), rsic::PreconditionError);
}

TEST_CASE("prohibitive costs degenerate the same way") {
    const rsic::BellmanSolution sol = rsic::lambda_full(testsup::m2_prohibitive());
    CHECK(sol.degenerate);
    CHECK(std::abs(sol.lambda - sol.r_f) < 1e-9);
}

TEST_CASE("value iteration re-derives w at the suggested horizon") {
    const rsic::ModelSpec spec = testsup::m2();
    const rsic::BellmanSolution sol = rsic::lambda_full(spec);
    const long steps = rsic::suggested_residual_horizon(sol);
    CHECK(steps >= 8);
    CHECK(rsic::bellman_residual(spec, sol, steps) < 1e-8);

    const rsic::ModelSpec m3 = testsup::m3();
    const rsic::BellmanSolution sol3 = rsic::lambda_full(m3);
    CHECK(rsic::bellman_residual(m3, sol3, rsic::suggested_residual_horizon(sol3)) < 1e-8);
}

TEST_CASE("constant cost offsets shift the value and nothing else") {
    const rsic::ModelSpec spec = testsup::m2();
    const rsic::BellmanSolution base = rsic::lambda_full(spec);

    rsic::ModelSpec shifted = spec;
    shifted.running_cost.array() -= 0.5;
    const rsic::BellmanSolution moved = rsic::lambda_full(shifted);

    CHECK(moved.lambda == doctest::Approx(base.lambda - 0.5).epsilon(1e-10));
    CHECK(moved.r_f == doctest::Approx(base.r_f - 0.5).epsilon(1e-10));
    CHECK((moved.w - base.w).cwiseAbs().maxCoeff() < 1e-10);

    // the normalization helper composes with the same identity
    Eigen::VectorXd raw = spec.running_cost.array() + 0.5;
    const auto [norm, offset] = rsic::normalize_running_cost(raw);
    rsic::ModelSpec renorm = spec;
    renorm.running_cost = norm;
    const rsic::BellmanSolution nsol = rsic::lambda_full(renorm);
    CHECK(nsol.lambda + offset == doctest::Approx(base.lambda + 0.5).epsilon(1e-10));
}

TEST_CASE("models without grid levels are rejected") {
    rsic::ModelSpec spec = testsup::m2();
    spec.grid_levels.clear();
    CHECK_THROWS_AS(rsic::lambda_full(spec), rsic::PreconditionError);
}
