#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "rsic/errors.hpp"
#include "rsic/operators.hpp"
#include "rsic/stopping.hpp"
#include "support/models.hpp"

namespace {

// Stopping problem whose value reproduces a solved one-step system: running
// term f - lambda, payoff Mw, same grid.
rsic::StoppingProblem reconstruction_problem(const rsic::ModelSpec& spec,
                                             const rsic::EigenSolution& sol) {
    rsic::StoppingProblem prob;
    prob.g = spec.running_cost.array() - sol.lambda;
    prob.G = rsic::apply_M(spec, sol.w).values;
    prob.mask = rsic::domain_mask(spec, sol.m);
    prob.delta = sol.delta;
    return prob;
}

} // namespace

TEST_CASE("value iteration reproduces the eigenvector") {
    const rsic::ModelSpec spec = testsup::m2();
    const rsic::EigenSolution sol = rsic::solve_one_step(spec, 0, 2);
    const rsic::StoppingProblem prob = reconstruction_problem(spec, sol);

    const rsic::StoppingValue val = rsic::value_iteration_bounded(spec, prob, 1e-15);
    CHECK(val.sweeps > 10);
    CHECK(val.final_change <= 1e-15);
    CHECK((val.u - sol.w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("finite horizons increase toward the fixed point") {
    const rsic::ModelSpec spec = testsup::m2();
    const rsic::EigenSolution sol = rsic::solve_one_step(spec, 0, 1);
    const rsic::StoppingProblem prob = reconstruction_problem(spec, sol);

    Eigen::VectorXd prev = rsic::finite_horizon_value(spec, prob, 0);
    CHECK((prev - prob.G).cwiseAbs().maxCoeff() < 1e-15); // zero sweeps = stop now
    for (long steps : {1L, 2L, 5L, 20L, 100L}) {
        const Eigen::VectorXd cur = rsic::finite_horizon_value(spec, prob, steps);
        CHECK((cur - prev).minCoeff() >= -1e-15);
        prev = cur;
    }
    CHECK((prev - sol.w).cwiseAbs().maxCoeff() < 1e-8);
    CHECK_THROWS_AS(rsic::finite_horizon_value(spec, prob, -1), rsic::PreconditionError);
}

TEST_CASE("stopping region marks where the payoff is already optimal") {
    const rsic::ModelSpec spec = testsup::m2();
    const rsic::EigenSolution sol = rsic::solve_one_step(spec, 0, 2);
    const rsic::StoppingProblem prob = reconstruction_problem(spec, sol);
    const rsic::StoppingValue val = rsic::value_iteration_bounded(spec, prob);
    const std::vector<bool> region = rsic::stopping_region(prob, val.u);
    CHECK(!region[0]); // s0 continues
    CHECK(region[1]);  // s1 stops (relocates)
}

TEST_CASE("payoff must be nonpositive") {
    const rsic::ModelSpec spec = testsup::m2();
    rsic::StoppingProblem prob;
    prob.g = spec.running_cost;
    prob.G = Eigen::VectorXd::Constant(2, 0.5);
    prob.mask = rsic::domain_mask(spec, 0);
    prob.delta = 1.0;
    try {
        rsic::value_iteration_bounded(spec, prob);
        FAIL("expected PreconditionError");
    } catch (const rsic::PreconditionError& e) {
        CHECK(std::string(e.what()).find("nonpositive") != std::string::npos);
    }
    prob.delta = 0.0;
    prob.G = Eigen::VectorXd::Constant(2, -0.5);
    CHECK_THROWS_AS(rsic::value_iteration_bounded(spec, prob), rsic::PreconditionError);
}

TEST_CASE("nonnegative growth is reported as degeneracy, not silence") {
    const rsic::ModelSpec spec = testsup::m2();
    rsic::StoppingProblem prob;
    prob.g = spec.running_cost.array() + 1.0; // semigroup type +0.414 > 0
    prob.G = Eigen::VectorXd::Constant(2, -0.1);
    prob.mask = rsic::domain_mask(spec, 0);
    prob.delta = 1.0;
    try {
        rsic::value_iteration_bounded(spec, prob, 1e-12, 500);
        FAIL("expected ConvergenceError");
    } catch (const rsic::ConvergenceError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("degenerate") != std::string::npos);
        CHECK(msg.find("semigroup type") != std::string::npos);
    }
}

TEST_CASE("martingale audit of a solved system") {
    const rsic::ModelSpec spec = testsup::m2();
    const rsic::EigenSolution sol = rsic::solve_one_step(spec, 0, 0);
    const rsic::MartingaleReport rep = rsic::martingale_check(spec, sol);

    CHECK(rep.supermartingale_excess <= 1e-12);
    CHECK(rep.martingale_residual <= 1e-12);
    CHECK(rep.continuation[0]);
    CHECK(!rep.continuation[1]);
    // on the relocation state the conditional drops strictly below e^w
    CHECK(rep.conditional_gain(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.conditional_gain(1) ==
          doctest::Approx(-0.4656939542341150).epsilon(1e-11));
}

TEST_CASE("martingale audit rejects an inflated eigenvalue") {
    const rsic::ModelSpec spec = testsup::m2();
    rsic::EigenSolution sol = rsic::solve_one_step(spec, 0, 0);
    sol.lambda += 0.1;
    sol.tilde_lambda = std::exp(sol.delta * sol.lambda);
    const rsic::MartingaleReport rep = rsic::martingale_check(spec, sol);
    CHECK(rep.martingale_residual ==
          doctest::Approx(0.09516258196404004).epsilon(1e-10));
}

TEST_CASE("tail decay gate") {
    const rsic::ModelSpec spec = testsup::m2();
    const double T6 = rsic::tail_decay_horizon(spec, spec.running_cost, 1e-6);
    const double T10 = rsic::tail_decay_horizon(spec, spec.running_cost, 1e-10);
    CHECK(T6 > 0.0);
    CHECK(T10 > T6);
    // the returned horizon actually clears the threshold it was asked for
    CHECK(rsic::tail_supremum_bound(spec, spec.running_cost,
                                    0.5 * rsic::semigroup_type(spec), T6) < 1e-6);
    CHECK_THROWS_AS(rsic::tail_decay_horizon(spec, Eigen::VectorXd::Zero(2), 1e-6),
                    rsic::PreconditionError);
}
