#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rsic/errors.hpp"
#include "rsic/operators.hpp"
#include "support/models.hpp"

TEST_CASE("domain_mask tracks the exhaustion chain") {
    const rsic::ModelSpec spec = testsup::m3();
    const rsic::DomainMask b0 = rsic::domain_mask(spec, 0);
    CHECK(b0.level == 0);
    CHECK(b0(0));
    CHECK(b0(1));
    CHECK(!b0(2));
    const rsic::DomainMask b1 = rsic::domain_mask(spec, 1);
    CHECK(b1(0));
    CHECK(b1(1));
    CHECK(b1(2));
    CHECK_THROWS_AS(rsic::domain_mask(spec, 2), rsic::PreconditionError);
    CHECK_THROWS_AS(rsic::domain_mask(spec, -1), rsic::PreconditionError);
}

TEST_CASE("apply_M adds the relocation cost to the target value") {
    const rsic::ModelSpec spec = testsup::m3();
    Eigen::VectorXd h(3);
    h << 0.4, -1.0, 2.0;
    const rsic::InterventionResult r = rsic::apply_M(spec, h);
    // single target a: value = c(x, 0) + h(a)
    CHECK(r.values(0) == doctest::Approx(-0.2 + 0.4).epsilon(1e-15));
    CHECK(r.values(1) == doctest::Approx(-0.3 + 0.4).epsilon(1e-15));
    CHECK(r.values(2) == doctest::Approx(-0.8 + 0.4).epsilon(1e-15));
    CHECK(r.argmax == std::vector<int>{0, 0, 0});
    CHECK_THROWS_AS(rsic::apply_M(spec, Eigen::VectorXd::Zero(2)), rsic::PreconditionError);
}

TEST_CASE("apply_M ties resolve to the lowest impulse index") {
    rsic::ModelSpec spec = testsup::m2();
    spec.impulse_set = {0, 1};
    spec.shift_cost = Eigen::MatrixXd::Constant(2, 2, -0.5);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(2);
    const rsic::InterventionResult r = rsic::apply_M(spec, h);
    CHECK(r.values(0) == -0.5);
    CHECK(r.argmax == std::vector<int>{0, 0});
    // break the tie toward the second target
    h(1) = 0.25;
    CHECK(rsic::apply_M(spec, h).argmax == std::vector<int>{1, 1});
}

TEST_CASE("multiplicative intervention is exp of the additive one") {
    const rsic::ModelSpec spec = testsup::m3();
    Eigen::VectorXd h(3);
    h << 1.3, 0.2, 2.7;
    const Eigen::VectorXd tm = rsic::apply_tilde_M(spec, h);
    const Eigen::VectorXd via_log =
        rsic::apply_M(spec, h.array().log().matrix()).values.array().exp();
    CHECK((tm - via_log).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::VectorXd zero_at_target = h;
    zero_at_target(0) = 0.0;
    CHECK_THROWS_AS(rsic::apply_tilde_M(spec, zero_at_target), rsic::PreconditionError);
}

TEST_CASE("expectation step mixes interior values with forced-jump values") {
    const rsic::ModelSpec spec = testsup::m3();
    const rsic::WeightedKernel kernel = rsic::weighted_kernel(spec, 1.0, 0.0);
    const rsic::DomainMask mask = rsic::domain_mask(spec, 0);
    Eigen::VectorXd h(3);
    h << 1.0, 0.7, 0.7; // value at the excluded state c is ignored
    const Eigen::VectorXd tm = rsic::apply_tilde_M(spec, h);
    const Eigen::VectorXd ph = rsic::apply_tilde_P(spec, kernel, mask, h);

    const Eigen::MatrixXd& K = kernel.matrix;
    for (int x = 0; x < 2; ++x) {
        const double want = K(x, 0) * h(0) + K(x, 1) * h(1) + K(x, 2) * tm(2);
        CHECK(ph(x) == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK(ph(2) == 0.0); // off-mask entries are zeroed, never read
}

TEST_CASE("expectation step requires an unshifted kernel") {
    const rsic::ModelSpec spec = testsup::m2();
    const rsic::WeightedKernel shifted = rsic::weighted_kernel(spec, 1.0, -0.5);
    const rsic::DomainMask mask = rsic::domain_mask(spec, 0);
    CHECK_THROWS_AS(rsic::apply_tilde_P(spec, shifted, mask, Eigen::VectorXd::Ones(2)),
                    rsic::PreconditionError);
}

TEST_CASE("one dynamic-programming step takes the better branch") {
    const rsic::ModelSpec spec = testsup::m2();
    const rsic::WeightedKernel kernel = rsic::weighted_kernel(spec, 1.0, 0.0);
    const rsic::DomainMask mask = rsic::domain_mask(spec, 0);
    Eigen::VectorXd h(2);
    h << 1.0, 0.9;
    const Eigen::VectorXd ph = rsic::apply_tilde_P(spec, kernel, mask, h);
    const Eigen::VectorXd mph = rsic::apply_tilde_M(spec, ph);
    const Eigen::VectorXd th = rsic::apply_tilde_T(spec, kernel, mask, h);
    CHECK((th - ph.cwiseMax(mph)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar model: continue branch beats the jump branch") {
    const rsic::ModelSpec spec = testsup::m1();
    const rsic::WeightedKernel kernel = rsic::weighted_kernel(spec, 1.0, 0.0);
    const rsic::DomainMask mask = rsic::domain_mask(spec, 0);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    const Eigen::VectorXd th = rsic::apply_tilde_T(spec, kernel, mask, one);
    // continue: e^{-0.5}; jump first: e^{-1} e^{-0.5}
    CHECK(th(0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
}
