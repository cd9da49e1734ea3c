#include "rsic/propagator.hpp"

#include <cmath>
#include <limits>

#include "rsic/errors.hpp"
#include "rsic/linalg.hpp"

namespace rsic {

namespace {

// exp(delta * B) for a Metzler B with nonpositive row sums, via the Poisson
// mixture exp(delta*B) = sum_j e^{-bd} (bd)^j / j! * P^j, P = I + B/beta.
// P is substochastic so P^j stays bounded by 1 and the truncated tail is an
// entrywise error bound.
Eigen::MatrixXd exp_substochastic(const Eigen::MatrixXd& B, double delta) {
    const int n = static_cast<int>(B.rows());
    const double beta = std::max(0.0, -B.diagonal().minCoeff());
    const double bd = beta * delta;
    if (bd == 0.0)
        return Eigen::MatrixXd::Identity(n, n) + delta * B; // B has zero diagonal and rows, i.e. B = 0

    // keep the series short and well conditioned
    if (bd > 30.0) {
        Eigen::MatrixXd half = exp_substochastic(B, delta / 2.0);
        return half * half;
    }

    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) + B / beta;
    double weight = std::exp(-bd); // j = 0
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd sum = weight * term;
    double cumulative = weight;
    for (long j = 1; cumulative < 1.0 - 1e-16; ++j) {
        term = P * term;
        weight *= bd / static_cast<double>(j);
        sum += weight * term;
        cumulative += weight;
        // past twice the Poisson mode the weights decay at ratio < 1/2, so the
        // whole remaining tail is below 2 * weight; cumulative alone can stall
        // one ulp short of 1 when the leftover mass rounds to nothing
        if (static_cast<double>(j) >= 2.0 * bd && weight < 1e-18)
            break;
        if (j > 200000)
            throw ConvergenceError("uniformization series failed to exhaust its Poisson weights");
    }
    return sum;
}

} // namespace

Eigen::MatrixXd weighted_matrix(const Eigen::MatrixXd& Q, const Eigen::VectorXd& g, double delta,
                                double shift) {
    if (!(delta > 0.0))
        throw PreconditionError("weighted_matrix requires delta > 0");
    if (Q.rows() != Q.cols() || Q.rows() != g.size())
        throw PreconditionError("weighted_matrix dimension mismatch between generator and weight");

    // factor the largest diagonal growth out as a scalar so the matrix part
    // has nonpositive row sums
    const double c = (g.array() - shift).maxCoeff();
    const double scale = delta * c;
    if (scale > 700.0)
        throw OverflowError("weighted kernel overflows: delta * max(g - shift) = " +
                            std::to_string(scale));
    Eigen::MatrixXd B = Q;
    B.diagonal() += g;
    B.diagonal().array() -= shift + c;
    Eigen::MatrixXd K = std::exp(scale) * exp_substochastic(B, delta);
    if (!K.allFinite())
        throw OverflowError("weighted kernel produced non-finite entries");
    return K;
}

WeightedKernel weighted_kernel(const ModelSpec& spec, double delta, double shift) {
    return {weighted_matrix(spec.generator, spec.running_cost, delta, shift), delta, shift};
}

double semigroup_type(const Eigen::MatrixXd& Q, const Eigen::VectorXd& g) {
    const Eigen::MatrixXd K = weighted_matrix(Q, g, 1.0, 0.0);
    return std::log(spectral_radius(K).rho);
}

double semigroup_type(const ModelSpec& spec) {
    return semigroup_type(spec.generator, spec.running_cost);
}

Eigen::VectorXd resolvent_one(const ModelSpec& spec, const Eigen::VectorXd& g, double a) {
    if (g.size() != spec.n())
        throw PreconditionError("resolvent weight length mismatch");
    if (!(a < 0.0))
        throw PreconditionError("resolvent level must be negative");
    const double r = semigroup_type(spec.generator, g);
    if (!(r < a))
        throw PreconditionError("resolvent requires semigroup_type(g) < a; got type " +
                                std::to_string(r) + " and a = " + std::to_string(a));
    Eigen::MatrixXd A = spec.generator;
    A.diagonal() += (g.array() - a).matrix();
    Eigen::VectorXd v = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(
        -Eigen::VectorXd::Ones(spec.n()));
    const double resid = (A * v + Eigen::VectorXd::Ones(spec.n())).cwiseAbs().maxCoeff();
    if (!v.allFinite() || resid > 1e-9 * std::max(1.0, v.cwiseAbs().maxCoeff()))
        throw ConvergenceError("resolvent system is singular to working precision");
    if (v.minCoeff() <= 0.0)
        throw ConvergenceError("resolvent lost positivity; the level a is too close to the type");
    return v;
}

double tail_supremum_bound(const ModelSpec& spec, const Eigen::VectorXd& g, double a, double T) {
    if (!(T >= 0.0))
        throw PreconditionError("tail bound horizon must be nonnegative");
    const Eigen::VectorXd v = resolvent_one(spec, g, a);
    return std::exp(a * T) / v.minCoeff() * v.cwiseAbs().maxCoeff();
}

} // namespace rsic
