#include "rsic/stopping.hpp"

#include <cmath>
#include <sstream>

#include "rsic/errors.hpp"
#include "rsic/propagator.hpp"

namespace rsic {

namespace {

void check_problem(const ModelSpec& spec, const StoppingProblem& prob) {
    if (prob.g.size() != spec.n() || prob.G.size() != spec.n())
        throw PreconditionError("stopping problem arrays must cover every state");
    if (!(prob.delta > 0.0))
        throw PreconditionError("stopping problem requires delta > 0");
    if (prob.G.maxCoeff() > 0.0)
        throw PreconditionError("stopping payoff G must be nonpositive");
}

// One sweep in multiplicative scale. eu holds e^u with e^G frozen outside the
// mask; eG is e^G.
Eigen::VectorXd sweep(const Eigen::MatrixXd& Kg, const DomainMask& mask,
                      const Eigen::VectorXd& eG, const Eigen::VectorXd& eu) {
    Eigen::VectorXd mix(eu.size());
    for (int y = 0; y < eu.size(); ++y)
        mix(y) = mask(y) ? eu(y) : eG(y);
    Eigen::VectorXd next = Kg * mix;
    for (int x = 0; x < eu.size(); ++x)
        next(x) = mask(x) ? std::max(eG(x), next(x)) : eG(x);
    return next;
}

} // namespace

StoppingValue value_iteration_bounded(const ModelSpec& spec, const StoppingProblem& prob,
                                      double tol, long max_sweeps) {
    check_problem(spec, prob);
    const Eigen::MatrixXd Kg = weighted_matrix(spec.generator, prob.g, prob.delta, 0.0);
    const Eigen::VectorXd eG = prob.G.array().exp();
    Eigen::VectorXd eu = eG;

    StoppingValue out;
    for (long s = 1; s <= max_sweeps; ++s) {
        Eigen::VectorXd next = sweep(Kg, prob.mask, eG, eu);
        out.sweeps = s;
        out.final_change = (next - eu).cwiseAbs().maxCoeff();
        eu = next;
        if (out.final_change <= tol) {
            out.u = eu.array().log();
            return out;
        }
    }
    const double type = semigroup_type(spec.generator, prob.g);
    std::ostringstream msg;
    msg << "stopping value iteration did not converge in " << max_sweeps
        << " sweeps (last change " << out.final_change << "); semigroup type of g is " << type
        << (type >= 0.0 ? ", so the infinite-horizon value is degenerate" : "");
    throw ConvergenceError(msg.str());
}

Eigen::VectorXd finite_horizon_value(const ModelSpec& spec, const StoppingProblem& prob,
                                     long horizon_steps) {
    check_problem(spec, prob);
    if (horizon_steps < 0)
        throw PreconditionError("horizon_steps must be nonnegative");
    const Eigen::MatrixXd Kg = weighted_matrix(spec.generator, prob.g, prob.delta, 0.0);
    const Eigen::VectorXd eG = prob.G.array().exp();
    Eigen::VectorXd eu = eG;
    for (long s = 0; s < horizon_steps; ++s)
        eu = sweep(Kg, prob.mask, eG, eu);
    return eu.array().log();
}

std::vector<bool> stopping_region(const StoppingProblem& prob, const Eigen::VectorXd& u,
                                  double tol) {
    std::vector<bool> stop(u.size());
    for (int x = 0; x < u.size(); ++x)
        stop[static_cast<size_t>(x)] = u(x) <= prob.G(x) + tol;
    return stop;
}

MartingaleReport martingale_check(const ModelSpec& spec, const EigenSolution& sol,
                                  double classify_tol) {
    const DomainMask mask = domain_mask(spec, sol.m);
    const int n = spec.n();
    const Eigen::MatrixXd Kl =
        weighted_matrix(spec.generator, spec.running_cost, sol.delta, sol.lambda);
    const Eigen::VectorXd mw = apply_M(spec, sol.w).values;

    Eigen::VectorXd mix(n);
    for (int y = 0; y < n; ++y)
        mix(y) = std::exp(mask(y) ? sol.w(y) : mw(y));
    const Eigen::VectorXd conditional = Kl * mix;

    MartingaleReport rep;
    rep.conditional_gain = Eigen::VectorXd::Zero(n);
    rep.continuation.assign(n, false);
    for (int x = 0; x < n; ++x) {
        if (!mask(x))
            continue;
        const double gain = conditional(x) - std::exp(sol.w(x));
        rep.conditional_gain(x) = gain;
        rep.supermartingale_excess = std::max(rep.supermartingale_excess, gain);
        const double margin =
            classify_tol * std::max({1.0, std::abs(sol.w(x)), std::abs(mw(x))});
        if (sol.w(x) - mw(x) > margin) {
            rep.continuation[static_cast<size_t>(x)] = true;
            rep.martingale_residual = std::max(rep.martingale_residual, std::abs(gain));
        }
    }
    return rep;
}

double tail_decay_horizon(const ModelSpec& spec, const Eigen::VectorXd& g, double threshold) {
    const double type = semigroup_type(spec.generator, g);
    if (!(type < 0.0))
        throw PreconditionError("tail decay gate requires semigroup_type(g) < 0; got " +
                                std::to_string(type));
    const double a = type / 2.0;
    double T = 1.0;
    for (int i = 0; i < 64; ++i, T *= 2.0)
        if (tail_supremum_bound(spec, g, a, T) < threshold)
            return T;
    throw ConvergenceError("tail bound failed to drop below the threshold on the doubling grid");
}

} // namespace rsic
