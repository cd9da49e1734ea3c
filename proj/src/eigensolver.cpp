#include "rsic/eigensolver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rsic/errors.hpp"
#include "rsic/propagator.hpp"

namespace rsic {

namespace {

double max_at_targets(const ModelSpec& spec, const Eigen::VectorXd& h) {
    double best = -std::numeric_limits<double>::infinity();
    for (int u : spec.impulse_set)
        best = std::max(best, h(u));
    return best;
}

// Multiplicative-scale residual of the one-step equation at (h, lam):
// || h - max(Ph / lam, tilde_M h) ||_inf over the level.
double equation_residual(const ModelSpec& spec, const DomainMask& mask, const Eigen::VectorXd& h,
                         const Eigen::VectorXd& ph, double lam) {
    const Eigen::VectorXd mh = apply_tilde_M(spec, h);
    double worst = 0.0;
    for (int x = 0; x < spec.n(); ++x)
        if (mask(x))
            worst = std::max(worst, std::abs(h(x) - std::max(ph(x) / lam, mh(x))));
    return worst;
}

} // namespace

EigenSolution solve_one_step(const ModelSpec& spec, int m, int k, const SolveOptions& opts) {
    if (k < 0)
        throw PreconditionError("grid level must be nonnegative");
    const DomainMask mask = domain_mask(spec, m);
    const double delta = std::ldexp(1.0, -k);
    const WeightedKernel kernel = weighted_kernel(spec, delta, 0.0);
    const int n = spec.n();

    Eigen::VectorXd h(n);
    for (int x = 0; x < n; ++x)
        h(x) = mask(x) ? 1.0 : 0.0;

    EigenSolution sol;
    sol.m = m;
    sol.k = k;
    sol.delta = delta;

    double best_spread = std::numeric_limits<double>::infinity();
    long stall = 0;
    bool converged = false;
    double lo = 0.0, hi = 0.0, lam = 0.0;

    for (long it = 1; it <= opts.max_iters; ++it) {
        const Eigen::VectorXd ph = apply_tilde_P(spec, kernel, mask, h);
        const Eigen::VectorXd mph = apply_tilde_M(spec, ph);
        Eigen::VectorXd th(n);
        lo = std::numeric_limits<double>::infinity();
        hi = 0.0;
        for (int x = 0; x < n; ++x) {
            th(x) = mask(x) ? std::max(ph(x), mph(x)) : 0.0;
            if (mask(x)) {
                const double r = th(x) / h(x);
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        }
        sol.iterations = it;
        lam = std::sqrt(lo * hi);
        const double spread = hi - lo;

        if (spread <= opts.tol * lam) {
            const double resid = equation_residual(spec, mask, h, ph, lam);
            if (resid <= opts.tol) {
                sol.residual = resid;
                sol.cw_spread = spread;
                converged = true;
                break;
            }
        }

        if (spread < best_spread * (1.0 - 1e-6)) {
            best_spread = spread;
            stall = 0;
        } else if (++stall >= 1000) {
            std::ostringstream msg;
            msg << "one-step eigenproblem stalled at level m=" << m << ", k=" << k
                << ": bracket [" << lo << ", " << hi << "] stopped contracting after "
                << it << " sweeps (spread " << spread
                << "); the iteration is oscillating between decision branches";
            throw ConvergenceError(msg.str());
        }

        // positivity failure means the one-step operator is reducible: a state
        // class decoupled from the impulse targets grows at its own rate, so
        // no positive eigenvector exists and the iterate drifts to 0 or inf
        const double norm = max_at_targets(spec, th);
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw ConvergenceError(
                "one-step iterate lost positivity at its impulse targets; the "
                "operator is reducible for this model and admits no positive "
                "eigenvector");
        h = th / norm;
        for (int x = 0; x < n; ++x) {
            if (!mask(x))
                continue;
            if (!(h(x) > 0.0))
                throw ConvergenceError(
                    "one-step iterate underflowed to zero inside the level; the "
                    "operator is reducible for this model and admits no positive "
                    "eigenvector");
            if (!std::isfinite(h(x)))
                throw ConvergenceError(
                    "one-step iterate overflowed away from its impulse targets; "
                    "the operator is reducible for this model and admits no "
                    "positive eigenvector");
        }
    }

    if (!converged) {
        std::ostringstream msg;
        msg << "one-step eigenproblem did not reach tol " << opts.tol << " in "
            << opts.max_iters << " sweeps at level m=" << m << ", k=" << k << "; bracket ["
            << lo << ", " << hi << "]";
        throw ConvergenceError(msg.str());
    }

    sol.bracket_lo = lo;
    sol.bracket_hi = hi;
    sol.tilde_lambda = lam;
    sol.lambda = std::log(lam) / delta;

    // normalization max over targets = 1 makes w exactly zero at its argmax
    sol.w.resize(n);
    for (int x = 0; x < n; ++x)
        sol.w(x) = mask(x) ? std::log(h(x)) : 0.0;
    const InterventionResult ext = apply_M(spec, sol.w);
    for (int x = 0; x < n; ++x)
        if (!mask(x))
            sol.w(x) = ext.values(x);
    return sol;
}

FixedPointReport check_fixed_point(const ModelSpec& spec, const EigenSolution& sol) {
    const DomainMask mask = domain_mask(spec, sol.m);
    const int n = spec.n();
    const Eigen::MatrixXd Kl =
        weighted_matrix(spec.generator, spec.running_cost, sol.delta, sol.lambda);
    const Eigen::VectorXd mw = apply_M(spec, sol.w).values;

    Eigen::VectorXd mix(n);
    for (int y = 0; y < n; ++y)
        mix(y) = std::exp(mask(y) ? sol.w(y) : mw(y));
    const Eigen::VectorXd expectation = Kl * mix;

    FixedPointReport rep;
    rep.residual = Eigen::VectorXd::Zero(n);
    rep.active_branch.assign(n, 0);
    for (int x = 0; x < n; ++x) {
        if (!mask(x))
            continue;
        const double impulse = std::exp(mw(x));
        rep.active_branch[x] = expectation(x) >= impulse ? 0 : 1;
        rep.residual(x) = std::abs(std::exp(sol.w(x)) - std::max(expectation(x), impulse));
        rep.max_residual = std::max(rep.max_residual, rep.residual(x));
    }
    return rep;
}

} // namespace rsic
