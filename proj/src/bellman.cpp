#include "rsic/bellman.hpp"

#include <algorithm>
#include <cmath>

#include "rsic/errors.hpp"
#include "rsic/operators.hpp"
#include "rsic/propagator.hpp"
#include "rsic/stopping.hpp"

namespace rsic {

namespace {

LadderEntry to_entry(const EigenSolution& sol) {
    LadderEntry e;
    e.m = sol.m;
    e.k = sol.k;
    e.delta = sol.delta;
    e.lambda = sol.lambda;
    e.residual = sol.residual;
    e.iterations = sol.iterations;
    return e;
}

} // namespace

LambdaDeltaResult lambda_delta(const ModelSpec& spec, int k, const SolveOptions& opts) {
    const int levels = spec.chain_length();
    LambdaDeltaResult out;
    out.k = k;
    out.delta = std::ldexp(1.0, -k);
    out.per_level.reserve(levels);
    double prev = 0.0;
    for (int m = 0; m < levels; ++m) {
        EigenSolution sol = solve_one_step(spec, m, k, opts);
        out.per_level.push_back(to_entry(sol));
        // Growing the allowed region can only help, up to solver tolerance.
        if (m > 0 && sol.lambda < prev - 100.0 * opts.tol * std::max(1.0, std::abs(prev)))
            out.monotone_in_m = false;
        prev = sol.lambda;
        if (m == levels - 1) {
            out.lambda = sol.lambda;
            out.full_level = std::move(sol);
        }
    }
    return out;
}

BellmanSolution lambda_full(const ModelSpec& spec, const SolveOptions& opts) {
    if (spec.grid_levels.empty())
        throw PreconditionError("lambda_full: model lists no grid levels");
    BellmanSolution out;
    out.r_f = semigroup_type(spec.generator, spec.running_cost);
    double prev = 0.0;
    for (std::size_t i = 0; i < spec.grid_levels.size(); ++i) {
        const int k = spec.grid_levels[i];
        LambdaDeltaResult lk = lambda_delta(spec, k, opts);
        for (const LadderEntry& e : lk.per_level)
            out.ladder.push_back(e);
        if (!lk.monotone_in_m)
            out.monotone_in_m = false;
        // Coarse decision grids are a subset of finer ones, so the full-level
        // value can only grow as k does.
        if (i > 0 && lk.lambda < prev - 100.0 * opts.tol * std::max(1.0, std::abs(prev)))
            out.monotone_in_k = false;
        prev = lk.lambda;
        out.full_per_k.push_back(std::move(lk.full_level));
    }
    const EigenSolution& finest = out.full_per_k.back();
    out.lambda = finest.lambda;
    out.finest_k = finest.k;
    out.finest_delta = finest.delta;
    out.w = finest.w;
    out.Mw = apply_M(spec, out.w).values;
    out.degenerate = (out.lambda - out.r_f) < opts.degeneracy_margin;
    out.refinement = dyadic_refinement_diagnostics(spec, out);
    return out;
}

std::vector<RefinementRow> dyadic_refinement_diagnostics(const ModelSpec& spec,
                                                         const BellmanSolution& sol) {
    std::vector<RefinementRow> rows;
    rows.reserve(sol.full_per_k.size());
    for (std::size_t i = 0; i < sol.full_per_k.size(); ++i) {
        const EigenSolution& cur = sol.full_per_k[i];
        RefinementRow row;
        row.k = cur.k;
        row.lambda = cur.lambda;
        if (i > 0) {
            const EigenSolution& prev = sol.full_per_k[i - 1];
            row.lambda_gap = cur.lambda - prev.lambda;
            row.w_gap = (cur.w - prev.w).cwiseAbs().maxCoeff();
            Eigen::VectorXd mw_cur = apply_M(spec, cur.w).values;
            Eigen::VectorXd mw_prev = apply_M(spec, prev.w).values;
            row.mw_gap = (mw_cur - mw_prev).cwiseAbs().maxCoeff();
        }
        rows.push_back(row);
    }
    return rows;
}

double bellman_residual(const ModelSpec& spec, const BellmanSolution& sol, long horizon_steps) {
    StoppingProblem prob;
    prob.g = spec.running_cost.array() - sol.lambda;
    prob.G = sol.Mw;
    prob.mask = domain_mask(spec, spec.chain_length() - 1);
    prob.delta = sol.finest_delta;
    Eigen::VectorXd derived = finite_horizon_value(spec, prob, horizon_steps);
    return (derived - sol.w).cwiseAbs().maxCoeff();
}

long suggested_residual_horizon(const BellmanSolution& sol, double target) {
    const double gap = sol.lambda - sol.r_f;
    if (gap <= 0.0)
        throw PreconditionError("suggested_residual_horizon: needs lambda > r(f)");
    // Tail of the iteration decays like exp(-gap * t); t = steps * delta.
    const double t_needed = -std::log(target) / gap;
    long steps = static_cast<long>(std::ceil(t_needed / sol.finest_delta)) + 1;
    return std::max<long>(steps, 8);
}

} // namespace rsic
