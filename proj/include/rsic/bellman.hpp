#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rsic/eigensolver.hpp"
#include "rsic/model.hpp"

namespace rsic {

struct LadderEntry {
    int m = 0;
    int k = 0;
    double delta = 1.0;
    double lambda = 0.0;
    double residual = 0.0;
    long iterations = 0;
};

/// All exhaustion levels solved at one grid level. lambda is the value at the
/// last (full) level, which is exact on a finite state set: the deepest level
/// has no forced exits left.
struct LambdaDeltaResult {
    int k = 0;
    double delta = 1.0;
    double lambda = 0.0;
    std::vector<LadderEntry> per_level;
    EigenSolution full_level;
    bool monotone_in_m = true;
};

LambdaDeltaResult lambda_delta(const ModelSpec& spec, int k, const SolveOptions& opts = {});

/// Gap table between consecutive grid levels.
struct RefinementRow {
    int k = 0;
    double lambda = 0.0;
    double lambda_gap = 0.0; // lambda(k) - lambda(previous k), 0 for the first row
    double w_gap = 0.0;      // sup |w_k - w_prev|
    double mw_gap = 0.0;     // sup |Mw_k - Mw_prev|
};

/// Full solve across every grid level in spec.grid_levels. lambda, w and the
/// policy-facing fields come from the finest level. degenerate flags
/// lambda - r(f) < opts.degeneracy_margin; a degenerate value solves the
/// equation but has no optimality guarantee attached.
struct BellmanSolution {
    double lambda = 0.0;
    double r_f = 0.0;
    bool degenerate = false;
    int finest_k = 0;
    double finest_delta = 1.0;
    Eigen::VectorXd w;
    Eigen::VectorXd Mw;
    std::vector<LadderEntry> ladder;          // every (m, k) pair solved
    std::vector<EigenSolution> full_per_k;    // full-level solution per grid level
    std::vector<RefinementRow> refinement;
    bool monotone_in_m = true;                // within every grid level
    bool monotone_in_k = true;                // of the full-level values
};

BellmanSolution lambda_full(const ModelSpec& spec, const SolveOptions& opts = {});

std::vector<RefinementRow> dyadic_refinement_diagnostics(const ModelSpec& spec,
                                                         const BellmanSolution& sol);

/// Independent re-derivation of w at the finest grid: value iteration from
/// the intervention payoff for the stopping problem with running term
/// f - lambda and payoff Mw, run horizon_steps sweeps. Returns
/// sup |w - derived|. Requires a nondegenerate solution: the stopping
/// characterization genuinely fails in the degenerate case, where the
/// returned gap measures that failure instead of an error in w.
double bellman_residual(const ModelSpec& spec, const BellmanSolution& sol, long horizon_steps);

/// Sweep count that makes the value-iteration tail in bellman_residual
/// smaller than target, from the geometric rate lambda - r(f).
long suggested_residual_horizon(const BellmanSolution& sol, double target = 1e-10);

} // namespace rsic
