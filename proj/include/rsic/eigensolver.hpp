#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rsic/model.hpp"
#include "rsic/operators.hpp"

namespace rsic {

struct SolveOptions {
    double tol = 1e-12;            // multiplicative-scale fixed-point residual
    long max_iters = 100000;
    double degeneracy_margin = 1e-7;
};

/// Solution of the one-step dynamic-programming eigenproblem on level m at
/// time step delta = 2^-k:
///   e^{w(x)} = max( E_x[ e^{int_0^delta (f - lambda)} (1_in e^w + 1_out e^{Mw}) ],
///                   e^{Mw(x)} )           for x in B_m,
///   w = Mw outside B_m,  max over impulse targets of w = 0.
struct EigenSolution {
    int m = 0;
    int k = 0;
    double delta = 1.0;
    double lambda = 0.0;       // (1/delta) * ln(tilde_lambda)
    double tilde_lambda = 1.0; // eigenvalue of the one-step operator
    Eigen::VectorXd w;         // full length; equals Mw off the level
    long iterations = 0;
    double cw_spread = 0.0;    // final Collatz-Wielandt bracket width
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double residual = 0.0;     // multiplicative-scale fixed-point residual
};

/// Nonlinear power iteration h <- T h with the iterate renormalized to
/// max over impulse targets = 1. Collatz-Wielandt ratios bracket the
/// eigenvalue at every step; the eigenvalue estimate is the geometric mean of
/// the final bracket. Convergence requires both bracket spread < tol * value
/// and fixed-point residual <= tol. A bracket that stops contracting for 1000
/// consecutive sweeps aborts with a diagnostic carrying the last bracket.
EigenSolution solve_one_step(const ModelSpec& spec, int m, int k, const SolveOptions& opts = {});

/// Independent re-check of the solved equation: rebuilds the shifted kernel
/// at the solved lambda and recomputes both branches. active_branch is 0
/// where the expectation branch attains the max and 1 where intervention does.
struct FixedPointReport {
    Eigen::VectorXd residual;       // per state, zero off the level
    std::vector<int> active_branch; // meaningful inside the level
    double max_residual = 0.0;
};

FixedPointReport check_fixed_point(const ModelSpec& spec, const EigenSolution& sol);

} // namespace rsic
