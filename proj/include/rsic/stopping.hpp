#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rsic/eigensolver.hpp"
#include "rsic/model.hpp"
#include "rsic/operators.hpp"

namespace rsic {

/// Discrete-grid optimal stopping data: maximize over grid stopping times
///   ln E_x[ e^{ int_0^tau g + G(X_tau) } ]
/// with forced stop on first exit from the mask. G must be <= 0 entrywise;
/// infinite-horizon values additionally need semigroup_type(g) < 0.
struct StoppingProblem {
    Eigen::VectorXd g;
    Eigen::VectorXd G;
    DomainMask mask;
    double delta = 1.0;
};

struct StoppingValue {
    Eigen::VectorXd u;
    long sweeps = 0;
    double final_change = 0.0; // multiplicative scale
};

/// Value iteration from u = G:
///   e^{u'} = max( e^G, K_g (1_in e^u + 1_out e^G) )  inside the mask,
///   u = G outside. The sweep is monotone nondecreasing; it converges
/// geometrically when semigroup_type(g) < 0 and aborts with a degeneracy
/// diagnostic otherwise.
StoppingValue value_iteration_bounded(const ModelSpec& spec, const StoppingProblem& prob,
                                      double tol = 1e-12, long max_sweeps = 1000000);

/// Exactly horizon_steps sweeps of the same recursion; the value of stopping
/// within that many grid steps.
Eigen::VectorXd finite_horizon_value(const ModelSpec& spec, const StoppingProblem& prob,
                                     long horizon_steps);

/// States where stopping is optimal: u(x) <= G(x) + tol.
std::vector<bool> stopping_region(const StoppingProblem& prob, const Eigen::VectorXd& u,
                                  double tol = 1e-9);

/// Conditional-expectation audit of a one-step solution. For every state of
/// the level computes E_x[e^{int (f - lambda)} (1_in e^w + 1_out e^{Mw})] and
/// compares with e^w: the gain must be <= 0 everywhere (supermartingale) and
/// = 0 on the continuation region (martingale), up to numerical residue.
struct MartingaleReport {
    Eigen::VectorXd conditional_gain;   // conditional - e^w, zero off level
    std::vector<bool> continuation;     // w - Mw > classify_tol, inside level
    double supermartingale_excess = 0.0; // max positive gain
    double martingale_residual = 0.0;    // max |gain| over continuation states
};

MartingaleReport martingale_check(const ModelSpec& spec, const EigenSolution& sol,
                                  double classify_tol = 1e-9);

/// Smallest horizon on a doubling grid where the geometric tail bound of the
/// g-weighted semigroup drops below the threshold; the integrability gate run
/// before infinite-horizon stopping solves. Requires semigroup_type(g) < 0.
double tail_decay_horizon(const ModelSpec& spec, const Eigen::VectorXd& g,
                          double threshold = 1e-6);

} // namespace rsic
