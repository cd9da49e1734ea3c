#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rsic {

/// Strongly connected components of the positivity pattern of a square
/// nonnegative matrix. comp[v] is the component id of node v; ids are
/// assigned in reverse topological order of the condensation (a component
/// only has edges into components with smaller id).
struct SccDecomposition {
    std::vector<int> comp;
    int count = 0;
};

SccDecomposition positivity_scc(const Eigen::MatrixXd& A);

/// Spectral radius of an entrywise nonnegative matrix, with per-start-state
/// detail. rho is the global spectral radius. per_state(x) is the largest
/// component spectral radius reachable from x, which is the growth factor of
/// (A^j 1)(x)^(1/j); it equals rho for every x exactly when the top class is
/// reachable from everywhere. reducible flags more than one component.
struct SpectralResult {
    double rho = 0.0;
    Eigen::VectorXd per_state;
    bool reducible = false;
    long iterations = 0;
};

/// Power iteration with Collatz-Wielandt brackets run per strongly connected
/// component (blocks are shifted to be primitive first, so the brackets
/// contract). Stops when the bracket spread drops below tol relative to the
/// radius; falls back to a dense eigensolve if a block stalls.
SpectralResult spectral_radius(const Eigen::MatrixXd& A, double tol = 1e-13);

} // namespace rsic
