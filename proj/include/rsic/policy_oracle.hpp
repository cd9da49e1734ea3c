#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rsic/bellman.hpp"
#include "rsic/model.hpp"

namespace rsic {

/// Stationary grid policy: one action per state, applied at every decision
/// time the state is visited. Action -1 continues; action j >= 0 relocates to
/// impulse_set[j]. level records which exhaustion level the policy respects
/// (every state outside that level must relocate).
struct Policy {
    std::vector<int> action;
    int level = 0;

    int n() const { return static_cast<int>(action.size()); }
};

/// Read the optimal stationary policy off a solved w: relocate exactly where
/// the intervention branch is active (w <= Mw + tol), to the payoff argmax
/// target. Requires a nondegenerate solution; with lambda = r(f) the policy
/// carries no optimality claim, so none is produced.
Policy strategy_from_solution(const ModelSpec& spec, const BellmanSolution& sol,
                              double tol = 1e-9);

/// Growth rate of one fixed policy at grid level k: the log spectral radius,
/// per step, of the one-step transfer matrix whose row at x is the weighted
/// kernel row at x (continue) or at the relocation target scaled by the
/// relocation cost (jump). per_state gives the rate reachable from each start
/// state, which can differ from growth_rate when the matrix is reducible.
struct PolicyValue {
    double growth_rate = 0.0; // (1/delta) log rho
    double rho = 0.0;
    Eigen::VectorXd per_state;
    bool reducible = false;
    int k = 0;
    double delta = 1.0;
};

PolicyValue policy_growth_rate(const ModelSpec& spec, const Policy& policy, int k);

/// Brute-force optimum over all stationary policies at grid level k and
/// exhaustion level m (level -1 means the full state set). States outside the
/// level must relocate. Enumeration order is lexicographic per state with
/// CONTINUE < JUMP(0) < JUMP(1) < ...; ties keep the first maximizer. Throws
/// CapError when the enumeration would exceed cap policies.
struct OracleRow {
    std::vector<int> action;
    double value = 0.0;
    bool reducible = false;
    Eigen::VectorXd per_state;
};

struct OracleResult {
    double lambda = 0.0;
    Policy best;
    long enumerated = 0;
    double rho = 0.0;
    bool reducible = false;
    std::vector<OracleRow> table;
};

OracleResult oracle_lambda(const ModelSpec& spec, int k, int level = -1, double cap = 1e6);

/// Render a policy's action vector as a compact string: '.' per continuing
/// state, the impulse index per relocating state, states joined by '|'.
std::string encode_policy(const std::vector<int>& action);

} // namespace rsic
