#include "rsic/policy_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsic/errors.hpp"
#include "rsic/linalg.hpp"
#include "rsic/operators.hpp"
#include "rsic/propagator.hpp"

namespace rsic {

namespace {

Eigen::MatrixXd transfer_matrix(const ModelSpec& spec, const std::vector<int>& action,
                                const Eigen::MatrixXd& kernel) {
    const int n = spec.n();
    if (static_cast<int>(action.size()) != n)
        throw PreconditionError("policy length does not match the state count");
    Eigen::MatrixXd A(n, n);
    for (int x = 0; x < n; ++x) {
        const int a = action[x];
        if (a < 0) {
            A.row(x) = kernel.row(x);
        } else {
            if (a >= spec.impulse_count())
                throw PreconditionError("policy action exceeds the impulse set");
            const int target = spec.impulse_set[a];
            A.row(x) = std::exp(spec.shift_cost(x, a)) * kernel.row(target);
        }
    }
    return A;
}

} // namespace

Policy strategy_from_solution(const ModelSpec& spec, const BellmanSolution& sol,
                              double tol) {
    if (sol.degenerate)
        throw PreconditionError(
            "strategy_from_solution: the solution is degenerate (lambda = r(f)); "
            "impulses add nothing and no optimal policy is certified");
    const int n = spec.n();
    if (sol.w.size() != n)
        throw PreconditionError("solution does not match the state count");
    InterventionResult mw = apply_M(spec, sol.w);
    Policy policy;
    policy.level = spec.chain_length() - 1;
    policy.action.assign(n, -1);
    for (int x = 0; x < n; ++x)
        if (sol.w(x) <= mw.values(x) + tol)
            policy.action[x] = mw.argmax[x];
    return policy;
}

PolicyValue policy_growth_rate(const ModelSpec& spec, const Policy& policy, int k) {
    PolicyValue out;
    out.k = k;
    out.delta = std::ldexp(1.0, -k);
    WeightedKernel kernel = weighted_kernel(spec, out.delta, 0.0);
    Eigen::MatrixXd A = transfer_matrix(spec, policy.action, kernel.matrix);
    SpectralResult sr = spectral_radius(A);
    out.rho = sr.rho;
    out.reducible = sr.reducible;
    if (sr.rho <= 0.0)
        throw PreconditionError("policy transfer matrix has zero spectral radius");
    out.growth_rate = std::log(sr.rho) / out.delta;
    out.per_state.resize(spec.n());
    for (int x = 0; x < spec.n(); ++x)
        out.per_state(x) = sr.per_state(x) > 0.0 ? std::log(sr.per_state(x)) / out.delta
                                                 : -std::numeric_limits<double>::infinity();
    return out;
}

OracleResult oracle_lambda(const ModelSpec& spec, int k, int level, double cap) {
    const int n = spec.n();
    const int u = spec.impulse_count();
    if (level < 0)
        level = spec.chain_length() - 1;
    DomainMask mask = domain_mask(spec, level);

    double count = 1.0;
    for (int x = 0; x < n; ++x)
        count *= mask(x) ? (u + 1) : u;
    if (count > cap)
        throw CapError("policy enumeration needs " + std::to_string(count) +
                       " policies, above the cap of " + std::to_string(cap));

    const double delta = std::ldexp(1.0, -k);
    WeightedKernel kernel = weighted_kernel(spec, delta, 0.0);

    // Mixed-radix odometer over per-state actions, the last state least
    // significant; digit 0 continues where allowed, forced-exit states only
    // relocate. This visits policies in lexicographic action order.
    std::vector<int> digit(n, 0);
    std::vector<int> radix(n);
    for (int x = 0; x < n; ++x)
        radix[x] = mask(x) ? (u + 1) : u;

    OracleResult out;
    out.lambda = -std::numeric_limits<double>::infinity();
    out.best.level = level;
    out.table.reserve(static_cast<std::size_t>(count));
    std::vector<int> action(n, -1);

    bool done = false;
    while (!done) {
        for (int x = 0; x < n; ++x)
            action[x] = mask(x) ? digit[x] - 1 : digit[x];
        Eigen::MatrixXd A = transfer_matrix(spec, action, kernel.matrix);
        SpectralResult sr = spectral_radius(A);
        ++out.enumerated;

        OracleRow row;
        row.action = action;
        row.reducible = sr.reducible;
        row.per_state.resize(n);
        for (int x = 0; x < n; ++x)
            row.per_state(x) = sr.per_state(x) > 0.0
                                   ? std::log(sr.per_state(x)) / delta
                                   : -std::numeric_limits<double>::infinity();
        row.value = sr.rho > 0.0 ? std::log(sr.rho) / delta
                                 : -std::numeric_limits<double>::infinity();
        // Strict improvement keeps the first maximizer in visit order.
        if (row.value > out.lambda) {
            out.lambda = row.value;
            out.best.action = action;
            out.rho = sr.rho;
            out.reducible = sr.reducible;
        }
        out.table.push_back(std::move(row));

        int x = n - 1;
        while (x >= 0 && ++digit[x] == radix[x]) {
            digit[x] = 0;
            --x;
        }
        done = (x < 0);
    }
    return out;
}

std::string encode_policy(const std::vector<int>& action) {
    std::string s;
    for (std::size_t i = 0; i < action.size(); ++i) {
        if (i > 0)
            s += '|';
        if (action[i] < 0)
            s += '.';
        else
            s += std::to_string(action[i]);
    }
    return s;
}

} // namespace rsic
