#include "rsic/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsic/errors.hpp"

namespace rsic {

DomainMask domain_mask(const ModelSpec& spec, int m) {
    if (m < 0 || m >= spec.chain_length())
        throw PreconditionError("exhaustion level " + std::to_string(m) + " out of range");
    DomainMask mask;
    mask.level = m;
    mask.inside.assign(spec.n(), false);
    for (int x : spec.exhaustion_chain[m])
        mask.inside[static_cast<size_t>(x)] = true;
    return mask;
}

InterventionResult apply_M(const ModelSpec& spec, const Eigen::VectorXd& h) {
    if (h.size() != spec.n())
        throw PreconditionError("apply_M input length mismatch");
    const int n = spec.n();
    const int nu = spec.impulse_count();
    InterventionResult res{Eigen::VectorXd(n), std::vector<int>(n, 0)};
    for (int x = 0; x < n; ++x) {
        double best = -std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int j = 0; j < nu; ++j) {
            const double v = spec.shift_cost(x, j) + h(spec.impulse_set[j]);
            if (v > best) {
                best = v;
                arg = j;
            }
        }
        res.values(x) = best;
        res.argmax[x] = arg;
    }
    return res;
}

Eigen::VectorXd apply_tilde_M(const ModelSpec& spec, const Eigen::VectorXd& h) {
    if (h.size() != spec.n())
        throw PreconditionError("apply_tilde_M input length mismatch");
    const int n = spec.n();
    const int nu = spec.impulse_count();
    for (int j = 0; j < nu; ++j)
        if (!(h(spec.impulse_set[j]) > 0.0))
            throw PreconditionError("apply_tilde_M requires positive values at impulse targets");
    Eigen::VectorXd out(n);
    for (int x = 0; x < n; ++x) {
        double best = 0.0;
        for (int j = 0; j < nu; ++j)
            best = std::max(best, std::exp(spec.shift_cost(x, j)) * h(spec.impulse_set[j]));
        out(x) = best;
    }
    return out;
}

Eigen::VectorXd apply_tilde_P(const ModelSpec& spec, const WeightedKernel& kernel,
                              const DomainMask& mask, const Eigen::VectorXd& h) {
    const int n = spec.n();
    if (h.size() != n || kernel.matrix.rows() != n)
        throw PreconditionError("apply_tilde_P dimension mismatch");
    if (kernel.shift != 0.0)
        throw PreconditionError("apply_tilde_P expects an unshifted kernel");
    const Eigen::VectorXd mh = apply_tilde_M(spec, h);
    Eigen::VectorXd mix(n);
    for (int y = 0; y < n; ++y)
        mix(y) = mask(y) ? h(y) : mh(y);
    Eigen::VectorXd full = kernel.matrix * mix;
    for (int x = 0; x < n; ++x)
        if (!mask(x))
            full(x) = 0.0;
    return full;
}

Eigen::VectorXd apply_tilde_T(const ModelSpec& spec, const WeightedKernel& kernel,
                              const DomainMask& mask, const Eigen::VectorXd& h) {
    const int n = spec.n();
    Eigen::VectorXd ph = apply_tilde_P(spec, kernel, mask, h);
    const Eigen::VectorXd mph = apply_tilde_M(spec, ph);
    Eigen::VectorXd out(n);
    for (int x = 0; x < n; ++x)
        out(x) = mask(x) ? std::max(ph(x), mph(x)) : 0.0;
    return out;
}

} // namespace rsic
