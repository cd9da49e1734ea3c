#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rsic/model.hpp"
#include "rsic/propagator.hpp"

namespace rsic {

/// Indicator of one exhaustion level B_m over the full state set.
struct DomainMask {
    std::vector<bool> inside;
    int level = 0;

    bool operator()(int x) const { return inside[static_cast<size_t>(x)]; }
};

DomainMask domain_mask(const ModelSpec& spec, int m);

/// Intervention operator in additive scale:
///   values(x) = max_j ( c(x, j) + h(target_j) ), argmax(x) = smallest best j.
/// Only the entries of h at impulse targets are read.
struct InterventionResult {
    Eigen::VectorXd values;
    std::vector<int> argmax;
};

InterventionResult apply_M(const ModelSpec& spec, const Eigen::VectorXd& h);

/// Multiplicative twin of apply_M: max_j e^{c(x,j)} h(target_j) for h > 0 on
/// the impulse targets. exp(apply_M(log h)) = apply_tilde_M(h) exactly.
Eigen::VectorXd apply_tilde_M(const ModelSpec& spec, const Eigen::VectorXd& h);

/// Expectation step with forced intervention outside the mask:
///   out(x) = sum_y K(x,y) * ( h(y) if y inside else (tilde_M h)(y) )
/// for x inside the mask; entries outside the mask are set to zero and are
/// never read downstream. The kernel must carry shift 0; the growth rate is
/// divided out by the eigensolver, not folded into the kernel here.
Eigen::VectorXd apply_tilde_P(const ModelSpec& spec, const WeightedKernel& kernel,
                              const DomainMask& mask, const Eigen::VectorXd& h);

/// One dynamic-programming step: max(apply_tilde_P h, tilde_M(apply_tilde_P h))
/// entrywise on the mask.
Eigen::VectorXd apply_tilde_T(const ModelSpec& spec, const WeightedKernel& kernel,
                              const DomainMask& mask, const Eigen::VectorXd& h);

} // namespace rsic
