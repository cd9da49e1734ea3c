#pragma once

#include <Eigen/Dense>

#include "rsic/model.hpp"

namespace rsic {

/// One step of the cost-weighted transition semigroup:
///   matrix(x, y) = E_x[ exp(integral_0^delta (f - shift)(Y_s) ds) ; Y_delta = y ]
///                = exp(delta * (Q + diag(f - shift)))(x, y).
/// Entrywise nonnegative by construction.
struct WeightedKernel {
    Eigen::MatrixXd matrix;
    double delta = 0.0;
    double shift = 0.0;
};

/// exp(delta * (Q + diag(g - shift))) computed by uniformization: the constant
/// part of the diagonal is factored out as a scalar and the rest is a Poisson
/// mixture of powers of a substochastic matrix, so every term is nonnegative
/// and truncation (tail weight < 1e-16) cannot produce negative entries.
/// Large delta*rate products are handled by halving and squaring.
Eigen::MatrixXd weighted_matrix(const Eigen::MatrixXd& Q, const Eigen::VectorXd& g, double delta,
                                double shift);

WeightedKernel weighted_kernel(const ModelSpec& spec, double delta, double shift);

/// Growth type of the weighted semigroup: the spectral bound of Q + diag(g),
/// obtained as ln rho(exp(Q + diag(g))). Nonpositive whenever g <= 0.
double semigroup_type(const Eigen::MatrixXd& Q, const Eigen::VectorXd& g);
double semigroup_type(const ModelSpec& spec); // with g = running_cost

/// v = integral_0^inf exp(t (Q + diag(g - a))) 1 dt, the expected discounted
/// occupation mass, solved from (Q + diag(g - a)) v = -1. Requires
/// semigroup_type(g) < a < 0; then v is finite and strictly positive.
Eigen::VectorXd resolvent_one(const ModelSpec& spec, const Eigen::VectorXd& g, double a);

/// Upper bound on sup_x E_x[ exp(integral_T^inf (g - a)) ... ] type tails:
/// (e^{aT} / min_x v(x)) * max_x v(x) with v = resolvent_one(g, a). Decays to
/// zero geometrically in T; used as the integrability gate ahead of
/// infinite-horizon solves.
double tail_supremum_bound(const ModelSpec& spec, const Eigen::VectorXd& g, double a, double T);

} // namespace rsic
