#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace rsic {

/// Finite-state model of a controlled Markov chain with multiplicative reward.
///
/// Conventions, all checked by validate_model:
///  - generator is a conservative rate matrix: nonnegative off-diagonals,
///    rows summing to zero;
///  - running_cost f is entrywise <= 0 (see normalize_running_cost);
///  - impulse_set holds strictly increasing state indices; shift_cost has one
///    column per impulse target, every entry < 0, and satisfies the triangle
///    inequality c(x,eta) >= c(x,xi) + c(xi,eta) over impulse targets;
///  - exhaustion_chain is a strictly increasing sequence of state sets
///    B_0 c B_1 c ... c B_M with impulse_set inside B_0 and B_M the full
///    state set; every state of B_m (m < M) has a positive-rate path out;
///  - grid_levels is a strictly increasing list of nonnegative dyadic levels k,
///    each standing for the time step 2^-k.
struct ModelSpec {
    std::vector<std::string> states;
    Eigen::MatrixXd generator;
    Eigen::VectorXd running_cost;
    std::vector<int> impulse_set;
    Eigen::MatrixXd shift_cost;
    std::vector<std::vector<int>> exhaustion_chain;
    std::vector<int> grid_levels;

    int n() const { return static_cast<int>(states.size()); }
    int impulse_count() const { return static_cast<int>(impulse_set.size()); }
    int chain_length() const { return static_cast<int>(exhaustion_chain.size()); }
    int finest_level() const { return grid_levels.empty() ? 0 : grid_levels.back(); }

    // Index of a state label; throws ParseError if the label is unknown.
    int state_index(const std::string& label) const;
};

/// Parse a model from JSON text. The schema is strict: all keys required,
/// unknown keys rejected, shapes checked with the offending field named.
ModelSpec model_from_json(const std::string& text);

/// Read and parse a model file.
ModelSpec load_model(const std::string& path);

/// Check every ModelSpec invariant; returns a list of human-readable
/// violations, empty when the model is valid. Numeric checks use an absolute
/// tolerance of 1e-12.
std::vector<std::string> validate_model(const ModelSpec& spec);

/// Throw ValidationError listing all violations unless the model is valid.
void require_valid(const ModelSpec& spec);

/// Shift a running cost to the nonpositive range: returns (raw - offset, offset)
/// with offset = max_x |raw(x)|. Growth rates computed with the shifted cost
/// relate to the raw ones by lambda_raw = lambda_shifted + offset.
std::pair<Eigen::VectorXd, double> normalize_running_cost(const Eigen::VectorXd& raw);

} // namespace rsic
