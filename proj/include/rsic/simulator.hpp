#pragma once

#include <cstdint>
#include <vector>

#include "rsic/model.hpp"
#include "rsic/policy_oracle.hpp"

namespace rsic {

/// Counter-based random stream: a SplitMix64 generator whose initial state is
/// a hash of (seed, index). Disjoint indices give statistically independent
/// streams, so trajectories can be sampled in any order or in parallel and
/// still reproduce bit for bit.
struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next();
    double uniform();                 // [0, 1), 53-bit resolution
    double exponential(double rate);  // inverse CDF; +inf when rate <= 0
};

SplitMix64 derived_stream(std::uint64_t seed, std::uint64_t index);

struct SimConfig {
    double horizon = 200.0;
    long trajectories = 10000;
    std::uint64_t seed = 1;
    int start = 0;
    int grid_k = 0;
    bool decide_at_zero = true;  // policy consulted at t = 0 as well
    bool jump_time_mode = false; // decide at chain jump times instead of grid times
    long bootstrap = 1000;       // resamples for the stderr estimate
    std::vector<double> checkpoints; // estimate recorded at these times; empty = quarters of horizon
    int threads = 0;             // 0 = hardware concurrency
};

/// One exact trajectory: exponential holding times from the generator, the
/// cost integral accumulated segment by segment, impulses applied by the
/// policy at decision times (grid multiples of 2^-grid_k, or chain jump times
/// in jump_time_mode), at most one impulse per decision time. Deterministic
/// given (seed, index).
struct TrajectoryResult {
    double exponent = 0.0;                    // integral of f plus impulse costs, at the horizon
    std::vector<double> impulse_times;
    std::vector<double> checkpoint_exponents; // aligned with the resolved checkpoint times
    long max_burst = 0;                       // most impulses in any half-open window of length 1
};

TrajectoryResult sample_trajectory(const ModelSpec& spec, const Policy& policy,
                                   const SimConfig& config, long index);

struct ImpulseStats {
    double min_rate = 0.0;  // per-trajectory impulses per unit time
    double mean_rate = 0.0;
    double max_rate = 0.0;
    long max_burst = 0;
    double hard_cap = 0.0;  // grid mode: (floor(T/delta) + 1) / T; jump mode: +inf
    long total_impulses = 0;
};

struct JEstimate {
    double point = 0.0;      // (1/T)(logsumexp of exponents - ln N)
    double std_error = 0.0;  // bootstrap stderr of the same statistic
    long trajectories = 0;
    double horizon = 0.0;
    std::vector<double> ladder_T;     // resolved checkpoint times
    std::vector<double> ladder_point; // estimate at each checkpoint
    ImpulseStats impulses;
    std::vector<double> exponents;    // per-trajectory, in index order
};

/// Monte Carlo estimate of the long-run growth rate under a fixed policy.
/// Exponents stay in the log domain throughout; the log-mean-exp uses a max
/// shift, and summation order is fixed by trajectory index, so the result is
/// bit-identical across thread counts.
JEstimate estimate_J(const ModelSpec& spec, const Policy& policy, const SimConfig& config);

/// Impulse-rate aggregates alone (same sampling as estimate_J). In grid mode
/// the decision grid caps the rate at hard_cap by construction; a computed
/// rate above it indicates a simulator bug and throws.
ImpulseStats admissibility_stats(const ModelSpec& spec, const Policy& policy,
                                 const SimConfig& config);

} // namespace rsic
