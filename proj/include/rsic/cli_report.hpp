#pragma once

#include <cstdint>
#include <string>

#include "rsic/eigensolver.hpp"

namespace rsic {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitDegenerate = 2,
    kExitOracleMismatch = 3,
};

struct SolveFlags {
    std::string out_dir;
    SolveOptions opts;
    bool normalize = false;
    double strategy_tol = 1e-9;
};

/// Solve the full ladder, persist results under out_dir, print the headline
/// numbers. Exit 0 on success, 2 when the value is degenerate (results still
/// written, no strategy emitted), 1 on any failure.
int cmd_solve(const std::string& model_path, const SolveFlags& flags);

struct OracleFlags {
    std::string out_dir;
    int grid_k = -1;  // -1: finest grid level in the model
    int level = -1;   // -1: full state set
    double cap = 1e6;
    double compare_tol = 1e-8;
    bool normalize = false;
};

/// Enumerate stationary policies, persist the table, and when a solve output
/// is present in out_dir compare against the matching ladder entry. Exit 3 on
/// a comparison outside compare_tol.
int cmd_oracle(const std::string& model_path, const OracleFlags& flags);

struct SimulateFlags {
    std::string out_dir;
    std::string policy = "optimal"; // "optimal" (from a prior solve) or "never"
    double horizon = 200.0;
    long trajectories = 10000;
    std::uint64_t seed = 1;
    std::string start;   // state label or index; empty = first state
    int grid_k = -1;     // -1: from the solve output, else the finest model level
    bool decide_at_zero = true;
    bool jump_time_mode = false;
    long bootstrap = 1000;
    int threads = 0;
    bool normalize = false;
};

int cmd_simulate(const std::string& model_path, const SimulateFlags& flags);

/// Emit plot-ready CSVs from a completed run directory.
int cmd_report(const std::string& run_dir);

/// FNV-1a 64-bit content hash of a file, as 16 hex digits.
std::string fnv1a_hex(const std::string& path);

} // namespace rsic
