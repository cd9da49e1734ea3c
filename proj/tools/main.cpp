#include <CLI11.hpp>

#include <string>

#include "rsic/cli_report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"long-run risk-sensitive impulse control on finite Markov chains"};
    app.require_subcommand(1);
    int rc = rsic::kExitOk;

    std::string solve_model;
    rsic::SolveFlags solve_flags;
    CLI::App* solve = app.add_subcommand(
        "solve", "compute the optimal growth rate, relative value w, and strategy");
    solve->add_option("model", solve_model, "model JSON file")->required();
    solve->add_option("--out", solve_flags.out_dir, "output directory")->required();
    solve->add_option("--tol", solve_flags.opts.tol, "solver tolerance");
    solve->add_option("--max-iters", solve_flags.opts.max_iters, "iteration cap per level");
    solve->add_option("--degeneracy-margin", solve_flags.opts.degeneracy_margin,
                      "flag lambda - r(f) below this as degenerate");
    solve->add_option("--strategy-tol", solve_flags.strategy_tol,
                      "threshold for reading the relocation region off w");
    solve->add_flag("--normalize", solve_flags.normalize,
                    "shift the running cost to be nonpositive; reports both values");
    solve->callback([&] { rc = rsic::cmd_solve(solve_model, solve_flags); });

    std::string oracle_model;
    rsic::OracleFlags oracle_flags;
    CLI::App* oracle = app.add_subcommand(
        "oracle", "brute-force all stationary policies and compare with a prior solve");
    oracle->add_option("model", oracle_model, "model JSON file")->required();
    oracle->add_option("--out", oracle_flags.out_dir, "output directory")->required();
    oracle->add_option("--grid-k", oracle_flags.grid_k,
                       "decision-grid exponent (default: the finest level in the model)");
    oracle->add_option("--level", oracle_flags.level,
                       "exhaustion level m (default: the full state set)");
    oracle->add_option("--cap", oracle_flags.cap, "enumeration size cap");
    oracle->add_option("--compare-tol", oracle_flags.compare_tol,
                       "allowed |oracle - solve| before exit code 3");
    oracle->add_flag("--normalize", oracle_flags.normalize,
                     "shift the running cost to be nonpositive");
    oracle->callback([&] { rc = rsic::cmd_oracle(oracle_model, oracle_flags); });

    std::string sim_model;
    rsic::SimulateFlags sim_flags;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Monte Carlo estimate of the growth rate under a policy");
    simulate->add_option("model", sim_model, "model JSON file")->required();
    simulate->add_option("--out", sim_flags.out_dir, "output directory")->required();
    simulate->add_option("--policy", sim_flags.policy,
                         "'optimal' (needs a prior solve in --out) or 'never'");
    simulate->add_option("--horizon", sim_flags.horizon, "time horizon T");
    simulate->add_option("--trajectories", sim_flags.trajectories, "sample count N");
    simulate->add_option("--seed", sim_flags.seed, "random seed");
    simulate->add_option("--start", sim_flags.start, "start state label or index");
    simulate->add_option("--grid-k", sim_flags.grid_k,
                         "decision-grid exponent (default: from the solve output)");
    simulate->add_flag("--decide-at-zero,!--no-decide-at-zero", sim_flags.decide_at_zero,
                       "consult the policy at t = 0 (default on)");
    simulate->add_flag("--jump-time-mode", sim_flags.jump_time_mode,
                       "decide at chain jump times instead of grid times");
    simulate->add_option("--bootstrap", sim_flags.bootstrap, "stderr resample count");
    simulate->add_option("--threads", sim_flags.threads, "worker threads (0 = auto)");
    simulate->add_flag("--normalize", sim_flags.normalize,
                       "shift the running cost to be nonpositive");
    simulate->callback([&] { rc = rsic::cmd_simulate(sim_model, sim_flags); });

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "emit plot-ready CSVs from a run directory");
    report->add_option("dir", report_dir, "run directory")->required();
    report->callback([&] { rc = rsic::cmd_report(report_dir); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? rsic::kExitOk : rsic::kExitError;
    }
    return rc;
}
