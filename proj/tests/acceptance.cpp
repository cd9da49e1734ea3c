// Acceptance suite: one line per criterion, PASS/FAIL plus measured detail.
// Exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "rsic/bellman.hpp"
#include "rsic/eigensolver.hpp"
#include "rsic/errors.hpp"
#include "rsic/linalg.hpp"
#include "rsic/model.hpp"
#include "rsic/policy_oracle.hpp"
#include "rsic/propagator.hpp"
#include "rsic/simulator.hpp"
#include "rsic/stopping.hpp"
#include "support/models.hpp"

using nlohmann::json;

namespace {

constexpr int kCorpusSize = 50;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

struct SolvedCase {
    rsic::ModelSpec spec;
    rsic::EigenSolution sol;
};

int g_failures = 0;

void report(int index, bool pass, const std::string& description, const std::string& detail) {
    std::printf("AC-%d %s %s (%s)\n", index, pass ? "PASS" : "FAIL", description.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

std::string fresh_dir() {
    char tmpl[] = "/tmp/rsic_acc_XXXXXX";
    const char* dir = mkdtemp(tmpl);
    if (!dir)
        throw std::runtime_error("mkdtemp failed");
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RSIC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1)
        throw std::runtime_error("std::system failed");
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good())
        throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Growth rate of a policy when a relocation is allowed to trigger the
// target's own relocation within the same decision instant: jump chains are
// followed to their terminal state with costs accumulated. Cyclic chains
// have value -inf and are reported as unusable.
bool chained_growth_rate(const rsic::ModelSpec& spec, const std::vector<int>& action, int k,
                         double* out) {
    const double delta = std::ldexp(1.0, -k);
    const Eigen::MatrixXd K = rsic::weighted_kernel(spec, delta, 0.0).matrix;
    const int n = spec.n();
    Eigen::MatrixXd A(n, n);
    for (int x = 0; x < n; ++x) {
        if (action[x] < 0) {
            A.row(x) = K.row(x);
            continue;
        }
        double cost = 0.0;
        int at = x;
        int hops = 0;
        while (action[at] >= 0) {
            const int target = spec.impulse_set[action[at]];
            cost += spec.shift_cost(at, action[at]);
            at = target;
            if (++hops > n)
                return false; // relocation cycle: the chained value is -inf
        }
        A.row(x) = std::exp(cost) * K.row(at);
    }
    const rsic::SpectralResult r = rsic::spectral_radius(A);
    if (!(r.rho > 0.0))
        return false;
    *out = std::log(r.rho) / delta;
    return true;
}

} // namespace

int main() {
    std::vector<rsic::ModelSpec> corpus;
    for (std::uint64_t seed = 1; corpus.size() < kCorpusSize; ++seed)
        corpus.push_back(testsup::random_model(seed));

    std::vector<SolvedCase> solved; // every (model, m, k) solution from AC-1
    std::vector<std::pair<rsic::ModelSpec, rsic::BellmanSolution>> full_solves;

    // AC-1: the solver agrees with brute-force policy enumeration on every
    // configured (level, grid) pair of the whole corpus. AC-9 piggybacks on
    // the same oracle tables.
    {
        Timer timer;
        bool pass = true;
        double worst = 0.0;
        long pairs = 0;
        std::string first_fail;
        double chain_worst = -1e300;
        long chained_rows = 0;
        bool chain_pass = true;
        std::string chain_fail;

        for (size_t i = 0; i < corpus.size() && pass; ++i) {
            const rsic::ModelSpec& spec = corpus[i];
            for (int m = 0; m < spec.chain_length(); ++m) {
                for (int k : spec.grid_levels) {
                    const rsic::EigenSolution sol = rsic::solve_one_step(spec, m, k);
                    const rsic::OracleResult oracle = rsic::oracle_lambda(spec, k, m);
                    const double diff = std::abs(sol.lambda - oracle.lambda);
                    worst = std::max(worst, diff);
                    ++pairs;
                    if (diff > 1e-8 && pass) {
                        pass = false;
                        first_fail = "model " + std::to_string(i) + " m=" + std::to_string(m) +
                                     " k=" + std::to_string(k) + " diff " + fmt(diff);
                    }
                    solved.push_back({spec, sol});

                    for (const rsic::OracleRow& row : oracle.table) {
                        bool chains = false;
                        for (int x = 0; x < spec.n() && !chains; ++x)
                            chains = row.action[x] >= 0 &&
                                     row.action[spec.impulse_set[row.action[x]]] >= 0;
                        if (!chains)
                            continue;
                        double value = 0.0;
                        if (!chained_growth_rate(spec, row.action, k, &value))
                            continue;
                        ++chained_rows;
                        chain_worst = std::max(chain_worst, value - oracle.lambda);
                        if (value > oracle.lambda + 1e-9 && chain_pass) {
                            chain_pass = false;
                            chain_fail = "model " + std::to_string(i) +
                                         " policy " + rsic::encode_policy(row.action) +
                                         " improves by " + fmt(value - oracle.lambda);
                        }
                    }
                }
            }
        }
        report(1, pass, "solver matches policy enumeration on the random corpus",
               pass ? std::to_string(kCorpusSize) + " models, " + std::to_string(pairs) +
                          " (m,k) pairs, max |diff| " + fmt(worst) + ", " +
                          fmt(timer.seconds()) + "s"
                    : first_fail);

        // AC-9 is reported in order below; stash the outcome.
        const bool ac9_pass = chain_pass;
        const std::string ac9_detail =
            chain_pass ? std::to_string(chained_rows) + " chained-jump policies, max gain " +
                             (chained_rows ? fmt(chain_worst) : std::string("n/a")) +
                             " (never positive beyond 1e-9)"
                       : chain_fail;

        // AC-2: every stored solution passes the independent fixed-point check.
        {
            Timer t2;
            for (const rsic::ModelSpec& spec : {testsup::m1(), testsup::m2(), testsup::m3()})
                for (int m = 0; m < spec.chain_length(); ++m)
                    for (int k : spec.grid_levels)
                        solved.push_back({spec, rsic::solve_one_step(spec, m, k)});

            bool p2 = true;
            double worst2 = 0.0;
            for (const SolvedCase& c : solved) {
                const double r = rsic::check_fixed_point(c.spec, c.sol).max_residual;
                worst2 = std::max(worst2, r);
                if (r > 1e-12)
                    p2 = false;
            }
            report(2, p2, "every solution satisfies its one-step equation",
                   std::to_string(solved.size()) + " solutions, max residual " + fmt(worst2) +
                       ", " + fmt(t2.seconds()) + "s");
        }

        // AC-3: supermartingale everywhere, martingale on the continuation region.
        {
            Timer t3;
            bool p3 = true;
            double excess = 0.0, resid = 0.0;
            for (const SolvedCase& c : solved) {
                const rsic::MartingaleReport rep = rsic::martingale_check(c.spec, c.sol);
                excess = std::max(excess, rep.supermartingale_excess);
                resid = std::max(resid, rep.martingale_residual);
                if (rep.supermartingale_excess > 1e-12 || rep.martingale_residual > 1e-12)
                    p3 = false;
            }
            report(3, p3, "conditional-expectation audit of every solution",
                   "max excess " + fmt(excess) + ", max continuation residual " + fmt(resid) +
                       ", " + fmt(t3.seconds()) + "s");
        }

        // AC-4: ladder monotonicity and bounds.
        {
            Timer t4;
            bool p4 = true;
            std::string why;
            long checked = 0;
            for (size_t i = 0; i < corpus.size() + 3; ++i) {
                const rsic::ModelSpec spec =
                    i < corpus.size() ? corpus[i]
                    : i == corpus.size()     ? testsup::m1()
                    : i == corpus.size() + 1 ? testsup::m2()
                                             : testsup::m3();
                const rsic::BellmanSolution sol = rsic::lambda_full(spec);
                ++checked;
                if (!sol.monotone_in_m && p4) {
                    p4 = false;
                    why = "lambda not monotone in m at model " + std::to_string(i);
                }
                if (!sol.degenerate && !sol.monotone_in_k && p4) {
                    p4 = false;
                    why = "full-level lambda not monotone in k at model " + std::to_string(i);
                }
                for (const rsic::EigenSolution& full : sol.full_per_k)
                    if (full.lambda < sol.r_f - 1e-9 && p4) {
                        p4 = false;
                        why = "full-level lambda below r(f) at model " + std::to_string(i);
                    }
                double top = -1e300;
                for (int u : spec.impulse_set)
                    top = std::max(top, sol.w(u));
                if (std::abs(top) > 1e-9 && p4) {
                    p4 = false;
                    why = "sup_U w = " + fmt(top) + " at model " + std::to_string(i);
                }
                full_solves.emplace_back(spec, sol);
            }
            report(4, p4, "monotone ladders, lambda >= r(f), normalized w",
                   p4 ? std::to_string(checked) + " full solves, " + fmt(t4.seconds()) + "s"
                      : why);
        }

        // AC-5: the stopping-iteration route reproduces w at the finest grid.
        {
            Timer t5;
            bool p5 = true;
            double worst5 = 0.0;
            long checked = 0;
            std::string why;
            for (const auto& [spec, sol] : full_solves) {
                // tiny spectral gaps need horizons ~ 1/gap; skip them to stay
                // inside the runtime budget (the hand models always qualify)
                if (sol.degenerate || sol.lambda - sol.r_f < 1e-3)
                    continue;
                const long steps =
                    std::min<long>(rsic::suggested_residual_horizon(sol), 500000);
                const double gap = rsic::bellman_residual(spec, sol, steps);
                worst5 = std::max(worst5, gap);
                ++checked;
                if (gap > 1e-8 && p5) {
                    p5 = false;
                    why = "two-route gap " + fmt(gap);
                }
            }
            report(5, p5, "eigen route and stopping route agree on w",
                   p5 ? std::to_string(checked) + " nondegenerate models, max gap " +
                            fmt(worst5) + ", " + fmt(t5.seconds()) + "s"
                      : why);
        }

        // AC-6: Monte Carlo under the certified policy reproduces lambda and
        // beats the uncontrolled chain.
        {
            Timer t6;
            const rsic::ModelSpec spec = testsup::m2();
            const rsic::BellmanSolution sol = rsic::lambda_full(spec);
            const rsic::Policy policy = rsic::strategy_from_solution(spec, sol);
            rsic::SimConfig cfg;
            cfg.horizon = 200.0;
            cfg.trajectories = 200000;
            cfg.seed = 20260817;
            cfg.grid_k = sol.finest_k;
            const rsic::JEstimate controlled = rsic::estimate_J(spec, policy, cfg);
            rsic::Policy never;
            never.action = {-1, -1};
            const rsic::JEstimate idle = rsic::estimate_J(spec, never, cfg);

            const double band = std::max(3.0 * controlled.std_error, 5e-3);
            const double sep =
                5.0 * std::sqrt(controlled.std_error * controlled.std_error +
                                idle.std_error * idle.std_error);
            const bool in_band = std::abs(controlled.point - sol.lambda) <= band;
            const bool separated = controlled.point - idle.point >= sep;
            report(6, in_band && separated,
                   "Monte Carlo estimate tracks lambda and beats no-control",
                   "J " + fmt(controlled.point) + " vs lambda " + fmt(sol.lambda) +
                       " (band " + fmt(band) + "), never-impulse " + fmt(idle.point) +
                       " (need +" + fmt(sep) + "), " + fmt(t6.seconds()) + "s");
        }

        // AC-7: degeneracy is flagged, exits with code 2, and emits no strategy.
        {
            Timer t7;
            bool p7 = true;
            std::string why;
            for (const char* name : {"m1", "m2_prohibitive"}) {
                const std::string out = fresh_dir();
                const std::string model = std::string(RSIC_MODELS_DIR) + "/" + name + ".json";
                const int code = run_cli("solve " + model + " --out " + out);
                if (code != 2) {
                    p7 = false;
                    why = std::string(name) + " exit code " + std::to_string(code);
                    break;
                }
                const json doc = json::parse(slurp(out + "/solution.json"));
                if (!doc["degenerate"].get<bool>() ||
                    std::abs(doc["lambda"].get<double>() - doc["r_f"].get<double>()) > 1e-9 ||
                    doc.contains("policy") || std::ifstream(out + "/policy.csv").good()) {
                    p7 = false;
                    why = std::string(name) + " emitted a strategy or mislabeled lambda";
                    break;
                }
            }
            if (p7) {
                // in-process guard refuses to read a policy off a degenerate solve
                try {
                    const rsic::ModelSpec spec = testsup::m1();
                    rsic::strategy_from_solution(spec, rsic::lambda_full(spec));
                    p7 = false;
                    why = "strategy_from_solution accepted a degenerate solution";
                } catch (const rsic::PreconditionError&) {
                }
            }
            report(7, p7, "degenerate models: exit 2, lambda = r(f), no strategy",
                   p7 ? "m1 and m2_prohibitive, " + fmt(t7.seconds()) + "s" : why);
        }

        // AC-8: shifting the running cost moves lambda by the shift and
        // nothing else.
        {
            Timer t8;
            bool p8 = true;
            std::string why;
            for (size_t i = 0; i < 10 && p8; ++i) {
                const rsic::ModelSpec& spec = corpus[i];
                rsic::ModelSpec shifted = spec;
                shifted.running_cost.array() -= 0.5;
                const auto [norm, offset] = rsic::normalize_running_cost(shifted.running_cost);
                rsic::ModelSpec renorm = spec;
                renorm.running_cost = norm;

                const rsic::BellmanSolution a = rsic::lambda_full(shifted);
                const rsic::BellmanSolution b = rsic::lambda_full(renorm);
                if (std::abs(a.lambda - (b.lambda + offset)) > 1e-10) {
                    p8 = false;
                    why = "model " + std::to_string(i) + " lambda mismatch " +
                          fmt(std::abs(a.lambda - (b.lambda + offset)));
                } else if ((a.w - b.w).cwiseAbs().maxCoeff() > 1e-10) {
                    p8 = false;
                    why = "model " + std::to_string(i) + " w mismatch";
                } else if (!a.degenerate && !b.degenerate &&
                           rsic::strategy_from_solution(spec, a).action !=
                               rsic::strategy_from_solution(spec, b).action) {
                    p8 = false;
                    why = "model " + std::to_string(i) + " policy changed under the offset";
                }
            }
            report(8, p8, "cost offsets shift lambda, preserve w and the policy",
                   p8 ? "10 models, " + fmt(t8.seconds()) + "s" : why);
        }

        report(9, ac9_pass, "same-instant jump chains never beat the collapsed jump",
               ac9_detail);

        // AC-10: identical inputs and seed give byte-identical artifacts.
        {
            Timer t10;
            bool p10 = true;
            std::string why;
            const std::string model = std::string(RSIC_MODELS_DIR) + "/m2.json";
            const std::string a = fresh_dir();
            const std::string b = fresh_dir();
            const std::string sim = " --horizon 20 --trajectories 500 --seed 77";
            if (run_cli("solve " + model + " --out " + a) != 0 ||
                run_cli("solve " + model + " --out " + b) != 0 ||
                run_cli("simulate " + model + " --out " + a + sim) != 0 ||
                run_cli("simulate " + model + " --out " + b + sim) != 0) {
                p10 = false;
                why = "a CLI invocation failed";
            } else {
                for (const char* f : {"ladder.csv", "convergence.csv", "w.csv", "policy.csv",
                                      "exponents.csv", "j_ladder.csv"}) {
                    if (slurp(a + "/" + f) != slurp(b + "/" + f)) {
                        p10 = false;
                        why = std::string(f) + " differs between identical runs";
                        break;
                    }
                }
            }
            report(10, p10, "reruns with the same inputs are byte-identical",
                   p10 ? "solve + simulate twice, 6 CSVs compared, " + fmt(t10.seconds()) + "s"
                       : why);
        }
    }

    if (g_failures == 0)
        std::printf("acceptance: all 10 criteria passed\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return g_failures;
}
