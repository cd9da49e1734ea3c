#include "rsic/cli_report.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "rsic/bellman.hpp"
#include "rsic/errors.hpp"
#include "rsic/model.hpp"
#include "rsic/policy_oracle.hpp"
#include "rsic/propagator.hpp"
#include "rsic/simulator.hpp"

namespace rsic {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out)
        throw IoError("failed writing " + path.string());
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string iso_utc_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

/// Merge one command's record into the run manifest; the manifest accumulates
/// a section per subcommand so one directory can hold a full solve + oracle +
/// simulate pipeline.
void update_manifest(const fs::path& out_dir, const std::string& model_path,
                     const std::string& section, json entry) {
    const fs::path path = out_dir / "manifest.json";
    json manifest = json::object();
    if (fs::exists(path)) {
        try {
            manifest = read_json_file(path);
        } catch (const Error&) {
            manifest = json::object();
        }
    }
    manifest["version"] = kVersion;
    manifest["model"] = {{"path", model_path}, {"fnv1a64", fnv1a_hex(model_path)}};
    manifest["updated_utc"] = iso_utc_now();
    manifest[section] = std::move(entry);
    write_text(path, manifest.dump(2) + "\n");
}

int resolve_state(const ModelSpec& spec, const std::string& text) {
    if (text.empty())
        return 0;
    const int by_label = spec.state_index(text);
    if (by_label >= 0)
        return by_label;
    try {
        std::size_t used = 0;
        const int idx = std::stoi(text, &used);
        if (used == text.size() && idx >= 0 && idx < spec.n())
            return idx;
    } catch (const std::exception&) {
    }
    throw PreconditionError("unknown state '" + text + "'");
}

ModelSpec load_and_validate(const std::string& model_path, bool normalize, double& offset) {
    ModelSpec spec = load_model(model_path);
    offset = 0.0;
    if (normalize) {
        auto [f, off] = normalize_running_cost(spec.running_cost);
        spec.running_cost = f;
        offset = off;
    }
    require_valid(spec);
    return spec;
}

std::string ladder_csv(const BellmanSolution& sol) {
    std::string csv = "m,k,delta,lambda,residual,iterations\n";
    for (const LadderEntry& e : sol.ladder)
        csv += std::to_string(e.m) + "," + std::to_string(e.k) + "," + g17(e.delta) + "," +
               g17(e.lambda) + "," + g17(e.residual) + "," + std::to_string(e.iterations) +
               "\n";
    return csv;
}

std::string convergence_csv(const BellmanSolution& sol) {
    std::string csv = "k,delta,lambda,lambda_gap,w_gap,mw_gap\n";
    for (const RefinementRow& r : sol.refinement)
        csv += std::to_string(r.k) + "," + g17(std::ldexp(1.0, -r.k)) + "," + g17(r.lambda) +
               "," + g17(r.lambda_gap) + "," + g17(r.w_gap) + "," + g17(r.mw_gap) + "\n";
    return csv;
}

std::string w_csv(const ModelSpec& spec, const Eigen::VectorXd& w, const Eigen::VectorXd& mw) {
    std::string csv = "state,w,Mw\n";
    for (int x = 0; x < spec.n(); ++x)
        csv += spec.states[x] + "," + g17(w(x)) + "," + g17(mw(x)) + "\n";
    return csv;
}

std::string policy_csv(const ModelSpec& spec, const Policy& policy) {
    std::string csv = "state,action,target\n";
    for (int x = 0; x < spec.n(); ++x) {
        const int a = policy.action[x];
        csv += spec.states[x] + "," + std::to_string(a) + "," +
               (a >= 0 ? spec.states[spec.impulse_set[a]] : std::string()) + "\n";
    }
    return csv;
}

} // namespace

std::string fnv1a_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path + " for hashing");
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char chunk[4096];
    while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(chunk[i]);
            hash *= 0x100000001b3ULL;
        }
        if (!in)
            break;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

int cmd_solve(const std::string& model_path, const SolveFlags& flags) {
    try {
        if (flags.out_dir.empty())
            throw PreconditionError("--out directory is required");
        double offset = 0.0;
        ModelSpec spec = load_and_validate(model_path, flags.normalize, offset);
        BellmanSolution sol = lambda_full(spec, flags.opts);

        const fs::path out(flags.out_dir);
        fs::create_directories(out);

        json doc;
        doc["version"] = kVersion;
        doc["lambda"] = sol.lambda;
        doc["r_f"] = sol.r_f;
        doc["degenerate"] = sol.degenerate;
        doc["finest_k"] = sol.finest_k;
        doc["finest_delta"] = sol.finest_delta;
        doc["monotone_in_m"] = sol.monotone_in_m;
        doc["monotone_in_k"] = sol.monotone_in_k;
        doc["states"] = spec.states;
        doc["w"] = to_std(sol.w);
        doc["Mw"] = to_std(sol.Mw);
        doc["options"] = {{"tol", flags.opts.tol},
                          {"max_iters", flags.opts.max_iters},
                          {"degeneracy_margin", flags.opts.degeneracy_margin}};
        doc["normalize"] = flags.normalize;
        if (flags.normalize) {
            doc["offset"] = offset;
            doc["lambda_raw"] = sol.lambda + offset;
        }
        json ladder = json::array();
        for (const LadderEntry& e : sol.ladder)
            ladder.push_back({{"m", e.m},
                              {"k", e.k},
                              {"delta", e.delta},
                              {"lambda", e.lambda},
                              {"residual", e.residual},
                              {"iterations", e.iterations}});
        doc["ladder"] = std::move(ladder);
        json per_k = json::array();
        for (const EigenSolution& s : sol.full_per_k)
            per_k.push_back({{"k", s.k}, {"delta", s.delta}, {"lambda", s.lambda}});
        doc["lambda_per_k"] = std::move(per_k);

        std::vector<std::string> outputs = {"solution.json", "ladder.csv", "convergence.csv",
                                            "w.csv"};
        if (!sol.degenerate) {
            Policy policy = strategy_from_solution(spec, sol, flags.strategy_tol);
            json targets = json::array();
            for (int a : policy.action)
                targets.push_back(a >= 0 ? json(spec.states[spec.impulse_set[a]]) : json());
            doc["policy"] = {{"actions", policy.action},
                             {"encoded", encode_policy(policy.action)},
                             {"targets", std::move(targets)}};
            write_text(out / "policy.csv", policy_csv(spec, policy));
            outputs.push_back("policy.csv");
        }

        write_text(out / "solution.json", doc.dump(2) + "\n");
        write_text(out / "ladder.csv", ladder_csv(sol));
        write_text(out / "convergence.csv", convergence_csv(sol));
        write_text(out / "w.csv", w_csv(spec, sol.w, sol.Mw));

        json entry = {{"options", doc["options"]},
                      {"normalize", flags.normalize},
                      {"grid_levels", spec.grid_levels},
                      {"outputs", outputs}};
        update_manifest(out, model_path, "solve", std::move(entry));

        std::cout << "lambda = " << g17(sol.lambda) << "\n";
        if (flags.normalize)
            std::cout << "lambda_raw = " << g17(sol.lambda + offset) << " (offset " << g17(offset)
                      << ")\n";
        std::cout << "r(f) = " << g17(sol.r_f) << "\n";
        std::cout << "degenerate = " << (sol.degenerate ? "true" : "false") << "\n";
        std::cout << "wrote " << out.string() << "\n";
        return sol.degenerate ? kExitDegenerate : kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_oracle(const std::string& model_path, const OracleFlags& flags) {
    try {
        if (flags.out_dir.empty())
            throw PreconditionError("--out directory is required");
        double offset = 0.0;
        ModelSpec spec = load_and_validate(model_path, flags.normalize, offset);
        const int k = flags.grid_k >= 0 ? flags.grid_k : spec.finest_level();
        const int level = flags.level >= 0 ? flags.level : spec.chain_length() - 1;
        if (level >= spec.chain_length())
            throw PreconditionError("--level exceeds the exhaustion chain");

        OracleResult res = oracle_lambda(spec, k, level, flags.cap);

        const fs::path out(flags.out_dir);
        fs::create_directories(out);

        std::string csv = "policy,value,reducible";
        for (const std::string& s : spec.states)
            csv += ",g_" + s;
        csv += "\n";
        for (const OracleRow& row : res.table) {
            csv += encode_policy(row.action) + "," + g17(row.value) + "," +
                   (row.reducible ? "1" : "0");
            for (int x = 0; x < spec.n(); ++x)
                csv += "," + g17(row.per_state(x));
            csv += "\n";
        }
        write_text(out / "oracle.csv", csv);

        json doc;
        doc["version"] = kVersion;
        doc["k"] = k;
        doc["delta"] = std::ldexp(1.0, -k);
        doc["level"] = level;
        doc["lambda"] = res.lambda;
        doc["best_policy"] = encode_policy(res.best.action);
        doc["best_actions"] = res.best.action;
        doc["enumerated"] = res.enumerated;
        doc["reducible"] = res.reducible;
        doc["normalize"] = flags.normalize;
        if (flags.normalize)
            doc["offset"] = offset;

        bool compared = false;
        bool within = true;
        double reference = 0.0;
        const fs::path solution_path = out / "solution.json";
        if (fs::exists(solution_path)) {
            json sol = read_json_file(solution_path);
            for (const json& row : sol.value("ladder", json::array())) {
                if (row.value("m", -1) == level && row.value("k", -1) == k) {
                    compared = true;
                    reference = row.value("lambda", 0.0);
                    break;
                }
            }
            if (compared) {
                const double diff = res.lambda - reference;
                within = std::abs(diff) <= flags.compare_tol;
                doc["comparison"] = {{"reference_lambda", reference},
                                     {"diff", diff},
                                     {"tol", flags.compare_tol},
                                     {"within_tol", within}};
            }
        }
        write_text(out / "oracle_summary.json", doc.dump(2) + "\n");

        json entry = {{"k", k},
                      {"level", level},
                      {"cap", flags.cap},
                      {"compare_tol", flags.compare_tol},
                      {"outputs", {"oracle.csv", "oracle_summary.json"}}};
        update_manifest(out, model_path, "oracle", std::move(entry));

        std::cout << "oracle lambda = " << g17(res.lambda) << " (" << res.enumerated
                  << " policies)\n";
        if (compared)
            std::cout << "solve lambda = " << g17(reference) << ", diff = "
                      << g17(res.lambda - reference) << (within ? " (ok)" : " (MISMATCH)")
                      << "\n";
        std::cout << "wrote " << out.string() << "\n";
        return compared && !within ? kExitOracleMismatch : kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_simulate(const std::string& model_path, const SimulateFlags& flags) {
    try {
        if (flags.out_dir.empty())
            throw PreconditionError("--out directory is required");
        double offset = 0.0;
        ModelSpec spec = load_and_validate(model_path, flags.normalize, offset);
        const fs::path out(flags.out_dir);

        Policy policy;
        policy.level = spec.chain_length() - 1;
        int default_k = spec.finest_level();
        if (flags.policy == "never") {
            policy.action.assign(spec.n(), -1);
        } else if (flags.policy == "optimal") {
            const fs::path solution_path = out / "solution.json";
            if (!fs::exists(solution_path))
                throw PreconditionError(
                    "no solve output in " + out.string() + "; run solve first");
            json sol = read_json_file(solution_path);
            if (!sol.contains("policy"))
                throw PreconditionError(
                    "the solve output is degenerate and carries no strategy; "
                    "use --policy never");
            policy.action = sol["policy"]["actions"].get<std::vector<int>>();
            default_k = sol.value("finest_k", default_k);
        } else {
            throw PreconditionError("--policy must be 'optimal' or 'never'");
        }

        SimConfig config;
        config.horizon = flags.horizon;
        config.trajectories = flags.trajectories;
        config.seed = flags.seed;
        config.start = resolve_state(spec, flags.start);
        config.grid_k = flags.grid_k >= 0 ? flags.grid_k : default_k;
        config.decide_at_zero = flags.decide_at_zero;
        config.jump_time_mode = flags.jump_time_mode;
        config.bootstrap = flags.bootstrap;
        config.threads = flags.threads;

        JEstimate est = estimate_J(spec, policy, config);

        fs::create_directories(out);
        json doc;
        doc["version"] = kVersion;
        doc["policy"] = flags.policy;
        doc["actions"] = policy.action;
        doc["point"] = est.point;
        doc["std_error"] = est.std_error;
        doc["horizon"] = est.horizon;
        doc["trajectories"] = est.trajectories;
        doc["seed"] = flags.seed;
        doc["start"] = spec.states[config.start];
        doc["grid_k"] = config.grid_k;
        doc["delta"] = std::ldexp(1.0, -config.grid_k);
        doc["decide_at_zero"] = config.decide_at_zero;
        doc["jump_time_mode"] = config.jump_time_mode;
        doc["bootstrap"] = config.bootstrap;
        doc["normalize"] = flags.normalize;
        if (flags.normalize)
            doc["offset"] = offset;
        doc["ladder_T"] = est.ladder_T;
        doc["ladder_point"] = est.ladder_point;
        json imp = {{"min_rate", est.impulses.min_rate},
                    {"mean_rate", est.impulses.mean_rate},
                    {"max_rate", est.impulses.max_rate},
                    {"max_burst", est.impulses.max_burst},
                    {"total_impulses", est.impulses.total_impulses}};
        if (std::isfinite(est.impulses.hard_cap))
            imp["hard_cap"] = est.impulses.hard_cap;
        doc["impulses"] = std::move(imp);
        write_text(out / "estimate.json", doc.dump(2) + "\n");

        std::string expo_csv = "index,exponent\n";
        for (std::size_t i = 0; i < est.exponents.size(); ++i)
            expo_csv += std::to_string(i) + "," + g17(est.exponents[i]) + "\n";
        write_text(out / "exponents.csv", expo_csv);

        std::string ladder_csv = "T,point\n";
        for (std::size_t c = 0; c < est.ladder_T.size(); ++c)
            ladder_csv += g17(est.ladder_T[c]) + "," + g17(est.ladder_point[c]) + "\n";
        write_text(out / "j_ladder.csv", ladder_csv);

        json entry = {{"policy", flags.policy},
                      {"horizon", flags.horizon},
                      {"trajectories", flags.trajectories},
                      {"seed", flags.seed},
                      {"grid_k", config.grid_k},
                      {"decide_at_zero", config.decide_at_zero},
                      {"jump_time_mode", config.jump_time_mode},
                      {"bootstrap", config.bootstrap},
                      {"outputs", {"estimate.json", "exponents.csv", "j_ladder.csv"}}};
        update_manifest(out, model_path, "simulate", std::move(entry));

        std::cout << "J = " << g17(est.point) << "\n";
        std::cout << "stderr = " << g17(est.std_error) << "\n";
        std::cout << "impulse rate mean = " << g17(est.impulses.mean_rate) << ", max burst = "
                  << est.impulses.max_burst << "\n";
        std::cout << "wrote " << out.string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_report(const std::string& run_dir) {
    try {
        const fs::path dir(run_dir);
        const fs::path solution_path = dir / "solution.json";
        if (!fs::exists(solution_path))
            throw IoError("no solution.json in " + dir.string() + "; run solve first");
        json sol = read_json_file(solution_path);

        std::string vs_m = "m,k,delta,lambda\n";
        for (const json& row : sol.value("ladder", json::array()))
            vs_m += std::to_string(row.value("m", 0)) + "," + std::to_string(row.value("k", 0)) +
                    "," + g17(row.value("delta", 0.0)) + "," + g17(row.value("lambda", 0.0)) +
                    "\n";
        write_text(dir / "lambda_vs_m.csv", vs_m);

        std::string vs_k = "k,delta,lambda\n";
        for (const json& row : sol.value("lambda_per_k", json::array()))
            vs_k += std::to_string(row.value("k", 0)) + "," + g17(row.value("delta", 0.0)) +
                    "," + g17(row.value("lambda", 0.0)) + "\n";
        write_text(dir / "lambda_vs_k.csv", vs_k);

        const auto states = sol.value("states", std::vector<std::string>{});
        const auto w = sol.value("w", std::vector<double>{});
        const auto mw = sol.value("Mw", std::vector<double>{});
        if (states.size() != w.size() || states.size() != mw.size())
            throw ParseError("solution.json state/w/Mw lengths disagree");
        std::string profile = "state,w,Mw\n";
        for (std::size_t x = 0; x < states.size(); ++x)
            profile += states[x] + "," + g17(w[x]) + "," + g17(mw[x]) + "\n";
        write_text(dir / "w_profile.csv", profile);

        int files = 3;
        const fs::path estimate_path = dir / "estimate.json";
        if (fs::exists(estimate_path)) {
            json est = read_json_file(estimate_path);
            const auto ts = est.value("ladder_T", std::vector<double>{});
            const auto pts = est.value("ladder_point", std::vector<double>{});
            if (ts.size() != pts.size())
                throw ParseError("estimate.json ladder lengths disagree");
            std::string j_vs_t = "T,point\n";
            for (std::size_t c = 0; c < ts.size(); ++c)
                j_vs_t += g17(ts[c]) + "," + g17(pts[c]) + "\n";
            write_text(dir / "j_vs_T.csv", j_vs_t);
            ++files;
        }

        std::cout << "wrote " << files << " report files to " << dir.string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

} // namespace rsic
