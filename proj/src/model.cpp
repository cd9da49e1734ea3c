#include "rsic/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rsic/errors.hpp"

namespace rsic {

using nlohmann::json;

int ModelSpec::state_index(const std::string& label) const {
    auto it = std::find(states.begin(), states.end(), label);
    if (it == states.end())
        throw ParseError("unknown state label '" + label + "'");
    return static_cast<int>(it - states.begin());
}

namespace {

const json& field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end())
        throw ParseError(std::string("missing required key '") + key + "'");
    return *it;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number())
        throw ParseError("expected a number in " + where);
    return j.get<double>();
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty())
        throw ParseError(name + " must be a nonempty list of rows");
    const auto rows = j.size();
    const auto cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0)
        throw ParseError(name + " rows must be nonempty lists");
    Eigen::MatrixXd M(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ParseError(name + " row " + std::to_string(r) + " has length " +
                             std::to_string(j[r].size()) + ", expected " + std::to_string(cols));
        for (size_t c = 0; c < cols; ++c)
            M(r, c) = as_number(j[r][c], name + " row " + std::to_string(r));
    }
    return M;
}

} // namespace

ModelSpec model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("malformed model JSON: ") + ex.what());
    }
    if (!j.is_object())
        throw ParseError("model file must hold a JSON object");

    static const std::set<std::string> known = {
        "states",       "generator",        "running_cost", "impulse_set",
        "shift_cost",   "exhaustion_chain", "grid_levels"};
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            throw ParseError("unknown key '" + item.key() + "'");

    ModelSpec spec;

    const json& js = field(j, "states");
    if (!js.is_array() || js.empty())
        throw ParseError("states must be a nonempty list of labels");
    for (const auto& s : js) {
        if (!s.is_string())
            throw ParseError("states entries must be strings");
        spec.states.push_back(s.get<std::string>());
    }
    const int n = spec.n();

    spec.generator = as_matrix(field(j, "generator"), "generator");
    if (spec.generator.rows() != n || spec.generator.cols() != n)
        throw ParseError("generator must be " + std::to_string(n) + "x" + std::to_string(n) +
                         ", got " + std::to_string(spec.generator.rows()) + "x" +
                         std::to_string(spec.generator.cols()));

    const json& jf = field(j, "running_cost");
    if (!jf.is_array() || static_cast<int>(jf.size()) != n)
        throw ParseError("running_cost must list one number per state");
    spec.running_cost.resize(n);
    for (int i = 0; i < n; ++i)
        spec.running_cost(i) = as_number(jf[i], "running_cost");

    const json& ju = field(j, "impulse_set");
    if (!ju.is_array() || ju.empty())
        throw ParseError("impulse_set must be a nonempty list of state labels");
    for (const auto& s : ju) {
        if (!s.is_string())
            throw ParseError("impulse_set entries must be state labels");
        spec.impulse_set.push_back(spec.state_index(s.get<std::string>()));
    }

    spec.shift_cost = as_matrix(field(j, "shift_cost"), "shift_cost");
    if (spec.shift_cost.rows() != n || spec.shift_cost.cols() != spec.impulse_count())
        throw ParseError("shift_cost must be " + std::to_string(n) + "x" +
                         std::to_string(spec.impulse_count()) + " (rows by impulse targets), got " +
                         std::to_string(spec.shift_cost.rows()) + "x" +
                         std::to_string(spec.shift_cost.cols()));

    const json& jc = field(j, "exhaustion_chain");
    if (!jc.is_array() || jc.empty())
        throw ParseError("exhaustion_chain must be a nonempty list of state-label lists");
    for (const auto& lvl : jc) {
        if (!lvl.is_array() || lvl.empty())
            throw ParseError("exhaustion_chain levels must be nonempty label lists");
        std::vector<int> ids;
        for (const auto& s : lvl) {
            if (!s.is_string())
                throw ParseError("exhaustion_chain entries must be state labels");
            ids.push_back(spec.state_index(s.get<std::string>()));
        }
        std::sort(ids.begin(), ids.end());
        spec.exhaustion_chain.push_back(std::move(ids));
    }

    const json& jg = field(j, "grid_levels");
    if (!jg.is_array() || jg.empty())
        throw ParseError("grid_levels must be a nonempty list of nonnegative integers");
    for (const auto& g : jg) {
        if (!g.is_number_integer() || g.get<long>() < 0)
            throw ParseError("grid_levels entries must be nonnegative integers");
        spec.grid_levels.push_back(g.get<int>());
    }

    return spec;
}

ModelSpec load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

std::vector<std::string> validate_model(const ModelSpec& spec) {
    constexpr double kTol = 1e-12;
    std::vector<std::string> bad;
    const int n = spec.n();
    const int nu = spec.impulse_count();

    if (n == 0) {
        bad.push_back("no states");
        return bad;
    }
    {
        std::set<std::string> uniq(spec.states.begin(), spec.states.end());
        if (static_cast<int>(uniq.size()) != n)
            bad.push_back("state labels are not unique");
    }

    if (spec.generator.rows() != n || spec.generator.cols() != n) {
        bad.push_back("generator shape mismatch");
        return bad;
    }
    for (int x = 0; x < n; ++x) {
        double row = 0.0;
        for (int y = 0; y < n; ++y) {
            row += spec.generator(x, y);
            if (x != y && spec.generator(x, y) < -kTol)
                bad.push_back("generator(" + std::to_string(x) + "," + std::to_string(y) +
                              ") is a negative off-diagonal rate");
        }
        if (std::abs(row) > kTol * std::max(1.0, spec.generator.cwiseAbs().maxCoeff()))
            bad.push_back("generator row " + std::to_string(x) + " sums to " + std::to_string(row));
    }

    if (spec.running_cost.size() != n)
        bad.push_back("running_cost length mismatch");
    else
        for (int x = 0; x < n; ++x)
            if (spec.running_cost(x) > kTol)
                bad.push_back("running_cost(" + std::to_string(x) + ") is positive; shift it first");

    if (nu == 0)
        bad.push_back("impulse_set is empty");
    for (int j = 0; j < nu; ++j) {
        if (spec.impulse_set[j] < 0 || spec.impulse_set[j] >= n)
            bad.push_back("impulse_set index out of range");
        if (j > 0 && spec.impulse_set[j] <= spec.impulse_set[j - 1])
            bad.push_back("impulse_set indices must be strictly increasing");
    }

    if (spec.shift_cost.rows() != n || spec.shift_cost.cols() != nu) {
        bad.push_back("shift_cost shape mismatch");
    } else {
        for (int x = 0; x < n; ++x)
            for (int j = 0; j < nu; ++j)
                if (spec.shift_cost(x, j) >= 0.0)
                    bad.push_back("shift_cost(" + std::to_string(x) + "," + std::to_string(j) +
                                  ") must be strictly negative");
        // triangle inequality over impulse targets: direct move beats any relay
        for (int x = 0; x < n && nu > 0; ++x)
            for (int jmid = 0; jmid < nu; ++jmid)
                for (int jdst = 0; jdst < nu; ++jdst) {
                    const int mid = spec.impulse_set[jmid];
                    const double direct = spec.shift_cost(x, jdst);
                    const double relay = spec.shift_cost(x, jmid) + spec.shift_cost(mid, jdst);
                    if (direct < relay - kTol) {
                        bad.push_back("shift_cost violates the triangle inequality at state " +
                                      std::to_string(x) + " via target " + std::to_string(jmid));
                        jmid = jdst = nu; // one report per state is enough
                    }
                }
    }

    const int M = spec.chain_length() - 1;
    if (M < 0) {
        bad.push_back("exhaustion_chain is empty");
        return bad;
    }
    for (int m = 0; m <= M; ++m) {
        const auto& B = spec.exhaustion_chain[m];
        for (int x : B)
            if (x < 0 || x >= n)
                bad.push_back("exhaustion_chain level " + std::to_string(m) + " index out of range");
        for (size_t i = 1; i < B.size(); ++i)
            if (B[i] == B[i - 1])
                bad.push_back("exhaustion_chain level " + std::to_string(m) + " repeats a state");
        if (m > 0) {
            const auto& prev = spec.exhaustion_chain[m - 1];
            if (!std::includes(B.begin(), B.end(), prev.begin(), prev.end()) ||
                B.size() <= prev.size())
                bad.push_back("exhaustion_chain levels must strictly grow (level " +
                              std::to_string(m) + ")");
        }
    }
    {
        const auto& B0 = spec.exhaustion_chain.front();
        for (int u : spec.impulse_set)
            if (!std::binary_search(B0.begin(), B0.end(), u))
                bad.push_back("impulse_set must lie inside the first exhaustion level");
        if (static_cast<int>(spec.exhaustion_chain.back().size()) != n)
            bad.push_back("last exhaustion level must contain every state");
    }
    // escape property: every state of B_m (m < M) reaches the complement along
    // positive rates, so exits happen with positive probability
    for (int m = 0; m < M; ++m) {
        const auto& B = spec.exhaustion_chain[m];
        std::vector<bool> in_b(n, false);
        for (int x : B)
            in_b[x] = true;
        std::vector<bool> escapes(n, false);
        for (int x = 0; x < n; ++x)
            escapes[x] = !in_b[x];
        bool grew = true;
        while (grew) {
            grew = false;
            for (int x : B)
                if (!escapes[x])
                    for (int y = 0; y < n; ++y)
                        if (y != x && spec.generator(x, y) > 0.0 && escapes[y]) {
                            escapes[x] = true;
                            grew = true;
                            break;
                        }
        }
        for (int x : B)
            if (!escapes[x])
                bad.push_back("state " + std::to_string(x) + " cannot leave exhaustion level " +
                              std::to_string(m));
    }

    if (spec.grid_levels.empty())
        bad.push_back("grid_levels is empty");
    for (size_t i = 0; i < spec.grid_levels.size(); ++i) {
        if (spec.grid_levels[i] < 0)
            bad.push_back("grid_levels entries must be nonnegative");
        if (i > 0 && spec.grid_levels[i] <= spec.grid_levels[i - 1])
            bad.push_back("grid_levels must be strictly increasing");
    }

    return bad;
}

void require_valid(const ModelSpec& spec) {
    auto bad = validate_model(spec);
    if (bad.empty())
        return;
    std::string msg = "invalid model:";
    for (const auto& b : bad)
        msg += "\n  - " + b;
    throw ValidationError(msg);
}

std::pair<Eigen::VectorXd, double> normalize_running_cost(const Eigen::VectorXd& raw) {
    const double offset = raw.size() ? raw.cwiseAbs().maxCoeff() : 0.0;
    return {raw.array() - offset, offset};
}

} // namespace rsic
