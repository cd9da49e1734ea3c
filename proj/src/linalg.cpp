#include "rsic/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "rsic/errors.hpp"

namespace rsic {

namespace {

// Iterative Tarjan; recursion depth would be fine at this scale but an
// explicit stack keeps it safe for large chains too.
struct Tarjan {
    const Eigen::MatrixXd& A;
    int n;
    std::vector<int> index, low, comp;
    std::vector<bool> on_stack;
    std::vector<int> stack;
    int next_index = 0, next_comp = 0;

    explicit Tarjan(const Eigen::MatrixXd& a)
        : A(a), n(static_cast<int>(a.rows())), index(n, -1), low(n, 0), comp(n, -1),
          on_stack(n, false) {}

    void run(int root) {
        struct Frame {
            int v;
            int next_child;
        };
        std::vector<Frame> call;
        call.push_back({root, 0});
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& fr = call.back();
            const int v = fr.v;
            bool descended = false;
            while (fr.next_child < n) {
                const int w = fr.next_child++;
                if (A(v, w) <= 0.0)
                    continue;
                if (index[w] < 0) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w])
                    low[v] = std::min(low[v], index[w]);
            }
            if (descended)
                continue;
            if (low[v] == index[v]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = next_comp;
                } while (w != v);
                ++next_comp;
            }
            call.pop_back();
            if (!call.empty())
                low[call.back().v] = std::min(low[call.back().v], low[v]);
        }
    }
};

// Collatz-Wielandt power iteration on one irreducible block, made primitive
// by a diagonal shift when needed. Returns the block spectral radius.
double block_rho(const Eigen::MatrixXd& B, double tol, long& iterations) {
    const int m = static_cast<int>(B.rows());
    if (m == 1)
        return B(0, 0);

    double shift = 0.0;
    if (B.diagonal().minCoeff() <= 0.0)
        shift = B.sum() / static_cast<double>(m); // any positive shift restores aperiodicity
    if (shift <= 0.0)
        shift = 0.0;
    Eigen::MatrixXd Bs = B;
    Bs.diagonal().array() += shift;

    Eigen::VectorXd v = Eigen::VectorXd::Ones(m);
    double best_spread = std::numeric_limits<double>::infinity();
    long stall = 0;
    const long max_iters = 2000000;
    for (long it = 0; it < max_iters; ++it) {
        Eigen::VectorXd u = Bs * v;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int i = 0; i < m; ++i) {
            const double r = v(i) > 0.0 ? u(i) / v(i) : std::numeric_limits<double>::infinity();
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        ++iterations;
        const double spread = hi - lo;
        if (v.minCoeff() > 0.0 && spread <= tol * std::max(hi, 1e-300))
            return std::sqrt(lo * hi) - shift;
        if (spread < best_spread * (1.0 - 1e-3)) {
            best_spread = spread;
            stall = 0;
        } else if (++stall > 5000) {
            break; // bracket stopped contracting, go dense
        }
        const double norm = u.maxCoeff();
        if (!(norm > 0.0) || !std::isfinite(norm))
            break;
        v = u / norm;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(Bs, false);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("dense eigensolve failed on a reducible block");
    return es.eigenvalues().cwiseAbs().maxCoeff() - shift;
}

} // namespace

SccDecomposition positivity_scc(const Eigen::MatrixXd& A) {
    Tarjan t(A);
    for (int v = 0; v < t.n; ++v)
        if (t.index[v] < 0)
            t.run(v);
    return {t.comp, t.next_comp};
}

SpectralResult spectral_radius(const Eigen::MatrixXd& A, double tol) {
    const int n = static_cast<int>(A.rows());
    if (n == 0)
        throw PreconditionError("spectral radius of an empty matrix");
    if (A.minCoeff() < 0.0)
        throw PreconditionError("spectral radius helper requires a nonnegative matrix");

    SpectralResult res;
    const auto scc = positivity_scc(A);
    res.reducible = scc.count > 1;

    std::vector<std::vector<int>> members(scc.count);
    for (int v = 0; v < n; ++v)
        members[scc.comp[v]].push_back(v);

    std::vector<double> comp_rho(scc.count, 0.0);
    for (int c = 0; c < scc.count; ++c) {
        const auto& idx = members[c];
        Eigen::MatrixXd B(idx.size(), idx.size());
        for (size_t i = 0; i < idx.size(); ++i)
            for (size_t j = 0; j < idx.size(); ++j)
                B(i, j) = A(idx[i], idx[j]);
        comp_rho[c] = block_rho(B, tol, res.iterations);
    }

    // Tarjan ids come in reverse topological order: edges go to smaller ids,
    // so a single ascending sweep accumulates the reachable maximum.
    std::vector<double> reach = comp_rho;
    for (int c = 0; c < scc.count; ++c)
        for (int v : members[c])
            for (int w = 0; w < n; ++w)
                if (A(v, w) > 0.0 && scc.comp[w] != c)
                    reach[c] = std::max(reach[c], reach[scc.comp[w]]);

    res.per_state.resize(n);
    for (int v = 0; v < n; ++v)
        res.per_state(v) = reach[scc.comp[v]];
    res.rho = *std::max_element(comp_rho.begin(), comp_rho.end());
    return res;
}

} // namespace rsic
