#include "rsic/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "rsic/errors.hpp"

namespace rsic {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state += kGolden);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::exponential(double rate) {
    if (rate <= 0.0)
        return kInf;
    return -std::log1p(-uniform()) / rate;
}

SplitMix64 derived_stream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 s;
    s.state = mix64(seed + kGolden) ^ mix64((index + 1) * kGolden);
    return s;
}

namespace {

void validate_config(const ModelSpec& spec, const Policy& policy, const SimConfig& config) {
    if (!(config.horizon > 0.0) || !std::isfinite(config.horizon))
        throw PreconditionError("simulation horizon must be positive and finite");
    if (config.trajectories < 1)
        throw PreconditionError("at least one trajectory is required");
    if (config.start < 0 || config.start >= spec.n())
        throw PreconditionError("start state index out of range");
    if (config.grid_k < 0 || config.grid_k > 60)
        throw PreconditionError("grid exponent must lie in [0, 60]");
    if (config.bootstrap < 0)
        throw PreconditionError("bootstrap resample count must be nonnegative");
    if (policy.n() != spec.n())
        throw PreconditionError("policy length does not match the state count");
    for (int a : policy.action)
        if (a >= spec.impulse_count())
            throw PreconditionError("policy action exceeds the impulse set");
}

std::vector<double> resolve_checkpoints(const SimConfig& config) {
    std::vector<double> cps = config.checkpoints;
    if (cps.empty()) {
        const double T = config.horizon;
        cps = {0.25 * T, 0.5 * T, 0.75 * T, T};
    }
    double prev = 0.0;
    for (double t : cps) {
        if (!(t > prev) || t > config.horizon)
            throw PreconditionError("checkpoints must be strictly increasing within (0, horizon]");
        prev = t;
    }
    return cps;
}

int sample_destination(const Eigen::MatrixXd& Q, int x, double rate, double u) {
    const int n = static_cast<int>(Q.rows());
    const double target = u * rate;
    double cum = 0.0;
    int last = x;
    for (int y = 0; y < n; ++y) {
        if (y == x || Q(x, y) <= 0.0)
            continue;
        cum += Q(x, y);
        last = y;
        if (target < cum)
            return y;
    }
    return last;
}

/// Event-driven core shared by the single-trajectory op and the batch runner.
/// Event priority at equal times: decision first, then checkpoint, then chain
/// jump; each loop pass handles one event, so a decision that relocates the
/// state refreshes the pending jump before the jump branch can see it.
void simulate_core(const ModelSpec& spec, const Policy& policy, const SimConfig& config,
                   const std::vector<double>& cps, long index, double& exponent_out,
                   std::vector<double>* impulse_times, double* checkpoint_out,
                   long& impulse_count_out, long& max_burst_out) {
    SplitMix64 rng = derived_stream(config.seed, static_cast<std::uint64_t>(index));
    const double T = config.horizon;
    const double delta = std::ldexp(1.0, -config.grid_k);
    const Eigen::MatrixXd& Q = spec.generator;
    const Eigen::VectorXd& f = spec.running_cost;

    int state = config.start;
    double t = 0.0;
    double exponent = 0.0;
    long impulse_count = 0;
    long max_burst = 0;
    std::deque<double> burst_window;

    long j = config.decide_at_zero ? 0 : 1;
    double next_decision = config.jump_time_mode
                               ? (config.decide_at_zero ? 0.0 : kInf)
                               : static_cast<double>(j) * delta;
    std::size_t ci = 0;
    double rate = -Q(state, state);
    double next_jump = t + rng.exponential(rate);

    auto apply_impulse = [&](int a) {
        exponent += spec.shift_cost(state, a);
        state = spec.impulse_set[a];
        ++impulse_count;
        while (!burst_window.empty() && burst_window.front() <= t - 1.0)
            burst_window.pop_front();
        burst_window.push_back(t);
        max_burst = std::max(max_burst, static_cast<long>(burst_window.size()));
        if (impulse_times)
            impulse_times->push_back(t);
        rate = -Q(state, state);
        next_jump = t + rng.exponential(rate);
    };

    while (true) {
        const double td = next_decision <= T ? next_decision : kInf;
        const double tc = ci < cps.size() ? cps[ci] : kInf;
        const double tj = next_jump < T ? next_jump : kInf;
        const double te = std::min({td, tc, tj, T});

        exponent += f(state) * (te - t);
        t = te;

        if (te == td) {
            const int a = policy.action[state];
            if (a >= 0)
                apply_impulse(a);
            if (config.jump_time_mode) {
                next_decision = kInf;
            } else {
                ++j;
                next_decision = static_cast<double>(j) * delta;
            }
            continue;
        }
        if (te == tc) {
            if (checkpoint_out)
                checkpoint_out[ci] = exponent;
            ++ci;
            continue;
        }
        if (te == tj) {
            state = sample_destination(Q, state, rate, rng.uniform());
            rate = -Q(state, state);
            next_jump = t + rng.exponential(rate);
            if (config.jump_time_mode) {
                const int a = policy.action[state];
                if (a >= 0)
                    apply_impulse(a);
            }
            continue;
        }
        break; // reached the horizon with no event pending at it
    }

    exponent_out = exponent;
    impulse_count_out = impulse_count;
    max_burst_out = max_burst;
}

struct BatchStats {
    double min_rate = kInf;
    double max_rate = 0.0;
    long total_impulses = 0;
    long max_burst = 0;
};

/// Fills exponents (size N) and checkpoints (row-major N x C) in trajectory
/// index order; partitions the index range over threads. Every write is to a
/// disjoint slot and each trajectory owns its random stream, so the fill is
/// identical for any thread count.
BatchStats run_batch(const ModelSpec& spec, const Policy& policy, const SimConfig& config,
                     const std::vector<double>& cps, std::vector<double>& exponents,
                     std::vector<double>& checkpoints) {
    const long N = config.trajectories;
    const std::size_t C = cps.size();
    exponents.assign(static_cast<std::size_t>(N), 0.0);
    checkpoints.assign(static_cast<std::size_t>(N) * C, 0.0);

    int threads = config.threads > 0 ? config.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1)
        threads = 1;
    threads = static_cast<int>(std::min<long>(threads, N));

    std::vector<BatchStats> partial(threads);
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_lock;

    auto work = [&](int tid, long lo, long hi) {
        try {
            BatchStats& st = partial[tid];
            for (long i = lo; i < hi; ++i) {
                double expo = 0.0;
                long count = 0, burst = 0;
                simulate_core(spec, policy, config, cps, i, expo, nullptr,
                              checkpoints.data() + static_cast<std::size_t>(i) * C, count,
                              burst);
                exponents[static_cast<std::size_t>(i)] = expo;
                const double traj_rate = static_cast<double>(count) / config.horizon;
                st.min_rate = std::min(st.min_rate, traj_rate);
                st.max_rate = std::max(st.max_rate, traj_rate);
                st.total_impulses += count;
                st.max_burst = std::max(st.max_burst, burst);
            }
        } catch (...) {
            std::lock_guard<std::mutex> guard(error_lock);
            if (!first_error)
                first_error = std::current_exception();
        }
    };

    if (threads == 1) {
        work(0, 0, N);
    } else {
        pool.reserve(threads);
        const long chunk = (N + threads - 1) / threads;
        for (int tid = 0; tid < threads; ++tid) {
            const long lo = tid * chunk;
            const long hi = std::min(N, lo + chunk);
            if (lo >= hi)
                break;
            pool.emplace_back(work, tid, lo, hi);
        }
        for (std::thread& th : pool)
            th.join();
    }
    if (first_error)
        std::rethrow_exception(first_error);

    BatchStats total;
    for (const BatchStats& st : partial) {
        total.min_rate = std::min(total.min_rate, st.min_rate);
        total.max_rate = std::max(total.max_rate, st.max_rate);
        total.total_impulses += st.total_impulses;
        total.max_burst = std::max(total.max_burst, st.max_burst);
    }
    return total;
}

/// Log-mean-exp with a fixed shift; summation in index order.
double log_mean_exp(const std::vector<double>& values, double shift) {
    double sum = 0.0;
    for (double v : values)
        sum += std::exp(v - shift);
    return shift + std::log(sum / static_cast<double>(values.size()));
}

ImpulseStats finish_stats(const SimConfig& config, long N, const BatchStats& total) {
    ImpulseStats st;
    st.min_rate = total.min_rate;
    st.mean_rate = static_cast<double>(total.total_impulses) /
                   (static_cast<double>(N) * config.horizon);
    st.max_rate = total.max_rate;
    st.max_burst = total.max_burst;
    st.total_impulses = total.total_impulses;
    if (config.jump_time_mode) {
        st.hard_cap = kInf;
    } else {
        const double delta = std::ldexp(1.0, -config.grid_k);
        const double decisions = std::floor(config.horizon / delta) +
                                 (config.decide_at_zero ? 1.0 : 0.0);
        st.hard_cap = decisions / config.horizon;
        if (st.max_rate > st.hard_cap + 1e-9)
            throw Error("impulse rate exceeds the decision-grid bound; simulator defect");
    }
    return st;
}

} // namespace

TrajectoryResult sample_trajectory(const ModelSpec& spec, const Policy& policy,
                                   const SimConfig& config, long index) {
    validate_config(spec, policy, config);
    std::vector<double> cps = resolve_checkpoints(config);
    TrajectoryResult out;
    out.checkpoint_exponents.assign(cps.size(), 0.0);
    long count = 0;
    simulate_core(spec, policy, config, cps, index, out.exponent, &out.impulse_times,
                  out.checkpoint_exponents.data(), count, out.max_burst);
    return out;
}

JEstimate estimate_J(const ModelSpec& spec, const Policy& policy, const SimConfig& config) {
    validate_config(spec, policy, config);
    const std::vector<double> cps = resolve_checkpoints(config);
    const long N = config.trajectories;
    const std::size_t C = cps.size();

    JEstimate est;
    est.trajectories = N;
    est.horizon = config.horizon;
    est.ladder_T = cps;

    std::vector<double> checkpoints;
    BatchStats total = run_batch(spec, policy, config, cps, est.exponents, checkpoints);
    est.impulses = finish_stats(config, N, total);

    const double shift = *std::max_element(est.exponents.begin(), est.exponents.end());
    est.point = log_mean_exp(est.exponents, shift) / config.horizon;

    est.ladder_point.resize(C);
    std::vector<double> column(static_cast<std::size_t>(N));
    for (std::size_t c = 0; c < C; ++c) {
        for (long i = 0; i < N; ++i)
            column[static_cast<std::size_t>(i)] = checkpoints[static_cast<std::size_t>(i) * C + c];
        const double cshift = *std::max_element(column.begin(), column.end());
        est.ladder_point[c] = log_mean_exp(column, cshift) / cps[c];
    }

    // Bootstrap the log-mean-exp statistic: resample trajectories with
    // replacement from streams disjoint from the trajectory index space, sum
    // precomputed shifted weights, take the sample standard deviation.
    const long B = config.bootstrap;
    if (B >= 2) {
        std::vector<double> weights(static_cast<std::size_t>(N));
        for (long i = 0; i < N; ++i)
            weights[static_cast<std::size_t>(i)] = std::exp(est.exponents[static_cast<std::size_t>(i)] - shift);
        std::vector<double> points(static_cast<std::size_t>(B));

        int threads = config.threads > 0 ? config.threads
                                         : static_cast<int>(std::thread::hardware_concurrency());
        threads = static_cast<int>(std::max<long>(1, std::min<long>(threads, B)));
        const std::uint64_t salt = 0x8000000000000000ULL;

        auto boot_work = [&](long lo, long hi) {
            for (long b = lo; b < hi; ++b) {
                SplitMix64 rng = derived_stream(config.seed, salt + static_cast<std::uint64_t>(b));
                double sum = 0.0;
                for (long i = 0; i < N; ++i) {
                    const std::uint64_t r = rng.next();
                    const std::size_t idx = static_cast<std::size_t>(
                        (static_cast<unsigned __int128>(r) * static_cast<unsigned __int128>(N)) >> 64);
                    sum += weights[idx];
                }
                points[static_cast<std::size_t>(b)] =
                    (shift + std::log(sum / static_cast<double>(N))) / config.horizon;
            }
        };

        if (threads == 1) {
            boot_work(0, B);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(threads);
            const long chunk = (B + threads - 1) / threads;
            for (int tid = 0; tid < threads; ++tid) {
                const long lo = tid * chunk;
                const long hi = std::min(B, lo + chunk);
                if (lo >= hi)
                    break;
                pool.emplace_back(boot_work, lo, hi);
            }
            for (std::thread& th : pool)
                th.join();
        }

        // deviations from a fixed point keep the sum exactly zero when every
        // resample lands on the same value
        const double base = points[0];
        double mean_dev = 0.0;
        for (double p : points)
            mean_dev += p - base;
        mean_dev /= static_cast<double>(B);
        double ss = 0.0;
        for (double p : points) {
            const double d = (p - base) - mean_dev;
            ss += d * d;
        }
        est.std_error = std::sqrt(ss / static_cast<double>(B - 1));
    }
    return est;
}

ImpulseStats admissibility_stats(const ModelSpec& spec, const Policy& policy,
                                 const SimConfig& config) {
    validate_config(spec, policy, config);
    const std::vector<double> cps = resolve_checkpoints(config);
    std::vector<double> exponents, checkpoints;
    BatchStats total = run_batch(spec, policy, config, cps, exponents, checkpoints);
    return finish_stats(config, config.trajectories, total);
}

} // namespace rsic
