#include "stochconc/ensemble.hpp"

#include "stochconc/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

namespace stochconc {

std::uint64_t system_fingerprint(const Matrix& a, const Vector& b, const Vector& x0)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto feed = [&h](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 0x100000001B3ULL;
        }
    };
    const std::int64_t dims[4] = {a.rows(), a.cols(), b.size(), x0.size()};
    feed(dims, sizeof dims);
    feed(a.data(), sizeof(double) * static_cast<std::size_t>(a.size()));
    feed(b.data(), sizeof(double) * static_cast<std::size_t>(b.size()));
    feed(x0.data(), sizeof(double) * static_cast<std::size_t>(x0.size()));
    return h;
}

unsigned default_thread_count()
{
    if (const char* env = std::getenv("STOCHCONC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

TrialEnsemble run_trials(const LinearSystem& sys, Method method, std::size_t k,
                         std::size_t n_trials, std::uint64_t master_seed,
                         const RunOptions& options, unsigned threads)
{
    if (n_trials == 0)
        throw InvalidInput("run_trials: need at least one trial");
    TrialEnsemble ens;
    ens.master_seed = master_seed;
    ens.method = method;
    ens.iterations = k;
    const Vector x0 = options.x0 ? *options.x0 : Vector::Zero(sys.a.cols());
    ens.fingerprint = system_fingerprint(sys.a, sys.b, x0);
    ens.trajectories.resize(n_trials);
    parallel_for(n_trials, threads, [&](std::size_t i) {
        ens.trajectories[i] = run_trajectory(sys, method, k, child_seed(master_seed, i), options);
    });
    return ens;
}

TrialEnsemble run_trials(const InequalitySystem& sys, std::size_t k, std::size_t n_trials,
                         std::uint64_t master_seed, const RunOptions& options, unsigned threads)
{
    if (n_trials == 0)
        throw InvalidInput("run_trials: need at least one trial");
    TrialEnsemble ens;
    ens.master_seed = master_seed;
    ens.method = Method::rk_ineq;
    ens.iterations = k;
    const Vector x0 = options.x0 ? *options.x0 : Vector::Zero(sys.a.cols());
    ens.fingerprint = system_fingerprint(sys.a, sys.b, x0);
    ens.trajectories.resize(n_trials);
    parallel_for(n_trials, threads, [&](std::size_t i) {
        ens.trajectories[i] = run_trajectory(sys, k, child_seed(master_seed, i), options);
    });
    return ens;
}

double nearest_rank(const std::vector<double>& sorted, double level)
{
    if (sorted.empty())
        throw InvalidInput("nearest_rank: empty sample");
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(level * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

EnsembleSummary summarize(const TrialEnsemble& ens, const std::vector<double>& quantile_levels,
                          const std::vector<double>& eps_levels,
                          const std::vector<BandSpec>& bands, const BoundParams& mean_params)
{
    if (ens.trajectories.empty())
        throw InvalidInput("summarize: empty ensemble");
    for (double q : quantile_levels)
        if (!(q > 0.0 && q < 1.0))
            throw InvalidInput("summarize: quantile levels must lie in (0, 1)");
    for (double e : eps_levels)
        if (!(e > 0.0 && e < 1.0))
            throw InvalidInput("summarize: eps levels must lie in (0, 1)");

    const std::size_t len = ens.trajectories.front().error_sq.size();
    for (const auto& t : ens.trajectories)
        if (t.error_sq.size() != len)
            throw InvalidInput("summarize: trajectories differ in length");

    EnsembleSummary s;
    s.quantile_levels = quantile_levels;
    std::sort(s.quantile_levels.begin(), s.quantile_levels.end());
    s.emp_mean.resize(len);
    s.emp_var.resize(len);
    s.mean_bound.resize(len);
    s.quantiles.assign(s.quantile_levels.size(), std::vector<double>(len));

    std::vector<double> column(ens.size());
    for (std::size_t t = 0; t < len; ++t) {
        // Welford: exact zero variance for constant columns.
        double mean = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < ens.size(); ++i) {
            const double v = ens.trajectories[i].error_sq[t];
            column[i] = v;
            const double delta = v - mean;
            mean += delta / static_cast<double>(i + 1);
            m2 += delta * (v - mean);
        }
        s.emp_mean[t] = mean;
        s.emp_var[t] = ens.size() > 1 ? std::max(m2, 0.0) / static_cast<double>(ens.size() - 1) : 0.0;
        s.mean_bound[t] = std::pow(mean_params.r, static_cast<double>(t)) * mean_params.e0_norm_sq;
        std::sort(column.begin(), column.end());
        for (std::size_t q = 0; q < s.quantile_levels.size(); ++q)
            s.quantiles[q][t] = nearest_rank(column, s.quantile_levels[q]);
    }

    for (const auto& spec : bands)
        for (const double eps : eps_levels) {
            CiBand band;
            band.form = spec.form;
            band.eps = eps;
            for (std::size_t t = 0; t < len; ++t) {
                const double hw = chebyshev_interval(spec.params, t, eps, spec.form);
                band.half_width.push_back(hw);
                band.lo_empirical.push_back(s.emp_mean[t] - hw);
                band.hi_empirical.push_back(s.emp_mean[t] + hw);
                band.lo_envelope.push_back(s.mean_bound[t] - hw);
                band.hi_envelope.push_back(s.mean_bound[t] + hw);
            }
            s.bands.push_back(std::move(band));
        }
    return s;
}

std::vector<double> coverage_per_iteration(const TrialEnsemble& ens,
                                           const std::vector<double>& envelope)
{
    std::vector<double> out(envelope.size(), 0.0);
    if (ens.trajectories.empty())
        return out;
    for (const auto& traj : ens.trajectories) {
        if (traj.error_sq.size() != envelope.size())
            throw InvalidInput("coverage: envelope length must equal k + 1");
        for (std::size_t t = 0; t < envelope.size(); ++t)
            out[t] += traj.error_sq[t] <= envelope[t];
    }
    for (auto& v : out)
        v /= static_cast<double>(ens.size());
    return out;
}

double coverage_trajectory(const TrialEnsemble& ens, const std::vector<double>& envelope)
{
    if (ens.trajectories.empty())
        return 0.0;
    std::size_t inside = 0;
    for (const auto& traj : ens.trajectories) {
        if (traj.error_sq.size() != envelope.size())
            throw InvalidInput("coverage: envelope length must equal k + 1");
        bool ok = true;
        for (std::size_t t = 0; t < envelope.size() && ok; ++t)
            ok = traj.error_sq[t] <= envelope[t];
        inside += ok;
    }
    return static_cast<double>(inside) / static_cast<double>(ens.size());
}

std::vector<double> fraction_inside(const TrialEnsemble& ens, const std::vector<double>& lo,
                                    const std::vector<double>& hi)
{
    if (lo.size() != hi.size())
        throw InvalidInput("fraction_inside: band length mismatch");
    std::vector<double> out(lo.size(), 0.0);
    for (const auto& traj : ens.trajectories) {
        if (traj.error_sq.size() != lo.size())
            throw InvalidInput("fraction_inside: band length must equal k + 1");
        for (std::size_t t = 0; t < lo.size(); ++t)
            out[t] += traj.error_sq[t] >= lo[t] && traj.error_sq[t] <= hi[t];
    }
    for (auto& v : out)
        v /= static_cast<double>(std::max<std::size_t>(ens.size(), 1));
    return out;
}

namespace {

struct Enumerator {
    const LinearSystem& sys;
    Method method;
    Vector weights;

    Enumerator(const LinearSystem& s, Method m, Sampling sampling) : sys(s), method(m)
    {
        if (m == Method::rk_ineq)
            throw InvalidInput("brute force: rk-ineq is not enumerated");
        check_matrix(sys.a, "brute force");
        weights = m == Method::rk ? sampling_weights(sys.a, sampling)
                                  : sampling_weights(sys.a.transpose(), sampling);
    }

    std::size_t choices() const { return static_cast<std::size_t>(weights.size()); }

    Vector step(const Vector& x, std::size_t i) const
    {
        return method == Method::rk ? rk_step(x, sys.a, sys.b, i) : rgs_step(x, sys.a, sys.b, i);
    }

    double error(const Vector& x) const { return error_metric(sys, method, x); }

    void guard(std::size_t k) const
    {
        const double sequences = std::pow(static_cast<double>(choices()), static_cast<double>(k));
        if (sequences > enumeration_budget)
            throw InvalidInput("brute force: " + std::to_string(choices()) + "^" +
                               std::to_string(k) + " sequences exceed the budget of " +
                               std::to_string(static_cast<long long>(enumeration_budget)));
    }
};

} // namespace

ExactMoments brute_force_moments(const LinearSystem& sys, Method method, const Vector& x0,
                                 std::size_t k, int p_max, Sampling sampling)
{
    if (p_max < 1)
        throw InvalidInput("brute_force_moments: p_max must be >= 1");
    const Enumerator en(sys, method, sampling);
    en.guard(k);
    const int p_count = std::max(p_max, 2);

    ExactMoments out;
    out.moment.assign(static_cast<std::size_t>(p_count), std::vector<double>(k + 1, 0.0));
    const double e0 = en.error(x0);
    for (int p = 1; p <= p_count; ++p)
        out.moment[static_cast<std::size_t>(p - 1)][0] = std::pow(e0, p);

    std::function<void(const Vector&, std::size_t, double, double)> visit =
        [&](const Vector& x, std::size_t depth, double prob, double e1) {
            if (depth == k) {
                out.total_probability += prob;
                return;
            }
            for (std::size_t i = 0; i < en.choices(); ++i) {
                const double w = en.weights(static_cast<Eigen::Index>(i));
                if (w == 0.0)
                    continue;
                const Vector next = en.step(x, i);
                const double e = en.error(next);
                const double child_prob = prob * w;
                double pow_e = 1.0;
                for (int p = 1; p <= p_count; ++p) {
                    pow_e *= e;
                    out.moment[static_cast<std::size_t>(p - 1)][depth + 1] += child_prob * pow_e;
                }
                const double first = depth == 0 ? e : e1;
                if (depth + 1 == k && e >= first * (1.0 - 1e-12))
                    out.prob_final_ge_first += child_prob;
                visit(next, depth + 1, child_prob, first);
            }
        };
    visit(x0, 0, 1.0, e0);

    out.variance.resize(k + 1);
    for (std::size_t t = 0; t <= k; ++t)
        out.variance[t] = out.moment[1][t] - out.moment[0][t] * out.moment[0][t];
    if (k == 0)
        out.variance[0] = 0.0;
    return out;
}

double brute_force_envelope_excess(const LinearSystem& sys, Method method, const Vector& x0,
                                   const std::vector<double>& envelope, Sampling sampling)
{
    if (envelope.empty())
        throw InvalidInput("brute_force_envelope_excess: empty envelope");
    const Enumerator en(sys, method, sampling);
    const std::size_t k = envelope.size() - 1;
    en.guard(k);

    if (en.error(x0) > envelope[0])
        return 1.0;
    double excess = 0.0;
    std::function<void(const Vector&, std::size_t, double)> visit =
        [&](const Vector& x, std::size_t depth, double prob) {
            if (depth == k)
                return;
            for (std::size_t i = 0; i < en.choices(); ++i) {
                const double w = en.weights(static_cast<Eigen::Index>(i));
                if (w == 0.0)
                    continue;
                const Vector next = en.step(x, i);
                if (en.error(next) > envelope[depth + 1]) {
                    excess += prob * w;  // the whole subtree has crossed
                    continue;
                }
                visit(next, depth + 1, prob * w);
            }
        };
    visit(x0, 0, 1.0);
    return excess;
}

} // namespace stochconc
