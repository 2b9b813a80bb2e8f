#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stochconc/bounds.hpp"
#include "stochconc/solvers.hpp"

namespace stochconc {

/// Seeded family of trajectories on one system. Trial i runs with
/// child_seed(master_seed, i).
struct TrialEnsemble {
    std::vector<Trajectory> trajectories;
    std::uint64_t master_seed = 0;
    std::uint64_t fingerprint = 0;  ///< hash of A, b and x0
    Method method = Method::rk;
    std::size_t iterations = 0;

    std::size_t size() const { return trajectories.size(); }
};

/// FNV-1a over the bytes of A, b and x0.
std::uint64_t system_fingerprint(const Matrix& a, const Vector& b, const Vector& x0);

/// Worker count from STOCHCONC_THREADS, else hardware concurrency (at least 1).
unsigned default_thread_count();

/// Runs job(0..count-1) on up to `threads` workers; rethrows the first exception.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job);

TrialEnsemble run_trials(const LinearSystem& sys, Method method, std::size_t k,
                         std::size_t n_trials, std::uint64_t master_seed,
                         const RunOptions& options = {}, unsigned threads = 1);

TrialEnsemble run_trials(const InequalitySystem& sys, std::size_t k, std::size_t n_trials,
                         std::uint64_t master_seed, const RunOptions& options = {},
                         unsigned threads = 1);

/// One Chebyshev band for a (form, eps) pair.
struct CiBand {
    VarianceForm form = VarianceForm::paper;
    double eps = 0.05;
    std::vector<double> half_width;
    std::vector<double> lo_empirical, hi_empirical;  ///< centered at emp_mean
    std::vector<double> lo_envelope, hi_envelope;    ///< centered at r^t ||e0||^2
};

struct EnsembleSummary {
    std::vector<double> emp_mean;
    std::vector<double> emp_var;  ///< unbiased, n - 1 denominator (0 for one trial)
    std::vector<double> mean_bound;
    std::vector<double> quantile_levels;
    std::vector<std::vector<double>> quantiles;  ///< [level][t]
    std::vector<CiBand> bands;
};

/// Parameters used for the bands of one variance form.
struct BandSpec {
    VarianceForm form = VarianceForm::safe;
    BoundParams params;
};

/// Per-iteration statistics; quantiles use the nearest-rank rule
/// (the ceil(q N)-th smallest value). The mean bound r^t ||e0||^2 comes from
/// `mean_params`; each BandSpec yields one band per eps level.
EnsembleSummary summarize(const TrialEnsemble& ens, const std::vector<double>& quantile_levels,
                          const std::vector<double>& eps_levels,
                          const std::vector<BandSpec>& bands, const BoundParams& mean_params);

/// Nearest-rank quantile of a sorted sample.
double nearest_rank(const std::vector<double>& sorted, double level);

/// For each t, fraction of trials with error_sq[t] <= envelope[t].
std::vector<double> coverage_per_iteration(const TrialEnsemble& ens,
                                           const std::vector<double>& envelope);

/// Fraction of trials with error_sq[t] <= envelope[t] for every t.
double coverage_trajectory(const TrialEnsemble& ens, const std::vector<double>& envelope);

/// For each t, fraction of trials whose error_sq[t] lies in [lo[t], hi[t]].
std::vector<double> fraction_inside(const TrialEnsemble& ens, const std::vector<double>& lo,
                                    const std::vector<double>& hi);

/// Exact moments over every index sequence of length k.
struct ExactMoments {
    std::vector<std::vector<double>> moment;  ///< [p - 1][t] = E ||e_t||^(2p)
    std::vector<double> variance;             ///< Var(||e_t||^2)
    double total_probability = 0.0;           ///< sum of sequence probabilities at depth k
    double prob_final_ge_first = 0.0;         ///< P[||e_k||^2 >= ||e_1||^2] (k >= 1)
};

constexpr double enumeration_budget = 1e7;

/// Enumerates all count^k index sequences depth-first, stepping the actual
/// solver and weighting each path by the product of its sampling weights.
ExactMoments brute_force_moments(const LinearSystem& sys, Method method, const Vector& x0,
                                 std::size_t k, int p_max,
                                 Sampling sampling = Sampling::norm_squared);

/// Probability mass of sequences whose error exceeds envelope[t] at some t <= k.
double brute_force_envelope_excess(const LinearSystem& sys, Method method, const Vector& x0,
                                   const std::vector<double>& envelope,
                                   Sampling sampling = Sampling::norm_squared);

} // namespace stochconc
