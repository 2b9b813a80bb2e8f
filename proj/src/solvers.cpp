#include "stochconc/solvers.hpp"

#include <algorithm>
#include <cmath>

namespace stochconc {

const char* to_string(Method method)
{
    switch (method) {
    case Method::rk: return "rk";
    case Method::rgs: return "rgs";
    case Method::rk_ineq: return "rk-ineq";
    }
    return "?";
}

const char* to_string(Sampling sampling)
{
    return sampling == Sampling::uniform ? "uniform" : "norm-squared";
}

RowSampler::RowSampler(Vector weights, std::uint64_t seed)
    : weights_(std::move(weights)), rng_(seed)
{
    check_vector(weights_, "RowSampler weights");
    if ((weights_.array() < 0.0).any())
        throw InvalidInput("RowSampler: negative weight");
    if (std::abs(weights_.sum() - 1.0) > 1e-12)
        throw InvalidInput("RowSampler: weights must sum to 1");
    cumulative_.resize(weights_.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
        acc += weights_(i);
        cumulative_(i) = acc;
    }
    // From the last positive weight on, the prefix sum is exactly 1 so every
    // u in [0, 1) lands on a positive-weight index.
    Eigen::Index last = weights_.size() - 1;
    while (last > 0 && weights_(last) == 0.0)
        --last;
    cumulative_.tail(cumulative_.size() - last).setConstant(1.0);
}

std::size_t RowSampler::sample()
{
    const double u = rng_.uniform();
    const double* begin = cumulative_.data();
    const double* end = begin + cumulative_.size();
    const double* hit = std::upper_bound(begin, end, u);
    return static_cast<std::size_t>(hit - begin);
}

namespace {

void check_row(const Matrix& a, std::size_t i, const char* who)
{
    if (static_cast<Eigen::Index>(i) >= a.rows())
        throw InvalidInput(std::string(who) + ": row index out of range");
}

} // namespace

Vector rk_step(const Vector& x, const Matrix& a, const Vector& b, std::size_t i)
{
    check_row(a, i, "rk_step");
    const auto row = a.row(static_cast<Eigen::Index>(i)).transpose();
    const double norm_sq = row.squaredNorm();
    if (norm_sq == 0.0)
        throw InvalidInput("rk_step: zero row " + std::to_string(i));
    const double gap = row.dot(x) - b(static_cast<Eigen::Index>(i));
    return x - (gap / norm_sq) * row;
}

Vector rgs_step(const Vector& x, const Matrix& a, const Vector& b, std::size_t j)
{
    if (static_cast<Eigen::Index>(j) >= a.cols())
        throw InvalidInput("rgs_step: column index out of range");
    const auto col = a.col(static_cast<Eigen::Index>(j));
    const double norm_sq = col.squaredNorm();
    if (norm_sq == 0.0)
        throw InvalidInput("rgs_step: zero column " + std::to_string(j));
    const Vector residual = a * x - b;
    Vector out = x;
    out(static_cast<Eigen::Index>(j)) -= col.dot(residual) / norm_sq;
    return out;
}

Vector rk_ineq_step(const Vector& x, const InequalitySystem& sys, std::size_t i)
{
    check_row(sys.a, i, "rk_ineq_step");
    const auto row = sys.a.row(static_cast<Eigen::Index>(i)).transpose();
    const double norm_sq = row.squaredNorm();
    if (norm_sq == 0.0)
        throw InvalidInput("rk_ineq_step: zero row " + std::to_string(i));
    double gap = row.dot(x) - sys.b(static_cast<Eigen::Index>(i));
    if (!sys.is_equality(i))
        gap = std::max(gap, 0.0);
    if (gap == 0.0)
        return x;
    return x - (gap / norm_sq) * row;
}

double error_metric(const LinearSystem& sys, Method method, const Vector& x)
{
    switch (method) {
    case Method::rk:
        if (!sys.x_star)
            throw InvalidInput("error metric: rk needs a known solution x*");
        return (x - *sys.x_star).squaredNorm();
    case Method::rgs:
        return (sys.a * x - sys.b).squaredNorm();
    case Method::rk_ineq:
        break;
    }
    throw InvalidInput("error metric: rk-ineq runs on an InequalitySystem");
}

namespace {

Vector initial_iterate(const RunOptions& options, Eigen::Index n)
{
    if (!options.x0)
        return Vector::Zero(n);
    if (options.x0->size() != n)
        throw InvalidInput("run_trajectory: x0 length does not match column count");
    return *options.x0;
}

} // namespace

Trajectory run_trajectory(const LinearSystem& sys, Method method, std::size_t k,
                          std::uint64_t seed, const RunOptions& options)
{
    check_matrix(sys.a, "run_trajectory");
    if (sys.b.size() != sys.a.rows())
        throw InvalidInput("run_trajectory: b length mismatch");

    Trajectory traj;
    traj.method = method;
    traj.seed = seed;
    traj.error_sq.reserve(k + 1);
    traj.indices.reserve(k);

    Vector x = initial_iterate(options, sys.a.cols());

    if (method == Method::rk) {
        if (!sys.x_star)
            throw InvalidInput("run_trajectory: rk needs a known solution x*");
        const Vector& xs = *sys.x_star;
        const Vector row_norm_sq = sys.a.rowwise().squaredNorm();
        for (Eigen::Index i = 0; i < row_norm_sq.size(); ++i)
            if (row_norm_sq(i) == 0.0)
                throw InvalidInput("run_trajectory: zero row " + std::to_string(i));
        RowSampler sampler(sampling_weights(sys.a, options.sampling), seed);
        traj.error_sq.push_back((x - xs).squaredNorm());
        for (std::size_t t = 0; t < k; ++t) {
            const auto i = static_cast<Eigen::Index>(sampler.sample());
            const auto row = sys.a.row(i).transpose();
            x -= ((row.dot(x) - sys.b(i)) / row_norm_sq(i)) * row;
            traj.indices.push_back(static_cast<std::uint32_t>(i));
            traj.error_sq.push_back((x - xs).squaredNorm());
        }
        return traj;
    }

    if (method == Method::rgs) {
        const Vector col_norm_sq = sys.a.colwise().squaredNorm().transpose();
        for (Eigen::Index j = 0; j < col_norm_sq.size(); ++j)
            if (col_norm_sq(j) == 0.0)
                throw InvalidInput("run_trajectory: zero column " + std::to_string(j));
        const Matrix at = sys.a.transpose();
        RowSampler sampler(sampling_weights(at, options.sampling), seed);
        Vector residual = sys.a * x - sys.b;
        traj.error_sq.push_back(residual.squaredNorm());
        for (std::size_t t = 0; t < k; ++t) {
            const auto j = static_cast<Eigen::Index>(sampler.sample());
            const auto col = sys.a.col(j);
            const double step = col.dot(residual) / col_norm_sq(j);
            x(j) -= step;
            residual -= step * col;
            traj.indices.push_back(static_cast<std::uint32_t>(j));
            traj.error_sq.push_back(residual.squaredNorm());
        }
        return traj;
    }

    throw InvalidInput("run_trajectory: rk-ineq runs on an InequalitySystem");
}

Trajectory run_trajectory(const InequalitySystem& sys, std::size_t k, std::uint64_t seed,
                          const RunOptions& options)
{
    check_matrix(sys.a, "run_trajectory");
    Trajectory traj;
    traj.method = Method::rk_ineq;
    traj.seed = seed;
    traj.error_sq.reserve(k + 1);
    traj.indices.reserve(k);

    Vector x = initial_iterate(options, sys.a.cols());
    RowSampler sampler(sampling_weights(sys.a, options.sampling), seed);
    const double d0 = distance_to_feasible(sys, x);
    traj.error_sq.push_back(d0 * d0);
    for (std::size_t t = 0; t < k; ++t) {
        const auto i = sampler.sample();
        x = rk_ineq_step(x, sys, i);
        traj.indices.push_back(static_cast<std::uint32_t>(i));
        const double d = distance_to_feasible(sys, x);
        traj.error_sq.push_back(d * d);
    }
    return traj;
}

} // namespace stochconc
