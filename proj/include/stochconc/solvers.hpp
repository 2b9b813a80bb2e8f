#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "stochconc/matrix.hpp"
#include "stochconc/rng.hpp"
#include "stochconc/system_gen.hpp"

namespace stochconc {

enum class Method { rk, rgs, rk_ineq };

const char* to_string(Method method);
const char* to_string(Sampling sampling);

/// Draws indices i.i.d. from fixed weights by binary search on the prefix sums.
class RowSampler {
public:
    RowSampler(Vector weights, std::uint64_t seed);

    std::size_t sample();

    const Vector& weights() const { return weights_; }
    const Vector& cumulative() const { return cumulative_; }

private:
    Vector weights_;
    Vector cumulative_;
    Rng rng_;
};

/// Free-function form of RowSampler::sample.
inline std::size_t sample_index(RowSampler& sampler) { return sampler.sample(); }

/// Orthogonal projection of x onto {a_i^T x = b_i}.
Vector rk_step(const Vector& x, const Matrix& a, const Vector& b, std::size_t i);

/// Coordinate step zeroing the residual's component along column j.
Vector rgs_step(const Vector& x, const Matrix& a, const Vector& b, std::size_t j);

/// Projection onto row i's hyperplane for equalities, and for inequalities only
/// when a_i^T x > b_i.
Vector rk_ineq_step(const Vector& x, const InequalitySystem& sys, std::size_t i);

struct Trajectory {
    Method method = Method::rk;
    std::vector<double> error_sq;      ///< k + 1 entries, index 0 is the start
    std::vector<std::uint32_t> indices;  ///< k sampled row/column indices
    std::uint64_t seed = 0;
};

struct RunOptions {
    Sampling sampling = Sampling::norm_squared;
    std::optional<Vector> x0;  ///< zero vector when empty
};

/// Runs k iterations recording ||x_t - x*||^2 (rk), ||A x_t - b||^2 (rgs).
Trajectory run_trajectory(const LinearSystem& sys, Method method, std::size_t k,
                          std::uint64_t seed, const RunOptions& options = {});

/// Runs k iterations of rk_ineq_step recording d(x_t, S)^2.
Trajectory run_trajectory(const InequalitySystem& sys, std::size_t k, std::uint64_t seed,
                          const RunOptions& options = {});

/// Squared error of x for the given method on a linear system.
double error_metric(const LinearSystem& sys, Method method, const Vector& x);

} // namespace stochconc
