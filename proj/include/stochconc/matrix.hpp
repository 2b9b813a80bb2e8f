#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stochconc {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Axis { row, col };

/// Thrown when an operation's precondition on its inputs does not hold.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Rejects empty matrices and non-finite entries.
void check_matrix(const Matrix& a, const char* what = "matrix");
void check_vector(const Vector& v, const char* what = "vector");

struct SpectralSummary {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double fro_norm_sq = 0.0;
    double condition_number = 1.0; ///< +inf when sigma_min == 0
    bool full_column_rank = false;
};

/// Extreme singular values of `a` via a full SVD (smallest of the min(m, n)
/// singular values). Rejects the all-zero matrix.
SpectralSummary spectral_summary(const Matrix& a, double tol = 1e-10);

/// Euclidean norm of every row (Axis::row) or column (Axis::col).
Vector axis_norms(const Matrix& a, Axis axis);

/// A family of rank-one orthogonal projectors Y_i = I - u_i u_i^T drawn with
/// probability weights[i]. Only the unit directions are stored.
struct ProjectorFamily {
    Vector weights;     ///< length m, nonnegative, sums to 1
    Matrix directions;  ///< m x n, unit rows

    std::size_t size() const { return static_cast<std::size_t>(directions.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(directions.cols()); }

    /// Dense Y_i.
    Matrix projector(std::size_t i) const;
};

enum class Sampling { norm_squared, uniform };

/// Probability weights over the rows of `a` for the given sampling rule.
Vector sampling_weights(const Matrix& a, Sampling sampling);

/// RK family: directions a_i / |a_i|, weights per `sampling`. Zero rows are rejected.
ProjectorFamily rk_family(const Matrix& a, Sampling sampling = Sampling::norm_squared);

/// RGS family restricted to range(A), where the residual error lives.
///
/// With A = QR (thin), A_j = Q R_j, so the column projectors acting on range(A)
/// are the projectors of the unit columns of R in the n-dimensional
/// coordinates of Q. Requires full column rank.
ProjectorFamily rgs_family(const Matrix& a, Sampling sampling = Sampling::norm_squared);

/// Validates weights and unit directions; throws InvalidInput otherwise.
void check_family(const ProjectorFamily& family);

/// sum_i w_i Y_i V Y_i^T, i.e. the action of sum_i w_i (Y_i^T Y_i) (x) (Y_i^T Y_i)
/// on the column-stacked V, returned un-stacked. O(m n^2).
Matrix kron2_apply(const ProjectorFamily& family, const Matrix& v);

/// Explicit sum_i w_i (Y_i^T Y_i)^{(x) p}, an n^p x n^p matrix. Requires n^p <= 4096.
Matrix kron_explicit(const ProjectorFamily& family, int p);

constexpr std::size_t kron_explicit_limit = 4096;

/// y = M x for a symmetric operator on R^n.
using LinearAction = std::function<void(std::span<const double> x, std::span<double> y)>;

enum class Extreme { max, min };

struct EigenEstimate {
    double value = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/// Power iteration did not settle; carries the last iterate's estimate.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& msg, EigenEstimate last)
        : std::runtime_error(msg), last_(last)
    {
    }
    const EigenEstimate& last() const noexcept { return last_; }

private:
    EigenEstimate last_;
};

struct PowerIterationOptions {
    double tol = 1e-10;
    int max_iters = 10000;
    std::uint64_t seed = 0x5EEDULL;
    double upper_bound = 1.0; ///< lambda_bar for Extreme::min; must dominate lambda_max
};

/// Extreme eigenvalue of a symmetric PSD action by power iteration.
///
/// Extreme::min iterates on upper_bound * I - M. The estimate is the Rayleigh
/// quotient; iteration stops once it changes by at most tol (relative) between
/// sweeps and the residual |Mv - lambda v| is below sqrt(tol) * max(lambda, 1).
EigenEstimate extreme_eigenvalue_sym(const LinearAction& apply, std::size_t n, Extreme which,
                                     const PowerIterationOptions& options = {});

} // namespace stochconc
