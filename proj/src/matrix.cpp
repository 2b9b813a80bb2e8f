#include "stochconc/matrix.hpp"

#include "stochconc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stochconc {

void check_matrix(const Matrix& a, const char* what)
{
    if (a.rows() == 0 || a.cols() == 0)
        throw InvalidInput(std::string(what) + ": empty matrix");
    if (!a.allFinite())
        throw InvalidInput(std::string(what) + ": non-finite entry");
}

void check_vector(const Vector& v, const char* what)
{
    if (v.size() == 0)
        throw InvalidInput(std::string(what) + ": empty vector");
    if (!v.allFinite())
        throw InvalidInput(std::string(what) + ": non-finite entry");
}

SpectralSummary spectral_summary(const Matrix& a, double tol)
{
    check_matrix(a, "spectral_summary");
    const double fro_sq = a.squaredNorm();
    if (fro_sq == 0.0)
        throw InvalidInput("spectral_summary: all-zero matrix");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
    const auto& s = svd.singularValues();

    SpectralSummary out;
    out.sigma_max = s(0);
    out.sigma_min = s(s.size() - 1);
    out.fro_norm_sq = fro_sq;
    out.condition_number = out.sigma_min > 0.0 ? out.sigma_max / out.sigma_min
                                               : std::numeric_limits<double>::infinity();
    out.full_column_rank = a.rows() >= a.cols() && out.sigma_min > tol * out.sigma_max;
    return out;
}

Vector axis_norms(const Matrix& a, Axis axis)
{
    return axis == Axis::row ? Vector(a.rowwise().norm()) : Vector(a.colwise().norm().transpose());
}

Matrix ProjectorFamily::projector(std::size_t i) const
{
    const auto n = directions.cols();
    const Vector u = directions.row(static_cast<Eigen::Index>(i)).transpose();
    Matrix y = Matrix::Identity(n, n);
    y.noalias() -= u * u.transpose();
    return y;
}

Vector sampling_weights(const Matrix& a, Sampling sampling)
{
    check_matrix(a, "sampling_weights");
    const auto m = a.rows();
    if (sampling == Sampling::uniform)
        return Vector::Constant(m, 1.0 / static_cast<double>(m));
    Vector w = a.rowwise().squaredNorm();
    const double total = w.sum();
    if (total == 0.0)
        throw InvalidInput("sampling_weights: all-zero matrix");
    return w / total;
}

namespace {

ProjectorFamily family_from_rows(const Matrix& rows, Sampling sampling, const char* kind)
{
    check_matrix(rows, kind);
    ProjectorFamily f;
    f.directions = rows;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const double norm = rows.row(i).norm();
        if (norm == 0.0)
            throw InvalidInput(std::string(kind) + ": zero vector at index " + std::to_string(i));
        f.directions.row(i) /= norm;
    }
    f.weights = sampling_weights(rows, sampling);
    return f;
}

} // namespace

ProjectorFamily rk_family(const Matrix& a, Sampling sampling)
{
    return family_from_rows(a, sampling, "rk_family (row)");
}

ProjectorFamily rgs_family(const Matrix& a, Sampling sampling)
{
    check_matrix(a, "rgs_family");
    if (a.rows() < a.cols())
        throw InvalidInput("rgs_family: needs rows >= cols for a full-column-rank restriction");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
    // Columns of R are the columns of A written in the orthonormal basis Q.
    const Matrix rows = r.transpose();
    const auto s = spectral_summary(a);
    if (!s.full_column_rank)
        throw InvalidInput("rgs_family: matrix is not full column rank");
    return family_from_rows(rows, sampling, "rgs_family (column)");
}

void check_family(const ProjectorFamily& family)
{
    if (family.directions.rows() == 0 || family.directions.cols() == 0)
        throw InvalidInput("projector family: empty");
    if (family.weights.size() != family.directions.rows())
        throw InvalidInput("projector family: weights/directions size mismatch");
    if ((family.weights.array() < 0.0).any())
        throw InvalidInput("projector family: negative weight");
    if (std::abs(family.weights.sum() - 1.0) > 1e-12)
        throw InvalidInput("projector family: weights do not sum to 1");
    for (Eigen::Index i = 0; i < family.directions.rows(); ++i)
        if (std::abs(family.directions.row(i).norm() - 1.0) > 1e-12)
            throw InvalidInput("projector family: direction " + std::to_string(i) +
                               " is not unit norm");
}

Matrix kron2_apply(const ProjectorFamily& family, const Matrix& v)
{
    const auto n = static_cast<Eigen::Index>(family.dim());
    if (v.rows() != n || v.cols() != n)
        throw InvalidInput("kron2_apply: V must be " + std::to_string(n) + "x" + std::to_string(n));

    // (I - uu^T) V (I - uu^T) = V - u (u^T V) - (V u) u^T + (u^T V u) u u^T
    Matrix out = Matrix::Zero(n, n);
    Vector vu(n), utv(n);
    for (Eigen::Index i = 0; i < family.directions.rows(); ++i) {
        const double w = family.weights(i);
        if (w == 0.0)
            continue;
        const auto u = family.directions.row(i).transpose();
        vu.noalias() = v * u;
        utv.noalias() = v.transpose() * u;
        const double uvu = u.dot(vu);
        out.noalias() -= w * u * utv.transpose();
        out.noalias() -= w * vu * u.transpose();
        out.noalias() += (w * uvu) * u * u.transpose();
    }
    out += v;  // weights sum to one
    return out;
}

namespace {

Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

} // namespace

Matrix kron_explicit(const ProjectorFamily& family, int p)
{
    if (p < 1)
        throw InvalidInput("kron_explicit: p must be >= 1");
    const std::size_t n = family.dim();
    double size = 1.0;
    for (int k = 0; k < p; ++k)
        size *= static_cast<double>(n);
    if (size > static_cast<double>(kron_explicit_limit))
        throw InvalidInput("kron_explicit: n^p = " + std::to_string(n) + "^" + std::to_string(p) +
                           " = " + std::to_string(static_cast<unsigned long long>(size)) +
                           " exceeds the limit of " + std::to_string(kron_explicit_limit));

    const auto dim = static_cast<Eigen::Index>(size);
    Matrix out = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < family.size(); ++i) {
        const double w = family.weights(static_cast<Eigen::Index>(i));
        if (w == 0.0)
            continue;
        const Matrix y = family.projector(i);  // Y^T Y = Y for orthogonal projectors
        Matrix power = y;
        for (int k = 1; k < p; ++k)
            power = kron(power, y);
        out += w * power;
    }
    return out;
}

EigenEstimate extreme_eigenvalue_sym(const LinearAction& apply, std::size_t n, Extreme which,
                                     const PowerIterationOptions& options)
{
    if (n == 0)
        throw InvalidInput("extreme_eigenvalue_sym: zero dimension");
    if (!(options.tol > 0.0) || options.max_iters < 1)
        throw InvalidInput("extreme_eigenvalue_sym: bad tolerance or iteration cap");

    const double shift = options.upper_bound;
    const bool shifted = which == Extreme::min;

    Vector x(static_cast<Eigen::Index>(n));
    Rng rng(options.seed);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x(i) = rng.normal();
    x.normalize();

    Vector y(x.size());
    auto step = [&] {
        apply(std::span<const double>(x.data(), n), std::span<double>(y.data(), n));
        if (shifted)
            y = shift * x - y;
    };

    EigenEstimate est;
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int it = 1; it <= options.max_iters; ++it) {
        step();
        const double lambda = x.dot(y);
        const double residual = (y - lambda * x).norm();
        est.value = shifted ? shift - lambda : lambda;
        est.residual = residual;
        est.iterations = it;

        const double ynorm = y.norm();
        if (ynorm == 0.0) {
            // x lies in the null space; the operator is zero along it.
            est.value = shifted ? shift : 0.0;
            est.residual = 0.0;
            return est;
        }
        const double scale = std::max(std::abs(lambda), 1.0);
        if (std::abs(lambda - previous) <= options.tol * scale &&
            residual <= std::sqrt(options.tol) * scale)
            return est;
        previous = lambda;
        x = y / ynorm;
    }
    throw NonConvergence("extreme_eigenvalue_sym: no convergence after " +
                             std::to_string(options.max_iters) + " iterations (residual " +
                             std::to_string(est.residual) + ")",
                         est);
}

} // namespace stochconc
