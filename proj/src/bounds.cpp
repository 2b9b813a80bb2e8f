#include "stochconc/bounds.hpp"

#include "stochconc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace stochconc {

const char* to_string(VarianceForm form)
{
    return form == VarianceForm::paper ? "paper" : "safe";
}

Rates rk_rates(const Matrix& a)
{
    const auto s = spectral_summary(a);
    const double smin_sq = a.rows() >= a.cols() ? s.sigma_min * s.sigma_min : 0.0;
    Rates out;
    out.r = 1.0 - smin_sq / s.fro_norm_sq;
    out.eta = 1.0 - s.sigma_max * s.sigma_max / s.fro_norm_sq;
    out.rho = out.r;
    out.contractive = out.r < 1.0;
    return out;
}

namespace {

/// E[Y] = I - sum_i w_i u_i u_i^T.
Eigen::MatrixXd expected_projector(const ProjectorFamily& family)
{
    const auto n = static_cast<Eigen::Index>(family.dim());
    const Eigen::MatrixXd d = family.directions;
    Eigen::MatrixXd ey = Eigen::MatrixXd::Identity(n, n);
    ey.noalias() -= d.transpose() * family.weights.asDiagonal() * d;
    return ey;
}

double dense_extreme(const Eigen::MatrixXd& m, Extreme which)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    return which == Extreme::max ? ev(ev.size() - 1) : ev(0);
}

PowerIterationOptions power_options(const MuOptions& options)
{
    PowerIterationOptions p;
    p.tol = options.tol;
    p.max_iters = options.max_iters;
    p.seed = options.seed;
    p.upper_bound = 1.0;
    return p;
}

double explicit_extreme(const ProjectorFamily& family, int p, Extreme which,
                        const MuOptions& options)
{
    const Eigen::MatrixXd m = kron_explicit(family, p);
    const auto dim = static_cast<std::size_t>(m.rows());
    LinearAction apply = [&m](std::span<const double> x, std::span<double> y) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
        Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
        yv.noalias() = m * xv;
    };
    try {
        return extreme_eigenvalue_sym(apply, dim, which, power_options(options)).value;
    } catch (const NonConvergence&) {
        return dense_extreme(m, which);
    }
}

double kron2_extreme(const ProjectorFamily& family, Extreme which, const MuOptions& options)
{
    const auto n = static_cast<Eigen::Index>(family.dim());
    Matrix v(n, n);
    LinearAction apply = [&](std::span<const double> x, std::span<double> y) {
        // x is V stacked row-major. M(V^T) = M(V)^T, so the row-major action
        // is the column-stacked one conjugated by a permutation: same spectrum.
        std::copy(x.begin(), x.end(), v.data());
        const Matrix out = kron2_apply(family, v);
        std::copy(out.data(), out.data() + out.size(), y.begin());
    };
    return extreme_eigenvalue_sym(apply, static_cast<std::size_t>(n * n), which,
                                  power_options(options))
        .value;
}

} // namespace

double mu2_symmetric_dense(const ProjectorFamily& family)
{
    check_family(family);
    const auto n = static_cast<Eigen::Index>(family.dim());
    const Eigen::Index dim = n * (n + 1) / 2;
    if (static_cast<std::size_t>(dim) > symmetric_dense_limit)
        throw InvalidInput("mu2_symmetric_dense: symmetric subspace of dimension " +
                           std::to_string(dim) + " exceeds the limit of " +
                           std::to_string(symmetric_dense_limit));

    // Orthonormal basis of symmetric n x n matrices: E_jj and (E_jk + E_kj)/sqrt(2).
    const double root2 = std::numbers::sqrt2;
    Eigen::MatrixXi index(n, n);
    {
        Eigen::Index c = 0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = j; k < n; ++k) {
                index(j, k) = static_cast<int>(c);
                index(k, j) = static_cast<int>(c);
                ++c;
            }
    }
    auto coords = [&](const Eigen::MatrixXd& sym, Eigen::Ref<Eigen::VectorXd> out) {
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = j; k < n; ++k)
                out(index(j, k)) = j == k ? sym(j, k) : root2 * sym(j, k);
    };

    // I - M acts on symmetric V as G V + V G - sum_i w_i (u_i^T V u_i) u_i u_i^T
    // with G = sum_i w_i u_i u_i^T.
    const Eigen::MatrixXd d = family.directions;
    const Eigen::MatrixXd g = d.transpose() * family.weights.asDiagonal() * d;

    Eigen::MatrixXd lifted(dim, dim);
    Eigen::MatrixXd x(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = j; k < n; ++k) {
            x.setZero();
            if (j == k) {
                x.col(j) = g.col(j);
            } else {
                x.col(k) = g.col(j) / root2;
                x.col(j) = g.col(k) / root2;
            }
            const Eigen::MatrixXd c = x + x.transpose();
            coords(c, lifted.col(index(j, k)));
        }

    Eigen::MatrixXd s(dim, family.directions.rows());
    for (Eigen::Index i = 0; i < family.directions.rows(); ++i) {
        const Eigen::VectorXd u = family.directions.row(i).transpose();
        coords(std::sqrt(family.weights(i)) * u * u.transpose(), s.col(i));
    }
    lifted.noalias() -= s * s.transpose();

    // Smallest eigenvalue of the PSD operator I - M by shifted inverse iteration.
    const double tau = 1e-13 * std::max(lifted.diagonal().maxCoeff(), 1e-300);
    Eigen::MatrixXd shifted = lifted;
    shifted.diagonal().array() += tau;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    const bool use_llt = llt.info() == Eigen::Success;
    if (!use_llt)
        ldlt.compute(shifted);

    Rng rng(0x5EEDULL);
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        v(i) = rng.normal();
    v.normalize();
    double lambda = v.dot(lifted * v);
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXd w = use_llt ? Eigen::VectorXd(llt.solve(v)) : Eigen::VectorXd(ldlt.solve(v));
        const double norm = w.norm();
        if (!std::isfinite(norm) || norm == 0.0)
            break;
        v = w / norm;
        const double next = v.dot(lifted * v);
        const bool settled = std::abs(next - lambda) <= 1e-15 + 1e-12 * std::abs(next);
        lambda = next;
        if (settled)
            break;
    }
    return 1.0 - std::max(lambda, 0.0);
}

double compute_mu_p(const ProjectorFamily& family, int p, const MuOptions& options)
{
    check_family(family);
    if (p < 1)
        throw InvalidInput("compute_mu_p: p must be >= 1");
    if (p == 1)
        return dense_extreme(expected_projector(family), Extreme::max);
    if (p == 2) {
        const std::size_t n = family.dim();
        if (options.solver == MuSolver::symmetric_dense)
            return mu2_symmetric_dense(family);
        try {
            return kron2_extreme(family, Extreme::max, options);
        } catch (const NonConvergence&) {
            if (n * (n + 1) / 2 > symmetric_dense_limit)
                throw;
            return mu2_symmetric_dense(family);
        }
    }
    return explicit_extreme(family, p, Extreme::max, options);
}

double compute_eta_p(const ProjectorFamily& family, int p, const MuOptions& options)
{
    check_family(family);
    if (p < 1)
        throw InvalidInput("compute_eta_p: p must be >= 1");
    if (p == 1)
        return dense_extreme(expected_projector(family), Extreme::min);
    if (p == 2) {
        const std::size_t n = family.dim();
        try {
            return kron2_extreme(family, Extreme::min, options);
        } catch (const NonConvergence&) {
            if (n * n > kron_explicit_limit)
                throw;
            return dense_extreme(kron_explicit(family, 2), Extreme::min);
        }
    }
    return explicit_extreme(family, p, Extreme::min, options);
}

double compute_mu_p(const Matrix& a, const Vector& weights, int p, double tol)
{
    check_matrix(a, "compute_mu_p");
    if (weights.size() != a.rows())
        throw InvalidInput("compute_mu_p: one weight per row required");
    if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12)
        throw InvalidInput("compute_mu_p: weights are not a probability vector");

    if (p == 1) {
        const Vector norm_sq = sampling_weights(a, Sampling::norm_squared);
        if ((norm_sq - weights).cwiseAbs().maxCoeff() <= 1e-12)
            return rk_rates(a).r;
    }
    ProjectorFamily family = rk_family(a);
    family.weights = weights;
    MuOptions options;
    options.tol = tol;
    return compute_mu_p(family, p, options);
}

BoundParams linear_params(const Matrix& a, Method method, double e0_norm_sq, int p_max,
                          const MuOptions& options)
{
    if (method == Method::rk_ineq)
        throw InvalidInput("linear_params: rk-ineq has no linear error recursion");
    const Rates rates = rk_rates(a);
    const ProjectorFamily family = method == Method::rk ? rk_family(a) : rgs_family(a);
    const std::size_t n = family.dim();

    BoundParams params;
    params.r = rates.r;
    params.eta = rates.eta;
    params.rho = rates.r;
    params.alpha = 1.0;
    params.e0_norm_sq = e0_norm_sq;
    params.mu_p[1] = rates.r;
    params.eta_p[1] = rates.eta;
    params.mu = compute_mu_p(family, 2, options);
    for (int p = 2; p <= p_max; ++p) {
        std::size_t size = 1;
        for (int k = 0; k < p; ++k)
            size *= n;
        if (p > 2 && size > kron_explicit_limit)
            break;
        params.mu_p[p] = p == 2 ? params.mu : compute_mu_p(family, p, options);
        params.eta_p[p] = compute_eta_p(family, p, options);
    }
    return params;
}

BoundParams with_rate_for_mu(BoundParams params)
{
    params.mu = params.r;
    return params;
}

double variance_bound(const BoundParams& params, std::size_t k, VarianceForm form)
{
    if (k == 0)
        return 0.0;
    const double kk = static_cast<double>(k);
    const double e0_4 = params.e0_norm_sq * params.e0_norm_sq;
    const double eta_term = form == VarianceForm::safe ? std::pow(params.eta, 2.0 * kk)
                                                       : std::pow(params.eta, kk);
    return (std::pow(params.mu, kk) - eta_term) * e0_4;
}

double chebyshev_interval(const BoundParams& params, std::size_t k, double eps, VarianceForm form)
{
    if (!(eps > 0.0 && eps <= 1.0))
        throw InvalidInput("chebyshev_interval: eps must lie in (0, 1]");
    return std::sqrt(std::max(variance_bound(params, k, form), 0.0) / eps);
}

BoundValue chebyshev_tail(const BoundParams& params, std::size_t k, double t, VarianceForm form)
{
    if (!(t > 0.0))
        throw InvalidInput("chebyshev_tail: t must be positive");
    BoundValue out;
    out.value = variance_bound(params, k, form) / (t * t);
    if (out.value > 1.0)
        out.reason = "vacuous (> 1)";
    return out;
}

BoundValue markov_bound(double r, std::size_t k, double d0_sq, double t)
{
    if (!(t > 0.0))
        throw InvalidInput("markov_bound: t must be positive");
    BoundValue out;
    out.value = std::pow(r, static_cast<double>(k)) * d0_sq / t;
    if (out.value > 1.0)
        out.reason = "vacuous (> 1)";
    return out;
}

double trajectory_markov_bound(double rho, double eps)
{
    if (!(eps > 0.0 && eps <= 1.0))
        throw InvalidInput("trajectory_markov_bound: eps must lie in (0, 1]");
    if (!(rho >= 0.0))
        throw InvalidInput("trajectory_markov_bound: rho must be nonnegative");
    return 1.0 / eps;
}

BoundValue azuma_bound(double rho, double alpha, std::size_t k, double eps)
{
    if (!(alpha >= 1.0))
        throw InvalidInput("azuma_bound: alpha must be >= 1");
    if (!(eps > 0.0 && eps < 1.0))
        throw InvalidInput("azuma_bound: eps must lie in (0, 1)");
    const double kk = static_cast<double>(k);
    BoundValue out;
    out.value = std::exp(-kk * (1.0 - rho) + alpha * std::sqrt(2.0 * kk * std::log(1.0 / eps)));
    if (out.value > 1.0)
        out.reason = "vacuous (> 1)";
    return out;
}

BoundValue matrix_conc_bound(double rho, std::size_t n, std::size_t k, double e0_sq, double t)
{
    if (!(rho > 0.0 && rho < 1.0))
        throw InvalidInput("matrix_conc_bound: rho must lie in (0, 1)");
    if (!(t > 0.0))
        throw InvalidInput("matrix_conc_bound: t must be positive");
    const double kk = static_cast<double>(k);
    const double threshold = 2.0 * std::numbers::e * kk * e0_sq * (rho + 2.0 + 1.0 / rho);
    BoundValue out;
    out.applicable = t * t >= threshold;
    if (!out.applicable) {
        out.reason = "requires t^2 >= " + std::to_string(threshold);
        out.value = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const double exponent = threshold == 0.0 ? -std::numeric_limits<double>::infinity()
                                             : -(t * t) / threshold;
    out.value = static_cast<double>(n) * std::pow(rho, kk) * std::exp(exponent);
    out.reason = "bounds ||e_k - E e_k||^2, not the centered squared norm";
    return out;
}

double nonlinear_variance_bound(double r, std::size_t k, double d, double d0_sq)
{
    if (!(r >= 0.0 && r <= 1.0))
        throw InvalidInput("nonlinear_variance_bound: r must lie in [0, 1]");
    if (!(d >= 0.0))
        throw InvalidInput("nonlinear_variance_bound: D must be nonnegative");
    return d * d * std::pow(r, static_cast<double>(k)) * d0_sq;
}

double feasibility_rate(double hoffman_l, double fro_norm_sq)
{
    if (!(hoffman_l > 0.0))
        throw InvalidInput("feasibility_rate: Hoffman constant must be positive");
    if (!(fro_norm_sq > 0.0))
        throw InvalidInput("feasibility_rate: ||A||_F^2 must be positive");
    // L^2 ||A||_F^2 >= 1 always; clamp roundoff from a unit row computed in floating point
    return std::max(0.0, 1.0 - 1.0 / (hoffman_l * hoffman_l * fro_norm_sq));
}

double anticoncentration_floor(std::size_t count, std::size_t k)
{
    if (k == 0)
        throw InvalidInput("anticoncentration_floor: k must be >= 1");
    if (count == 0)
        throw InvalidInput("anticoncentration_floor: count must be >= 1");
    return std::pow(static_cast<double>(count), -static_cast<double>(k - 1));
}

std::pair<double, double> moment_bounds(const BoundParams& params, int p, std::size_t k)
{
    const auto mu = params.mu_p.find(p);
    const auto eta = params.eta_p.find(p);
    if (mu == params.mu_p.end() || eta == params.eta_p.end())
        throw InvalidInput("moment_bounds: mu_" + std::to_string(p) +
                           " unavailable (explicit lifting needs n^p <= " +
                           std::to_string(kron_explicit_limit) + ")");
    const double kk = static_cast<double>(k);
    const double e0 = std::pow(params.e0_norm_sq, static_cast<double>(p));
    return {std::pow(eta->second, kk) * e0, std::pow(mu->second, kk) * e0};
}

} // namespace stochconc
