#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "stochconc/bounds.hpp"
#include "stochconc/system_gen.hpp"

using namespace stochconc;

namespace {

Matrix two_row()
{
    Matrix a(2, 2);
    const double h = 1.0 / std::sqrt(2.0);
    a << 1.0, 0.0, h, h;
    return a;
}

// E[Y (x) Y] for a row family, formed entry by entry
Eigen::MatrixXd lifted(const Matrix& a, int p)
{
    const Eigen::Index n = a.cols();
    const double fro = a.squaredNorm();
    Eigen::Index dim = 1;
    for (int i = 0; i < p; ++i)
        dim *= n;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const Eigen::VectorXd row = a.row(i).transpose();
        const Eigen::MatrixXd y =
            Eigen::MatrixXd::Identity(n, n) - row * row.transpose() / row.squaredNorm();
        Eigen::MatrixXd k = y;
        for (int q = 1; q < p; ++q) {
            Eigen::MatrixXd next(k.rows() * n, k.cols() * n);
            for (Eigen::Index r = 0; r < k.rows(); ++r)
                for (Eigen::Index c = 0; c < k.cols(); ++c)
                    next.block(r * n, c * n, n, n) = k(r, c) * y;
            k = next;
        }
        out += row.squaredNorm() / fro * k;
    }
    return out;
}

double top(const Eigen::MatrixXd& m)
{
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().maxCoeff();
}

double bottom(const Eigen::MatrixXd& m)
{
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

} // namespace

TEST(RkRates, Examples)
{
    const auto id = rk_rates(Matrix::Identity(2, 2));
    EXPECT_NEAR(id.r, 0.5, 1e-15);
    EXPECT_NEAR(id.eta, 0.5, 1e-15);
    EXPECT_TRUE(id.contractive);

    const auto tr = rk_rates(two_row());
    EXPECT_NEAR(tr.r, 0.853553, 1e-6);
    EXPECT_NEAR(tr.eta, 0.146447, 1e-6);
    EXPECT_EQ(tr.rho, tr.r);

    const auto wide = rk_rates(gaussian_matrix(3, 5, 1.0, 1));
    EXPECT_EQ(wide.r, 1.0);
    EXPECT_FALSE(wide.contractive);
}

TEST(ComputeMu, IdentityFamily)
{
    for (std::size_t n = 2; n <= 6; ++n) {
        const auto f = rk_family(Matrix::Identity(n, n));
        EXPECT_NEAR(compute_mu_p(f, 2), 1.0 - 1.0 / n, 1e-9) << n;
    }
}

TEST(ComputeMu, TwoRowFamily)
{
    const auto f = rk_family(two_row());
    EXPECT_NEAR(compute_mu_p(f, 2), 0.75, 1e-9);
    EXPECT_NEAR(top(lifted(two_row(), 2)), 0.75, 1e-12);
    EXPECT_NEAR(compute_eta_p(f, 1), (1.0 - std::sqrt(0.5)) / 2.0, 1e-12);
    EXPECT_NEAR(mu2_symmetric_dense(f), 0.75, 1e-12);
}

TEST(ComputeMu, WideFamilyIsOne)
{
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto f = rk_family(gaussian_matrix(4, 7, 1.0, 40 + s));
        EXPECT_NEAR(compute_mu_p(f, 2), 1.0, 1e-8);
    }
}

TEST(ComputeMu, ClosedFormForFirstPower)
{
    const Matrix a = gaussian_matrix(15, 6, 1.0, 12);
    const auto s = spectral_summary(a);
    const double r = 1.0 - s.sigma_min * s.sigma_min / s.fro_norm_sq;
    const Vector w = sampling_weights(a, Sampling::norm_squared);
    EXPECT_NEAR(compute_mu_p(a, w, 1), r, 1e-12);
    EXPECT_NEAR(compute_mu_p(rk_family(a), 1), r, 1e-10);
    EXPECT_NEAR(compute_eta_p(rk_family(a), 1), 1.0 - s.sigma_max * s.sigma_max / s.fro_norm_sq,
                1e-10);
    EXPECT_THROW(compute_mu_p(a, Vector::Constant(15, 0.5), 1), InvalidInput);
}

TEST(ComputeMu, AgreesWithDenseOracle)
{
    for (std::uint64_t s = 0; s < 6; ++s) {
        const std::size_t n = 2 + s % 4;
        const Matrix a = gaussian_matrix(n + 2 + s, n, 1.0, 500 + s);
        const auto f = rk_family(a);
        const Eigen::MatrixXd l2 = lifted(a, 2);
        EXPECT_NEAR(compute_mu_p(f, 2), top(l2), 1e-8);
        EXPECT_NEAR(compute_eta_p(f, 2), bottom(l2), 1e-8);
        EXPECT_NEAR(mu2_symmetric_dense(f), top(l2), 1e-10);
        if (n <= 4) {
            const Eigen::MatrixXd l3 = lifted(a, 3);
            EXPECT_NEAR(compute_mu_p(f, 3), top(l3), 1e-8);
        }
    }
}

TEST(ComputeMu, MonotoneInPowerAndBelowRate)
{
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Matrix a = gaussian_matrix(8, 3, 1.0, 900 + s);
        const auto f = rk_family(a);
        const double r = rk_rates(a).r;
        double prev = compute_mu_p(f, 1);
        EXPECT_NEAR(prev, r, 1e-8);
        for (int p = 2; p <= 4; ++p) {
            const double mu = compute_mu_p(f, p);
            EXPECT_LE(mu, prev + 1e-8) << "p=" << p;
            prev = mu;
        }
    }
}

TEST(ComputeMu, RgsMatchesTransposeRoleOfRk)
{
    const Matrix a = gaussian_matrix(10, 4, 1.0, 31);
    const auto p = linear_params(a, Method::rgs, 1.0);
    const auto rates = rk_rates(a);
    EXPECT_NEAR(p.r, rates.r, 1e-12);
    EXPECT_LE(p.mu, p.r + 1e-8);
    EXPECT_GE(p.mu, p.eta_p.at(2) - 1e-12);
    // the RGS family on range(A) has the same first-moment spectrum
    EXPECT_NEAR(compute_mu_p(rgs_family(a), 1), rates.r, 1e-10);
    EXPECT_NEAR(compute_eta_p(rgs_family(a), 1), rates.eta, 1e-10);
}

TEST(VarianceBound, Examples)
{
    BoundParams p;
    p.mu = 0.75;
    p.eta = 0.146447;
    p.e0_norm_sq = 1.0;
    EXPECT_EQ(variance_bound(p, 0), 0.0);
    EXPECT_EQ(variance_bound(p, 0, VarianceForm::paper), 0.0);
    EXPECT_NEAR(variance_bound(p, 3), std::pow(0.75, 3) - std::pow(0.146447, 6), 1e-15);
    EXPECT_NEAR(variance_bound(p, 3), 0.421865, 1e-6);

    BoundParams id;
    id.mu = 0.5;
    id.eta = 0.5;
    id.e0_norm_sq = 2.0;
    EXPECT_NEAR(variance_bound(id, 2, VarianceForm::safe), 0.75, 1e-15);
    EXPECT_EQ(variance_bound(id, 2, VarianceForm::paper), 0.0);
}

TEST(ChebyshevInterval, Examples)
{
    BoundParams p;
    p.mu = 0.9;
    p.eta = 0.5;
    p.e0_norm_sq = 1.0;
    EXPECT_NEAR(chebyshev_interval(p, 2, 0.25, VarianceForm::paper), 1.49666, 1e-5);
    EXPECT_NEAR(chebyshev_interval(p, 2, 1.0), std::sqrt(variance_bound(p, 2)), 1e-15);
    // mu^k - eta^k rises for small k, then decays
    double prev = chebyshev_interval(p, 10, 0.1);
    for (std::size_t k = 11; k < 200; ++k) {
        const double hw = chebyshev_interval(p, k, 0.1);
        EXPECT_LT(hw, prev);
        prev = hw;
    }
    EXPECT_LT(prev, 1e-4);
    EXPECT_THROW(chebyshev_interval(p, 2, 0.0), InvalidInput);
    EXPECT_THROW(chebyshev_interval(p, 2, 1.5), InvalidInput);
}

TEST(MarkovBound, Examples)
{
    EXPECT_NEAR(markov_bound(0.9, 10, 1.0, 0.5).value, 0.3486784401 / 0.5, 1e-15);
    EXPECT_NEAR(markov_bound(0.9, 10, 1.0, 0.5).value, 0.6974, 1e-4);
    EXPECT_DOUBLE_EQ(markov_bound(0.9, 0, 2.0, 2.0).value, 1.0);
    const double at = std::pow(0.8, 5) * 3.0;
    EXPECT_LE(markov_bound(0.8, 5, 3.0, at).value, 1.0 + 1e-15);
    EXPECT_TRUE(markov_bound(0.9, 1, 1.0, 0.1).vacuous());
    EXPECT_THROW(markov_bound(0.9, 1, 1.0, 0.0), InvalidInput);
    EXPECT_GT(markov_bound(0.9, 3, 1.0, 0.2).value, markov_bound(0.9, 3, 1.0, 0.3).value);
    EXPECT_GT(markov_bound(0.9, 3, 1.0, 0.2).value, markov_bound(0.9, 4, 1.0, 0.2).value);
}

TEST(TrajectoryMarkov, Examples)
{
    EXPECT_EQ(trajectory_markov_bound(0.5, 1.0), 1.0);
    EXPECT_NEAR(trajectory_markov_bound(0.5, 0.1) * std::pow(0.5, 100), 7.9e-30, 0.05e-30);
    EXPECT_NEAR(trajectory_markov_bound(0.9, 0.05), 20.0, 1e-12);
    EXPECT_THROW(trajectory_markov_bound(0.5, 0.0), InvalidInput);
}

TEST(AzumaBound, Examples)
{
    EXPECT_EQ(azuma_bound(0.5, 1.0, 0, 0.1).value, 1.0);
    const auto v = azuma_bound(0.5, 1.0, 100, 0.1);
    EXPECT_NEAR(std::log(v.value), -50.0 + std::sqrt(200.0 * std::log(10.0)), 1e-12);
    EXPECT_NEAR(v.value / 4.0e-13, 1.0, 0.05);
    const auto bad = azuma_bound(0.9, 1.0, 100, 0.05);
    EXPECT_NEAR(std::log(bad.value), 14.48, 0.01);
    EXPECT_TRUE(bad.vacuous());
    EXPECT_THROW(azuma_bound(0.5, 0.5, 10, 0.1), InvalidInput);
    // decreasing once the drift dominates
    EXPECT_GT(azuma_bound(0.5, 1.0, 50, 0.1).value, azuma_bound(0.5, 1.0, 60, 0.1).value);
}

TEST(MatrixConcBound, Examples)
{
    const double e = std::exp(1.0);
    const double thresh = 2 * e * 10 * (0.9 + 2 + 1 / 0.9);
    EXPECT_NEAR(thresh, 218.07, 0.01);
    const auto v = matrix_conc_bound(0.9, 20, 10, 1.0, std::sqrt(300.0));
    EXPECT_TRUE(v.applicable);
    EXPECT_NEAR(v.value, 1.762, 1e-3);
    EXPECT_TRUE(v.vacuous());

    const auto below = matrix_conc_bound(0.9, 20, 10, 1.0, std::sqrt(200.0));
    EXPECT_FALSE(below.applicable);
    EXPECT_NE(below.reason.find("218.0"), std::string::npos) << below.reason;

    const auto k0 = matrix_conc_bound(0.9, 20, 0, 1.0, 0.5);
    EXPECT_TRUE(k0.applicable);
    EXPECT_EQ(k0.value, 0.0);
}

TEST(NonlinearVariance, Examples)
{
    EXPECT_NEAR(nonlinear_variance_bound(0.7, 3, 2.0, 4.0), std::pow(0.7, 3) * 16.0, 1e-14);
    EXPECT_EQ(nonlinear_variance_bound(0.7, 0, 2.0, 4.0), 16.0);
    const double r = feasibility_rate(1.0, 1.0);
    EXPECT_EQ(r, 0.0);
    EXPECT_EQ(nonlinear_variance_bound(r, 1, 3.0, 9.0), 0.0);
    EXPECT_THROW(feasibility_rate(0.0, 1.0), InvalidInput);
}

TEST(Anticoncentration, Examples)
{
    EXPECT_NEAR(anticoncentration_floor(3, 4), 1.0 / 27.0, 1e-16);
    EXPECT_EQ(anticoncentration_floor(5, 1), 1.0);
    EXPECT_THROW(anticoncentration_floor(3, 0), InvalidInput);
}

TEST(MomentBounds, IdentityFamily)
{
    const auto p = linear_params(Matrix::Identity(2, 2), Method::rk, 2.0);
    EXPECT_NEAR(p.mu, 0.5, 1e-9);
    const auto m1 = moment_bounds(p, 1, 2);
    EXPECT_NEAR(m1.first, 0.5, 1e-12);
    EXPECT_NEAR(m1.second, 0.5, 1e-12);
    const auto m2 = moment_bounds(p, 2, 2);
    EXPECT_NEAR(m2.second, 1.0, 1e-8);
    const auto m0 = moment_bounds(p, 2, 0);
    EXPECT_EQ(m0.first, 4.0);
    EXPECT_EQ(m0.second, 4.0);
    EXPECT_THROW(moment_bounds(p, 7, 2), InvalidInput);
}

TEST(LinearParams, Invariants)
{
    const Matrix a = normalize(gaussian_matrix(30, 5, 1.0, 3), Axis::row);
    const auto p = linear_params(a, Method::rk, 1.0, 3);
    EXPECT_LE(0.0, p.eta);
    EXPECT_LE(p.eta, p.mu + 1e-12);
    EXPECT_LE(p.mu, p.r + 1e-8);
    EXPECT_EQ(p.rho, p.r);
    EXPECT_EQ(p.alpha, 1.0);
    ASSERT_TRUE(p.mu_p.count(3));
    EXPECT_LE(p.mu_p.at(3), p.mu_p.at(2) + 1e-8);
    EXPECT_EQ(with_rate_for_mu(p).mu, p.r);
}
