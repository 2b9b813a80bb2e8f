#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "stochconc/matrix.hpp"
#include "stochconc/solvers.hpp"

namespace stochconc {

/// Scalar inputs of the bounds for one system/method pairing.
struct BoundParams {
    double r = 1.0;    ///< expectation rate 1 - sigma_min^2 / ||A||_F^2
    double mu = 1.0;   ///< ||E[(Y^T Y)^(x)2]||
    double eta = 0.0;  ///< lambda_min(E[Y^T Y])
    std::map<int, double> mu_p;
    std::map<int, double> eta_p;
    double rho = 1.0;
    double alpha = 1.0;
    double e0_norm_sq = 1.0;
    std::optional<double> d;         ///< sup_k d(x_k, S), nonlinear bound
    std::optional<double> hoffman_l;
};

/// A bound value as computed (never clamped) plus its domain gate.
struct BoundValue {
    double value = 0.0;
    bool applicable = true;
    std::string reason;

    bool vacuous() const { return applicable && value > 1.0; }
};

enum class VarianceForm {
    safe,   ///< (mu^k - eta^(2k)) ||e0||^4
    paper,  ///< (mu^k - eta^k) ||e0||^4, as printed
};

const char* to_string(VarianceForm form);

struct Rates {
    double r = 1.0;
    double eta = 0.0;
    double rho = 1.0;
    bool contractive = false;  ///< r < 1
};

/// r = rho = 1 - sigma_min^2 / ||A||_F^2 and eta = 1 - sigma_max^2 / ||A||_F^2.
///
/// sigma_min is the n-th singular value, so a wide matrix has r = 1. The same
/// values hold for RGS on a full-column-rank A, whose residual recursion lives
/// in range(A).
Rates rk_rates(const Matrix& a);

enum class MuSolver {
    power_iteration,  ///< matrix-free; falls back to symmetric_dense on non-convergence
    symmetric_dense,  ///< shift-invert on the symmetric subspace (p = 2, max only)
};

struct MuOptions {
    double tol = 1e-10;
    int max_iters = 10000;
    std::uint64_t seed = 0x5EEDULL;
    MuSolver solver = MuSolver::power_iteration;
};

/// Largest symmetric-subspace dimension n(n+1)/2 accepted by MuSolver::symmetric_dense.
constexpr std::size_t symmetric_dense_limit = 5100;

/// mu_p = ||E[(Y^T Y)^(x)p]|| for a projector family.
///
/// p = 1 is a dense eigensolve of E[Y]; p = 2 is matrix-free (any n); p >= 3
/// forms the lifted matrix explicitly and needs n^p <= 4096.
double compute_mu_p(const ProjectorFamily& family, int p, const MuOptions& options = {});

/// eta_p = lambda_min(E[(Y^T Y)^(x)p]).
double compute_eta_p(const ProjectorFamily& family, int p, const MuOptions& options = {});

/// mu_p for the row family of `a` under explicit weights. For p = 1 and
/// norm-squared weights this is the closed form 1 - sigma_min^2 / ||A||_F^2.
double compute_mu_p(const Matrix& a, const Vector& weights, int p, double tol = 1e-10);

/// mu_2 via the symmetric-subspace shift-invert route. Exposed for tests.
double mu2_symmetric_dense(const ProjectorFamily& family);

/// Parameters for RK or RGS on `a` with norm-squared sampling: r, eta, rho = r,
/// alpha = 1, mu = mu_2 and mu_p / eta_p for p = 1..p_max (where computable).
BoundParams linear_params(const Matrix& a, Method method, double e0_norm_sq, int p_max = 2,
                          const MuOptions& options = {});

/// Replaces mu by its upper bound r, as in the RK/RGS variance bound that
/// underlies the published confidence bands.
BoundParams with_rate_for_mu(BoundParams params);

double variance_bound(const BoundParams& params, std::size_t k,
                      VarianceForm form = VarianceForm::safe);

/// Half-width sqrt(variance_bound / eps) of the (1 - eps) Chebyshev interval.
double chebyshev_interval(const BoundParams& params, std::size_t k, double eps,
                          VarianceForm form = VarianceForm::safe);

/// Chebyshev tail probability variance_bound / t^2 for a deviation of t.
BoundValue chebyshev_tail(const BoundParams& params, std::size_t k, double t,
                          VarianceForm form = VarianceForm::safe);

/// r^k d0^2 / t.
BoundValue markov_bound(double r, std::size_t k, double d0_sq, double t);

/// Envelope multiplier 1 / eps: ||e_k||^2 <= eps^-1 rho^k ||e_0||^2 for all k with
/// probability at least 1 - eps.
double trajectory_markov_bound(double rho, double eps);

/// exp(-k (1 - rho) + alpha sqrt(2 k ln(1/eps))), bounding sup_{t<=k} ||e_t||^2 / ||e_0||^2
/// with probability at least 1 - eps.
BoundValue azuma_bound(double rho, double alpha, std::size_t k, double eps);

/// n rho^k exp(-t^2 / (2 e k ||e0||^2 (rho + 2 + 1/rho))), valid only when t^2 is at
/// least the denominator. Bounds P[||e_k - E e_k||^2 >= t^2].
BoundValue matrix_conc_bound(double rho, std::size_t n, std::size_t k, double e0_sq, double t);

/// D^2 r^k d0^2.
double nonlinear_variance_bound(double r, std::size_t k, double d, double d0_sq);

/// 1 - 1 / (L^2 ||A||_F^2), the feasibility rate for RK on inequalities.
double feasibility_rate(double hoffman_l, double fro_norm_sq);

/// count^-(k-1), lower bound on P[||e_k||^2 - E||e_k||^2 >= t] for small t
/// (row-normalized RK with count = m, column-normalized RGS with count = n).
double anticoncentration_floor(std::size_t count, std::size_t k);

/// (eta_p^k ||e0||^2p, mu_p^k ||e0||^2p).
std::pair<double, double> moment_bounds(const BoundParams& params, int p, std::size_t k);

} // namespace stochconc
