#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "stochconc/matrix.hpp"

namespace stochconc {

struct LinearSystem {
    Matrix a;
    Vector b;
    std::optional<Vector> x_star;
    bool consistent = false;
};

enum class DistanceOracle { halfspace, orthonormal_equalities, alternating_projection_reference };

/// a_i^T x <= b_i for i in leq_rows, a_i^T x = b_i for i in eq_rows.
struct InequalitySystem {
    Matrix a;
    Vector b;
    std::vector<std::size_t> leq_rows;
    std::vector<std::size_t> eq_rows;
    std::optional<double> hoffman_l;
    DistanceOracle oracle = DistanceOracle::alternating_projection_reference;

    bool is_equality(std::size_t row) const;
};

/// i.i.d. N(0, std^2) entries in row-major order from Rng(seed).
Matrix gaussian_matrix(std::size_t m, std::size_t n, double std_dev, std::uint64_t seed);

/// U diag(sigmas) V^T with U, V the thin singular factors of gaussian_matrix(m, n, 1, seed).
Matrix spectrum_matrix(std::size_t m, std::size_t n, const Vector& sigmas, std::uint64_t seed);

/// sigma_i = 1 - (i - 1) / m, i = 1..count.
Vector linear_sigmas(std::size_t count, std::size_t m);
/// sigma_i = 1 / i, i = 1..count.
Vector inverse_sigmas(std::size_t count);

Matrix normalize(const Matrix& a, Axis axis);

/// Plants x* ~ N(0, I) from Rng(seed) and sets b = A x*.
LinearSystem plant_system(const Matrix& a, std::uint64_t seed);
/// Same with a caller-chosen solution.
LinearSystem plant_system_with(const Matrix& a, const Vector& x_star);

InequalitySystem make_halfspace_system(const Vector& a, double beta);
InequalitySystem make_orthonormal_equality_system(const Matrix& a, const Vector& b);
/// Generic mixed system; distance is the approximate Dykstra reference.
InequalitySystem make_inequality_system(const Matrix& a, const Vector& b,
                                        std::vector<std::size_t> leq_rows,
                                        std::vector<std::size_t> eq_rows);

/// Euclidean distance from x to the feasible set, using the system's oracle.
double distance_to_feasible(const InequalitySystem& sys, const Vector& x);

/// Projection of x onto the feasible set by Dykstra's alternating projections,
/// stopped when an entire sweep moves the iterate by less than tol.
/// Approximate: accuracy is limited by tol and max_sweeps.
Vector dykstra_projection(const InequalitySystem& sys, const Vector& x, double tol = 1e-12,
                          int max_sweeps = 100000);

enum class MatrixMarketFormat { array, coordinate };

Matrix read_matrix_market(std::istream& in);
Matrix load_matrix_market(const std::filesystem::path& path);
void write_matrix_market(std::ostream& out, const Matrix& a,
                         MatrixMarketFormat format = MatrixMarketFormat::array);
void save_matrix_market(const std::filesystem::path& path, const Matrix& a,
                        MatrixMarketFormat format = MatrixMarketFormat::array);

} // namespace stochconc
