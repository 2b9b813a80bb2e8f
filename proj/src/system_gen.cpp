#include "stochconc/system_gen.hpp"

#include "stochconc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace stochconc {

bool InequalitySystem::is_equality(std::size_t row) const
{
    return std::find(eq_rows.begin(), eq_rows.end(), row) != eq_rows.end();
}

Matrix gaussian_matrix(std::size_t m, std::size_t n, double std_dev, std::uint64_t seed)
{
    if (m == 0 || n == 0)
        throw InvalidInput("gaussian_matrix: dimensions must be positive");
    if (!(std_dev > 0.0))
        throw InvalidInput("gaussian_matrix: std must be positive");
    Rng rng(seed);
    Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a.data()[i] = std_dev * rng.normal();
    return a;
}

Matrix spectrum_matrix(std::size_t m, std::size_t n, const Vector& sigmas, std::uint64_t seed)
{
    const auto k = static_cast<Eigen::Index>(std::min(m, n));
    if (sigmas.size() != k)
        throw InvalidInput("spectrum_matrix: expected " + std::to_string(k) +
                           " singular values, got " + std::to_string(sigmas.size()));
    check_vector(sigmas, "spectrum_matrix sigmas");
    for (Eigen::Index i = 0; i < k; ++i) {
        if (sigmas(i) < 0.0)
            throw InvalidInput("spectrum_matrix: negative singular value");
        if (i > 0 && sigmas(i) > sigmas(i - 1))
            throw InvalidInput("spectrum_matrix: singular values must be nonincreasing");
    }

    const Eigen::MatrixXd g = gaussian_matrix(m, n, 1.0, seed);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Matrix out = svd.matrixU() * sigmas.asDiagonal() * svd.matrixV().transpose();
    return out;
}

Vector linear_sigmas(std::size_t count, std::size_t m)
{
    Vector s(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i)
        s(static_cast<Eigen::Index>(i)) = 1.0 - static_cast<double>(i) / static_cast<double>(m);
    return s;
}

Vector inverse_sigmas(std::size_t count)
{
    Vector s(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i)
        s(static_cast<Eigen::Index>(i)) = 1.0 / static_cast<double>(i + 1);
    return s;
}

Matrix normalize(const Matrix& a, Axis axis)
{
    check_matrix(a, "normalize");
    Matrix out = a;
    if (axis == Axis::row) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const double norm = a.row(i).norm();
            if (norm == 0.0)
                throw InvalidInput("normalize: zero row at index " + std::to_string(i));
            out.row(i) /= norm;
        }
    } else {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double norm = a.col(j).norm();
            if (norm == 0.0)
                throw InvalidInput("normalize: zero column at index " + std::to_string(j));
            out.col(j) /= norm;
        }
    }
    return out;
}

LinearSystem plant_system_with(const Matrix& a, const Vector& x_star)
{
    check_matrix(a, "plant_system");
    if (x_star.size() != a.cols())
        throw InvalidInput("plant_system: solution length does not match column count");
    if (!spectral_summary(a).full_column_rank)
        throw InvalidInput("plant_system: matrix is not full column rank");
    LinearSystem sys;
    sys.a = a;
    sys.b = a * x_star;
    sys.x_star = x_star;
    sys.consistent = true;
    return sys;
}

LinearSystem plant_system(const Matrix& a, std::uint64_t seed)
{
    Rng rng(seed);
    Vector x(a.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x(i) = rng.normal();
    return plant_system_with(a, x);
}

InequalitySystem make_halfspace_system(const Vector& a, double beta)
{
    check_vector(a, "make_halfspace_system");
    if (std::abs(a.norm() - 1.0) > 1e-12)
        throw InvalidInput("make_halfspace_system: normal vector must have unit norm");
    InequalitySystem sys;
    sys.a = a.transpose();
    sys.b = Vector::Constant(1, beta);
    sys.leq_rows = {0};
    sys.hoffman_l = 1.0;
    sys.oracle = DistanceOracle::halfspace;
    return sys;
}

InequalitySystem make_orthonormal_equality_system(const Matrix& a, const Vector& b)
{
    check_matrix(a, "make_orthonormal_equality_system");
    if (b.size() != a.rows())
        throw InvalidInput("make_orthonormal_equality_system: b length mismatch");
    const Matrix gram = a * a.transpose();
    if ((gram - Matrix::Identity(a.rows(), a.rows())).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidInput("make_orthonormal_equality_system: rows are not orthonormal");
    InequalitySystem sys;
    sys.a = a;
    sys.b = b;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        sys.eq_rows.push_back(static_cast<std::size_t>(i));
    sys.hoffman_l = 1.0;
    sys.oracle = DistanceOracle::orthonormal_equalities;
    return sys;
}

InequalitySystem make_inequality_system(const Matrix& a, const Vector& b,
                                        std::vector<std::size_t> leq_rows,
                                        std::vector<std::size_t> eq_rows)
{
    check_matrix(a, "make_inequality_system");
    if (b.size() != a.rows())
        throw InvalidInput("make_inequality_system: b length mismatch");
    std::vector<int> seen(static_cast<std::size_t>(a.rows()), 0);
    for (auto i : leq_rows) {
        if (i >= seen.size())
            throw InvalidInput("make_inequality_system: row index out of range");
        ++seen[i];
    }
    for (auto i : eq_rows) {
        if (i >= seen.size())
            throw InvalidInput("make_inequality_system: row index out of range");
        ++seen[i];
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i] != 1)
            throw InvalidInput("make_inequality_system: row " + std::to_string(i) +
                               " must belong to exactly one of the index sets");
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        if (a.row(i).norm() == 0.0)
            throw InvalidInput("make_inequality_system: zero row at index " + std::to_string(i));
    InequalitySystem sys;
    sys.a = a;
    sys.b = b;
    sys.leq_rows = std::move(leq_rows);
    sys.eq_rows = std::move(eq_rows);
    sys.oracle = DistanceOracle::alternating_projection_reference;
    return sys;
}

Vector dykstra_projection(const InequalitySystem& sys, const Vector& x, double tol,
                          int max_sweeps)
{
    const auto m = sys.a.rows();
    std::vector<bool> equality(static_cast<std::size_t>(m), false);
    for (auto i : sys.eq_rows)
        equality[i] = true;

    Vector y = x;
    std::vector<Vector> increments(static_cast<std::size_t>(m), Vector::Zero(x.size()));
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double moved = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            auto& inc = increments[static_cast<std::size_t>(i)];
            const Vector z = y + inc;
            const auto row = sys.a.row(i).transpose();
            const double gap = row.dot(z) - sys.b(i);
            const double scale = equality[static_cast<std::size_t>(i)] ? gap : std::max(gap, 0.0);
            const Vector projected = z - (scale / row.squaredNorm()) * row;
            inc = z - projected;
            moved += (projected - y).squaredNorm();
            y = projected;
        }
        if (std::sqrt(moved) <= tol)
            return y;
    }
    return y;
}

double distance_to_feasible(const InequalitySystem& sys, const Vector& x)
{
    switch (sys.oracle) {
    case DistanceOracle::halfspace: {
        const auto row = sys.a.row(0).transpose();
        return std::max(row.dot(x) - sys.b(0), 0.0) / row.norm();
    }
    case DistanceOracle::orthonormal_equalities:
        return (sys.a * x - sys.b).norm();
    case DistanceOracle::alternating_projection_reference:
        return (x - dykstra_projection(sys, x)).norm();
    }
    return 0.0;
}

namespace {

[[noreturn]] void mm_error(std::size_t line, const std::string& msg)
{
    throw InvalidInput("matrix market, line " + std::to_string(line) + ": " + msg);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

Matrix read_matrix_market(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        mm_error(1, "missing header");
    ++line_no;

    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix")
        mm_error(line_no, "expected '%%MatrixMarket matrix' header");
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (format != "array" && format != "coordinate")
        mm_error(line_no, "unknown format '" + format + "'");
    if (field != "real")
        mm_error(line_no, "unsupported field '" + field + "' (only real)");
    if (symmetry != "general" && symmetry != "symmetric")
        mm_error(line_no, "unsupported symmetry '" + symmetry + "'");
    const bool symmetric = symmetry == "symmetric";

    auto next_data_line = [&](std::string& out) {
        while (std::getline(in, out)) {
            ++line_no;
            const auto first = out.find_first_not_of(" \t\r");
            if (first == std::string::npos || out[first] == '%')
                continue;
            return true;
        }
        return false;
    };

    if (!next_data_line(line))
        mm_error(line_no + 1, "missing size line");
    std::istringstream size_line(line);
    long long rows = 0, cols = 0, nnz = 0;
    if (format == "array") {
        if (!(size_line >> rows >> cols))
            mm_error(line_no, "malformed size line");
    } else if (!(size_line >> rows >> cols >> nnz)) {
        mm_error(line_no, "malformed size line");
    }
    if (rows <= 0 || cols <= 0 || nnz < 0)
        mm_error(line_no, "dimensions must be positive");
    if (symmetric && rows != cols)
        mm_error(line_no, "symmetric matrix must be square");

    Matrix a = Matrix::Zero(rows, cols);
    auto parse_value = [&](std::istringstream& s) {
        double v = 0.0;
        if (!(s >> v))
            mm_error(line_no, "malformed value");
        if (!std::isfinite(v))
            mm_error(line_no, "non-finite value");
        return v;
    };

    if (format == "array") {
        // Column-major; symmetric stores the lower triangle only.
        for (long long j = 0; j < cols; ++j) {
            for (long long i = symmetric ? j : 0; i < rows; ++i) {
                if (!next_data_line(line))
                    mm_error(line_no + 1, "unexpected end of data");
                std::istringstream s(line);
                const double v = parse_value(s);
                a(i, j) = v;
                if (symmetric)
                    a(j, i) = v;
            }
        }
    } else {
        for (long long k = 0; k < nnz; ++k) {
            if (!next_data_line(line))
                mm_error(line_no + 1, "unexpected end of data");
            std::istringstream s(line);
            long long i = 0, j = 0;
            if (!(s >> i >> j))
                mm_error(line_no, "malformed index pair");
            if (i < 1 || i > rows || j < 1 || j > cols)
                mm_error(line_no, "index out of range");
            const double v = parse_value(s);
            a(i - 1, j - 1) = v;
            if (symmetric)
                a(j - 1, i - 1) = v;
        }
    }
    if (next_data_line(line))
        mm_error(line_no, "trailing data after last entry");
    return a;
}

Matrix load_matrix_market(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("matrix market: cannot open " + path.string());
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const Matrix& a, MatrixMarketFormat format)
{
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    };
    if (format == MatrixMarketFormat::array) {
        out << "%%MatrixMarket matrix array real general\n";
        out << a.rows() << ' ' << a.cols() << '\n';
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                out << fmt(a(i, j)) << '\n';
        return;
    }
    Eigen::Index nnz = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        nnz += a.data()[i] != 0.0;
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (a(i, j) != 0.0)
                out << i + 1 << ' ' << j + 1 << ' ' << fmt(a(i, j)) << '\n';
}

void save_matrix_market(const std::filesystem::path& path, const Matrix& a,
                        MatrixMarketFormat format)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InvalidInput("matrix market: cannot write " + path.string());
    write_matrix_market(out, a, format);
    if (!out)
        throw InvalidInput("matrix market: write failed for " + path.string());
}

} // namespace stochconc
