#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stochconc/bounds.hpp"
#include "stochconc/solvers.hpp"
#include "stochconc/system_gen.hpp"

namespace stochconc {

/// Invalid experiment configuration; the message names the offending field path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class MatrixKind { gaussian, spectrum, mtx_file };
enum class Normalization { none, row, col };
enum class CiCenter { empirical, envelope };

struct MatrixSpec {
    MatrixKind kind = MatrixKind::gaussian;
    std::size_t m = 1000;
    std::size_t n = 20;
    double std_dev = 1.0;
    std::string sigma = "linear";        ///< "linear", "inverse" or "list"
    std::vector<double> sigma_list;      ///< used when sigma == "list"
    std::string path;
    std::uint64_t seed = 1;
    std::uint64_t solution_seed = 2;
};

struct ExperimentConfig {
    MatrixSpec matrix;
    Normalization normalize = Normalization::none;

    Method method = Method::rk;
    Sampling sampling = Sampling::norm_squared;
    std::optional<std::vector<double>> x0;  ///< zero vector when empty

    std::size_t trial_count = 500;
    std::size_t iterations = 100;
    std::uint64_t master_seed = 20240601;

    std::vector<double> eps = {0.25, 0.05};
    std::vector<VarianceForm> forms = {VarianceForm::paper};
    CiCenter center = CiCenter::empirical;

    // heatmap-mu
    std::vector<std::size_t> mu_m_list = {10, 20, 40, 80};
    std::vector<std::size_t> mu_n_list = {10, 20, 40, 80};
    std::size_t mu_trials_per_cell = 3;
    double mu_std = 3.1622776601683795;  ///< N(0, 10): variance 10
    std::uint64_t mu_seed = 7;

    // heatmap-compare
    std::vector<std::size_t> k_list = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
    std::vector<double> t_list = {1e-3, 1e-2, 1e-1, 1, 10, 100, 1000, 10000};

    // bounds
    std::size_t point_k = 10;
    double point_t = 0.5;
    double point_eps = 0.05;

    std::filesystem::path output = "out";
};

/// Parses a JSON config; unknown keys and bad values throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Named presets: fig1, fig2, fig3a, fig3b, fig3c, fig4a, fig4b, fig4c,
/// fig4d-synthetic. `full` enlarges the fig2 grid and trial count.
ExperimentConfig preset_config(const std::string& name, bool full = false);
std::vector<std::string> preset_names();

/// Builds A per the matrix spec and normalization.
Matrix build_matrix(const ExperimentConfig& config);

/// A plus b = A x* with x* from matrix.solution_seed.
LinearSystem build_system(const ExperimentConfig& config);

/// Formats a double with 17 significant digits ("nan" / "inf" when not finite).
std::string csv_number(double v);

/// trajectory.csv and summary.csv in config.output.
void cmd_trials(const ExperimentConfig& config, unsigned threads);

struct MuCell {
    std::size_t m = 0, n = 0;
    double avg_log_r_mu = 0.0;  ///< NaN sentinel when r == 1 on a tall matrix
    double mu_mean = 0.0;
    double r_mean = 0.0;
    std::string note;
};

/// (mu_2, r, ln mu_2 / ln r) for the row-normalized RK family of `a`. The log
/// ratio is NaN when r == 1.
struct LogRateMu {
    double mu = 1.0;
    double r = 1.0;
    double log_r_mu = 0.0;
};
LogRateMu log_r_mu(const Matrix& a);

std::vector<MuCell> heatmap_mu(const std::vector<std::size_t>& m_list,
                               const std::vector<std::size_t>& n_list,
                               std::size_t trials_per_cell, double std_dev, std::uint64_t seed,
                               unsigned threads = 1);

/// mu_heatmap.csv in config.output.
void cmd_heatmap_mu(const ExperimentConfig& config, unsigned threads);

struct CompareCell {
    std::size_t k = 0;
    double t = 0.0;
    double chebyshev_paper = 0.0;
    double chebyshev_safe = 0.0;
    double markov = 0.0;
    BoundValue matrix_conc;
};

/// Tail bounds on P[||e_k||^2 - E||e_k||^2 >= t] with t in units of ||e0||^2.
/// The matrix-concentration bound is evaluated on the same event magnitude,
/// i.e. with its squared threshold equal to t.
std::vector<CompareCell> heatmap_compare(const Matrix& a, Method method,
                                         const std::vector<std::size_t>& k_list,
                                         const std::vector<double>& t_list);

/// bound_compare.csv in config.output.
void cmd_heatmap_compare(const ExperimentConfig& config);

/// Writes the single-point bound report to `out`.
void cmd_bounds(const ExperimentConfig& config, std::ostream& out);

/// A.mtx, b.mtx and x_star.mtx in config.output.
void cmd_gen_matrix(const ExperimentConfig& config);

} // namespace stochconc
