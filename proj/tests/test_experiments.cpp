#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "stochconc/experiments.hpp"

using namespace stochconc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

class Scratch : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir = fs::temp_directory_path() /
              ("stochconc_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    fs::path dir;
};

} // namespace

TEST(Config, UnknownKeyNamesPath)
{
    try {
        parse_config(nlohmann::json::parse(R"({"trials": {"count": 3, "iteratons": 4}})"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("trials.iteratons"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"plot": 1})")), ConfigError);
}

TEST(Config, BadValuesNamePath)
{
    const auto expect_path = [](const char* doc, const char* path) {
        try {
            parse_config(nlohmann::json::parse(doc));
            ADD_FAILURE() << doc;
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find(path), std::string::npos) << e.what();
        }
    };
    expect_path(R"({"trials": {"iterations": 0}})", "trials.iterations");
    expect_path(R"({"trials": {"count": -2}})", "trials.count");
    expect_path(R"({"matrix": {"sigma": "quadratic"}})", "matrix.sigma");
    expect_path(R"({"bounds": {"eps": [0.1, 1.5]}})", "bounds.eps[1]");
    expect_path(R"({"bounds": {"forms": ["loose"]}})", "bounds.forms[0]");
    expect_path(R"({"matrix": {"kind": "mtx-file"}})", "matrix.path");
    expect_path(R"({"heatmap_compare": {"t_list": [1, 0]}})", "heatmap_compare.t_list[1]");
}

TEST(Config, ParsesFullDocument)
{
    const auto c = parse_config(nlohmann::json::parse(R"({
        "matrix": {"kind": "spectrum", "m": 50, "n": 5, "sigma": [1, 0.5, 0.5, 0.2, 0.1], "seed": 4},
        "normalize": "col",
        "solver": {"method": "rgs", "sampling": "uniform", "x0": [1, 2, 3, 4, 5]},
        "trials": {"count": 7, "iterations": 9, "master_seed": 11},
        "bounds": {"eps": [0.1], "forms": ["safe", "paper"], "center": "envelope"},
        "output": "somewhere"
    })"));
    EXPECT_EQ(c.matrix.kind, MatrixKind::spectrum);
    EXPECT_EQ(c.matrix.sigma_list.size(), 5u);
    EXPECT_EQ(c.normalize, Normalization::col);
    EXPECT_EQ(c.method, Method::rgs);
    EXPECT_EQ(c.sampling, Sampling::uniform);
    EXPECT_EQ(c.x0->size(), 5u);
    EXPECT_EQ(c.trial_count, 7u);
    EXPECT_EQ(c.forms.size(), 2u);
    EXPECT_EQ(c.center, CiCenter::envelope);
    EXPECT_EQ(c.output, fs::path("somewhere"));
}

TEST(Config, Presets)
{
    for (const auto& name : preset_names())
        EXPECT_NO_THROW(preset_config(name)) << name;
    EXPECT_THROW(preset_config("fig9"), ConfigError);
    const auto full = preset_config("fig2", true);
    EXPECT_EQ(full.mu_m_list.size(), 10u);
    EXPECT_EQ(full.mu_trials_per_cell, 5u);
    const auto desk = preset_config("fig2");
    EXPECT_EQ(desk.mu_m_list, (std::vector<std::size_t>{10, 20, 40, 80}));
    const auto a = build_matrix(preset_config("fig3a"));
    EXPECT_NEAR(spectral_summary(a).condition_number, 1.02, 0.005);
    const auto d = build_matrix(preset_config("fig4d-synthetic"));
    EXPECT_EQ(d.rows(), 1200);
    EXPECT_EQ(d.cols(), 400);
}

TEST(CsvNumber, SeventeenDigits)
{
    EXPECT_EQ(csv_number(0.1), "0.10000000000000001");
    EXPECT_EQ(csv_number(2.0), "2");
    EXPECT_EQ(csv_number(std::nan("")), "nan");
}

TEST_F(Scratch, TrialsShapeOnIdentity)
{
    save_matrix_market(dir / "I.mtx", Matrix::Identity(2, 2));
    ExperimentConfig c;
    c.matrix.kind = MatrixKind::mtx_file;
    c.matrix.path = (dir / "I.mtx").string();
    c.trial_count = 2;
    c.iterations = 1;
    c.output = dir / "out";
    cmd_trials(c, 1);
    const auto traj = lines(slurp(dir / "out" / "trajectory.csv"));
    ASSERT_EQ(traj.size(), 5u);
    EXPECT_EQ(traj[0], "trial,k,error_sq");
    const auto sum = lines(slurp(dir / "out" / "summary.csv"));
    ASSERT_EQ(sum.size(), 3u);
    EXPECT_EQ(sum[0], "k,emp_mean,emp_var,mean_bound,q05,q25,q50,q75,q95,ci75_lo,ci75_hi,ci95_lo,ci95_hi");
    EXPECT_EQ(slurp(dir / "out" / "summary.csv").find('\r'), std::string::npos);
}

TEST_F(Scratch, TrialsExtraFormsGetSuffix)
{
    ExperimentConfig c = preset_config("fig3b");
    c.matrix.m = 60;
    c.matrix.n = 4;
    c.trial_count = 5;
    c.iterations = 3;
    c.forms = {VarianceForm::paper, VarianceForm::safe};
    c.output = dir;
    cmd_trials(c, 2);
    const auto sum = lines(slurp(dir / "summary.csv"));
    EXPECT_NE(sum[0].find(",ci95_hi,ci75_lo_safe,ci75_hi_safe,ci95_lo_safe,ci95_hi_safe"),
              std::string::npos)
        << sum[0];
}

TEST_F(Scratch, TrialsRerunIsByteIdentical)
{
    ExperimentConfig c = preset_config("fig3a");
    c.trial_count = 40;
    c.iterations = 20;
    c.output = dir / "a";
    cmd_trials(c, 1);
    c.output = dir / "b";
    cmd_trials(c, 3);
    EXPECT_EQ(slurp(dir / "a" / "trajectory.csv"), slurp(dir / "b" / "trajectory.csv"));
    EXPECT_EQ(slurp(dir / "a" / "summary.csv"), slurp(dir / "b" / "summary.csv"));
}

TEST_F(Scratch, UnwritableOutput)
{
    std::ofstream(dir / "blocker") << "x";
    ExperimentConfig c = preset_config("fig3a");
    c.trial_count = 2;
    c.iterations = 2;
    c.output = dir / "blocker" / "sub";
    EXPECT_ANY_THROW(cmd_trials(c, 1));
}

TEST(HeatmapMu, ForcedTwoRowCell)
{
    Matrix a(2, 2);
    const double h = 1.0 / std::sqrt(2.0);
    a << 1.0, 0.0, h, h;
    const auto lr = log_r_mu(a);
    EXPECT_NEAR(lr.log_r_mu, std::log(0.75) / std::log(0.5 + 0.5 * h), 1e-9);
    EXPECT_NEAR(lr.log_r_mu, 1.816, 1e-3);
}

TEST(HeatmapMu, WideCellsAreZeroAndTallCellsPositive)
{
    const auto cells = heatmap_mu({4, 12}, {6, 3}, 2, std::sqrt(10.0), 5);
    ASSERT_EQ(cells.size(), 4u);
    for (const auto& c : cells) {
        if (c.m < c.n) {
            EXPECT_EQ(c.avg_log_r_mu, 0.0);
            EXPECT_NEAR(c.mu_mean, 1.0, 1e-8);
        } else {
            EXPECT_GE(c.avg_log_r_mu, 1.0 - 1e-9);
            EXPECT_TRUE(c.note.empty());
        }
    }
    // grid order is m-major
    EXPECT_EQ(cells[1].m, 4u);
    EXPECT_EQ(cells[1].n, 3u);
}

TEST_F(Scratch, HeatmapMuCsv)
{
    ExperimentConfig c;
    c.mu_m_list = {3, 6};
    c.mu_n_list = {3};
    c.mu_trials_per_cell = 2;
    c.output = dir;
    cmd_heatmap_mu(c, 2);
    const auto l = lines(slurp(dir / "mu_heatmap.csv"));
    ASSERT_EQ(l.size(), 3u);
    EXPECT_EQ(l[0], "m,n,avg_log_r_mu,mu_mean,r_mean");
}

TEST(HeatmapCompare, MonotoneInTAndGated)
{
    const Matrix a = build_matrix(preset_config("fig4b"));
    const std::vector<double> ts = {1e-3, 1e-1, 10, 1e3, 1e5};
    const auto cells = heatmap_compare(a, Method::rk, {1, 10, 100}, ts);
    ASSERT_EQ(cells.size(), 15u);
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
        if (cells[i].k != cells[i + 1].k)
            continue;
        EXPECT_GE(cells[i].chebyshev_paper, cells[i + 1].chebyshev_paper);
        EXPECT_GE(cells[i].chebyshev_safe, cells[i + 1].chebyshev_safe);
        EXPECT_GE(cells[i].markov, cells[i + 1].markov);
        if (cells[i].matrix_conc.applicable)
            EXPECT_GE(cells[i].matrix_conc.value, cells[i + 1].matrix_conc.value);
    }
    EXPECT_FALSE(cells[0].matrix_conc.applicable);
    EXPECT_TRUE(cells[4].matrix_conc.applicable);
}

TEST(HeatmapCompare, ChebyshevBeatsMarkovForMostModerateCells)
{
    const Matrix a = build_matrix(preset_config("fig4b"));
    const auto cfg = preset_config("fig4b");
    const auto cells = heatmap_compare(a, Method::rk, cfg.k_list, {0.1, 1, 10});
    std::size_t wins = 0;
    for (const auto& c : cells)
        wins += c.chebyshev_paper <= c.markov;
    EXPECT_GT(2 * wins, cells.size());
}

TEST_F(Scratch, HeatmapCompareCsvHasEmptyInapplicableValue)
{
    ExperimentConfig c = preset_config("fig4b");
    c.k_list = {10};
    c.t_list = {1e-3};
    c.output = dir;
    cmd_heatmap_compare(c);
    const auto l = lines(slurp(dir / "bound_compare.csv"));
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[0], "k,t,chebyshev_paper,chebyshev_safe,markov,matrix_conc,matrix_conc_applicable");
    EXPECT_NE(l[1].find(",,false"), std::string::npos) << l[1];
}

TEST_F(Scratch, BoundsReportOnIdentity)
{
    save_matrix_market(dir / "I.mtx", Matrix::Identity(2, 2));
    ExperimentConfig c;
    c.matrix.kind = MatrixKind::mtx_file;
    c.matrix.path = (dir / "I.mtx").string();
    c.point_k = 2;
    c.point_t = 0.01;
    c.point_eps = 0.05;
    std::ostringstream out;
    cmd_bounds(c, out);
    const std::string s = out.str();
    EXPECT_NE(s.find("\nr = 0.5\n"), std::string::npos) << s;
    EXPECT_NE(s.find("\neta = 0.5\n"), std::string::npos);
    EXPECT_NE(s.find("\nmu_1 = 0.5\n"), std::string::npos);
    EXPECT_NE(s.find("\nmu_2 = 0.5"), std::string::npos);
    EXPECT_NE(s.find("variance_safe = "), std::string::npos);
    EXPECT_NE(s.find("variance_paper = "), std::string::npos);
    EXPECT_NE(s.find("trajectory_envelope_multiplier = 20\n"), std::string::npos);
    EXPECT_NE(s.find("vacuous=true"), std::string::npos);
}

TEST_F(Scratch, GenMatrixRoundTrip)
{
    ExperimentConfig c = preset_config("fig3c");
    c.matrix.m = 30;
    c.matrix.n = 4;
    c.output = dir;
    cmd_gen_matrix(c);
    const Matrix a = load_matrix_market(dir / "A.mtx");
    const Matrix b = load_matrix_market(dir / "b.mtx");
    const Matrix x = load_matrix_market(dir / "x_star.mtx");
    EXPECT_EQ(a.rows(), 30);
    EXPECT_EQ(b.cols(), 1);
    EXPECT_LE((a * x - b).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((a - build_matrix(c)).cwiseAbs().maxCoeff(), 1e-12);
}
