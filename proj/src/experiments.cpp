#include "stochconc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "stochconc/ensemble.hpp"

namespace stochconc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw ConfigError("config field '" + path + "': " + what);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object())
        fail(path.empty() ? "<root>" : path, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items())
        if (!ok.count(item.key()))
            fail(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
}

std::string join(const std::string& path, const char* key)
{
    return path.empty() ? key : path + "." + key;
}

std::uint64_t get_u64(const json& v, const std::string& path)
{
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        fail(path, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::size_t get_count(const json& v, const std::string& path)
{
    const auto x = get_u64(v, path);
    if (x < 1)
        fail(path, "must be at least 1");
    return static_cast<std::size_t>(x);
}

double get_double(const json& v, const std::string& path)
{
    if (!v.is_number())
        fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        fail(path, "must be finite");
    return x;
}

std::string get_string(const json& v, const std::string& path)
{
    if (!v.is_string())
        fail(path, "expected a string");
    return v.get<std::string>();
}

std::vector<double> get_doubles(const json& v, const std::string& path)
{
    if (!v.is_array() || v.empty())
        fail(path, "expected a nonempty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(get_double(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::size_t> get_counts(const json& v, const std::string& path)
{
    if (!v.is_array() || v.empty())
        fail(path, "expected a nonempty array of positive integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(get_count(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

void parse_matrix(const json& j, const std::string& path, MatrixSpec& spec)
{
    check_keys(j, path, {"kind", "m", "n", "std", "sigma", "path", "seed", "solution_seed"});
    if (j.contains("kind")) {
        const auto kind = get_string(j["kind"], join(path, "kind"));
        if (kind == "gaussian")
            spec.kind = MatrixKind::gaussian;
        else if (kind == "spectrum")
            spec.kind = MatrixKind::spectrum;
        else if (kind == "mtx-file")
            spec.kind = MatrixKind::mtx_file;
        else
            fail(join(path, "kind"), "expected gaussian, spectrum or mtx-file");
    }
    if (j.contains("m"))
        spec.m = get_count(j["m"], join(path, "m"));
    if (j.contains("n"))
        spec.n = get_count(j["n"], join(path, "n"));
    if (j.contains("std")) {
        spec.std_dev = get_double(j["std"], join(path, "std"));
        if (spec.std_dev <= 0.0)
            fail(join(path, "std"), "must be positive");
    }
    if (j.contains("sigma")) {
        const json& s = j["sigma"];
        if (s.is_array()) {
            spec.sigma = "list";
            spec.sigma_list = get_doubles(s, join(path, "sigma"));
        } else {
            spec.sigma = get_string(s, join(path, "sigma"));
            if (spec.sigma != "linear" && spec.sigma != "inverse")
                fail(join(path, "sigma"), "expected \"linear\", \"inverse\" or a list");
        }
    }
    if (j.contains("path"))
        spec.path = get_string(j["path"], join(path, "path"));
    if (j.contains("seed"))
        spec.seed = get_u64(j["seed"], join(path, "seed"));
    if (j.contains("solution_seed"))
        spec.solution_seed = get_u64(j["solution_seed"], join(path, "solution_seed"));
    if (spec.kind == MatrixKind::mtx_file && spec.path.empty())
        fail(join(path, "path"), "required for kind mtx-file");
}

VarianceForm parse_form(const json& v, const std::string& path)
{
    const auto s = get_string(v, path);
    if (s == "paper")
        return VarianceForm::paper;
    if (s == "safe")
        return VarianceForm::safe;
    fail(path, "expected \"paper\" or \"safe\"");
}

} // namespace

ExperimentConfig parse_config(const json& doc)
{
    ExperimentConfig c;
    check_keys(doc, "", {"matrix", "normalize", "solver", "trials", "bounds", "heatmap_mu",
                         "heatmap_compare", "output"});

    if (doc.contains("matrix"))
        parse_matrix(doc["matrix"], "matrix", c.matrix);

    if (doc.contains("normalize")) {
        const auto s = get_string(doc["normalize"], "normalize");
        if (s == "row")
            c.normalize = Normalization::row;
        else if (s == "col")
            c.normalize = Normalization::col;
        else if (s == "none")
            c.normalize = Normalization::none;
        else
            fail("normalize", "expected row, col or none");
    }

    if (doc.contains("solver")) {
        const json& j = doc["solver"];
        check_keys(j, "solver", {"method", "sampling", "x0"});
        if (j.contains("method")) {
            const auto s = get_string(j["method"], "solver.method");
            if (s == "rk")
                c.method = Method::rk;
            else if (s == "rgs")
                c.method = Method::rgs;
            else
                fail("solver.method", "expected rk or rgs");
        }
        if (j.contains("sampling")) {
            const auto s = get_string(j["sampling"], "solver.sampling");
            if (s == "norm_squared")
                c.sampling = Sampling::norm_squared;
            else if (s == "uniform")
                c.sampling = Sampling::uniform;
            else
                fail("solver.sampling", "expected norm_squared or uniform");
        }
        if (j.contains("x0")) {
            const json& x = j["x0"];
            if (x.is_string()) {
                if (x.get<std::string>() != "zero")
                    fail("solver.x0", "expected \"zero\" or an array");
                c.x0.reset();
            } else {
                c.x0 = get_doubles(x, "solver.x0");
            }
        }
    }

    if (doc.contains("trials")) {
        const json& j = doc["trials"];
        check_keys(j, "trials", {"count", "iterations", "master_seed"});
        if (j.contains("count"))
            c.trial_count = get_count(j["count"], "trials.count");
        if (j.contains("iterations"))
            c.iterations = get_count(j["iterations"], "trials.iterations");
        if (j.contains("master_seed"))
            c.master_seed = get_u64(j["master_seed"], "trials.master_seed");
    }

    if (doc.contains("bounds")) {
        const json& j = doc["bounds"];
        check_keys(j, "bounds", {"eps", "forms", "center", "k", "t", "point_eps"});
        if (j.contains("eps")) {
            c.eps = get_doubles(j["eps"], "bounds.eps");
            for (std::size_t i = 0; i < c.eps.size(); ++i)
                if (!(c.eps[i] > 0.0 && c.eps[i] < 1.0))
                    fail("bounds.eps[" + std::to_string(i) + "]", "must lie in (0, 1)");
        }
        if (j.contains("forms")) {
            const json& f = j["forms"];
            if (!f.is_array() || f.empty())
                fail("bounds.forms", "expected a nonempty array");
            c.forms.clear();
            for (std::size_t i = 0; i < f.size(); ++i)
                c.forms.push_back(parse_form(f[i], "bounds.forms[" + std::to_string(i) + "]"));
        }
        if (j.contains("center")) {
            const auto s = get_string(j["center"], "bounds.center");
            if (s == "empirical")
                c.center = CiCenter::empirical;
            else if (s == "envelope")
                c.center = CiCenter::envelope;
            else
                fail("bounds.center", "expected empirical or envelope");
        }
        if (j.contains("k"))
            c.point_k = static_cast<std::size_t>(get_u64(j["k"], "bounds.k"));
        if (j.contains("t")) {
            c.point_t = get_double(j["t"], "bounds.t");
            if (c.point_t <= 0.0)
                fail("bounds.t", "must be positive");
        }
        if (j.contains("point_eps")) {
            c.point_eps = get_double(j["point_eps"], "bounds.point_eps");
            if (!(c.point_eps > 0.0 && c.point_eps < 1.0))
                fail("bounds.point_eps", "must lie in (0, 1)");
        }
    }

    if (doc.contains("heatmap_mu")) {
        const json& j = doc["heatmap_mu"];
        check_keys(j, "heatmap_mu", {"m_list", "n_list", "trials_per_cell", "std", "seed"});
        if (j.contains("m_list"))
            c.mu_m_list = get_counts(j["m_list"], "heatmap_mu.m_list");
        if (j.contains("n_list"))
            c.mu_n_list = get_counts(j["n_list"], "heatmap_mu.n_list");
        if (j.contains("trials_per_cell"))
            c.mu_trials_per_cell = get_count(j["trials_per_cell"], "heatmap_mu.trials_per_cell");
        if (j.contains("std")) {
            c.mu_std = get_double(j["std"], "heatmap_mu.std");
            if (c.mu_std <= 0.0)
                fail("heatmap_mu.std", "must be positive");
        }
        if (j.contains("seed"))
            c.mu_seed = get_u64(j["seed"], "heatmap_mu.seed");
    }

    if (doc.contains("heatmap_compare")) {
        const json& j = doc["heatmap_compare"];
        check_keys(j, "heatmap_compare", {"k_list", "t_list"});
        if (j.contains("k_list"))
            c.k_list = get_counts(j["k_list"], "heatmap_compare.k_list");
        if (j.contains("t_list")) {
            c.t_list = get_doubles(j["t_list"], "heatmap_compare.t_list");
            for (std::size_t i = 0; i < c.t_list.size(); ++i)
                if (c.t_list[i] <= 0.0)
                    fail("heatmap_compare.t_list[" + std::to_string(i) + "]", "must be positive");
        }
    }

    if (doc.contains("output"))
        c.output = get_string(doc["output"], "output");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

std::vector<std::string> preset_names()
{
    return {"fig1",  "fig2",  "fig3a", "fig3b",          "fig3c",
            "fig4a", "fig4b", "fig4c", "fig4d-synthetic"};
}

ExperimentConfig preset_config(const std::string& name, bool full)
{
    ExperimentConfig c;
    c.output = std::filesystem::path("out") / name;
    c.trial_count = 500;
    c.iterations = 100;
    c.matrix.m = 1000;
    c.matrix.n = 20;

    const auto spectrum = [&](const char* sigma) {
        c.matrix.kind = MatrixKind::spectrum;
        c.matrix.sigma = sigma;
    };
    const auto gaussian = [&] {
        c.matrix.kind = MatrixKind::gaussian;
        c.matrix.std_dev = 1.0;
    };

    if (name == "fig1" || name == "fig3a" || name == "fig4a") {
        spectrum("linear");
    } else if (name == "fig3b" || name == "fig4b") {
        gaussian();
    } else if (name == "fig3c" || name == "fig4c") {
        spectrum("inverse");
    } else if (name == "fig4d-synthetic") {
        // stand-in for the tomography matrix: same shape class, kappa about 21.5
        c.matrix.kind = MatrixKind::spectrum;
        c.matrix.m = 1200;
        c.matrix.n = 400;
        c.matrix.sigma = "list";
        const double lo = 1.0 / 21.53;
        for (std::size_t i = 0; i < c.matrix.n; ++i)
            c.matrix.sigma_list.push_back(1.0 - (1.0 - lo) * static_cast<double>(i) /
                                                    static_cast<double>(c.matrix.n - 1));
    } else if (name == "fig2") {
        if (full) {
            c.mu_m_list.clear();
            for (std::size_t v = 10; v <= 100; v += 10)
                c.mu_m_list.push_back(v);
            c.mu_n_list = c.mu_m_list;
            c.mu_trials_per_cell = 5;
        }
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return c;
}

Matrix build_matrix(const ExperimentConfig& config)
{
    const MatrixSpec& s = config.matrix;
    Matrix a;
    switch (s.kind) {
    case MatrixKind::gaussian:
        a = gaussian_matrix(s.m, s.n, s.std_dev, s.seed);
        break;
    case MatrixKind::spectrum: {
        const std::size_t count = std::min(s.m, s.n);
        Vector sigmas;
        if (s.sigma == "linear")
            sigmas = linear_sigmas(count, s.m);
        else if (s.sigma == "inverse")
            sigmas = inverse_sigmas(count);
        else
            sigmas = Eigen::Map<const Vector>(s.sigma_list.data(),
                                              static_cast<Eigen::Index>(s.sigma_list.size()));
        a = spectrum_matrix(s.m, s.n, sigmas, s.seed);
        break;
    }
    case MatrixKind::mtx_file:
        a = load_matrix_market(s.path);
        break;
    }
    if (config.normalize == Normalization::row)
        a = normalize(a, Axis::row);
    else if (config.normalize == Normalization::col)
        a = normalize(a, Axis::col);
    return a;
}

LinearSystem build_system(const ExperimentConfig& config)
{
    return plant_system(build_matrix(config), config.matrix.solution_seed);
}

std::string csv_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const char* file)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + dir.string() + ": " +
                                 ec.message());
    const auto path = dir / file;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& dir, const char* file)
{
    out.flush();
    if (!out)
        throw std::runtime_error("write failed: " + (dir / file).string());
}

RunOptions run_options(const ExperimentConfig& config)
{
    RunOptions opts;
    opts.sampling = config.sampling;
    if (config.x0)
        opts.x0 = Eigen::Map<const Vector>(config.x0->data(),
                                           static_cast<Eigen::Index>(config.x0->size()));
    return opts;
}

std::string level_name(double eps)
{
    return "ci" + std::to_string(std::lround(100.0 * (1.0 - eps)));
}

// Parameters needed for the bands of one variance form. The paper form uses r
// in place of mu, matching the published band construction.
BoundParams band_params(const Matrix& a, Method method, double e0_sq, VarianceForm form)
{
    if (form == VarianceForm::paper) {
        BoundParams p;
        const Rates rates = rk_rates(a);
        p.r = p.rho = p.mu = rates.r;
        p.eta = rates.eta;
        p.e0_norm_sq = e0_sq;
        return with_rate_for_mu(p);
    }
    return linear_params(a, method, e0_sq);
}

} // namespace

void cmd_trials(const ExperimentConfig& config, unsigned threads)
{
    const LinearSystem sys = build_system(config);
    const RunOptions opts = run_options(config);
    const TrialEnsemble ens = run_trials(sys, config.method, config.iterations, config.trial_count,
                                         config.master_seed, opts, threads);
    const double e0_sq = ens.trajectories.front().error_sq.front();

    std::vector<BandSpec> specs;
    for (VarianceForm f : config.forms)
        specs.push_back({f, band_params(sys.a, config.method, e0_sq, f)});
    BoundParams mean_params;
    mean_params.r = rk_rates(sys.a).r;
    mean_params.e0_norm_sq = e0_sq;

    const std::vector<double> levels = {0.05, 0.25, 0.5, 0.75, 0.95};
    const EnsembleSummary s = summarize(ens, levels, config.eps, specs, mean_params);

    {
        auto out = open_output(config.output, "trajectory.csv");
        out << "trial,k,error_sq\n";
        for (std::size_t i = 0; i < ens.size(); ++i) {
            const auto& e = ens.trajectories[i].error_sq;
            for (std::size_t t = 0; t < e.size(); ++t)
                out << i << ',' << t << ',' << csv_number(e[t]) << '\n';
        }
        finish(out, config.output, "trajectory.csv");
    }

    auto out = open_output(config.output, "summary.csv");
    out << "k,emp_mean,emp_var,mean_bound,q05,q25,q50,q75,q95";
    for (std::size_t b = 0; b < s.bands.size(); ++b) {
        const std::size_t fi = b / config.eps.size();
        const std::string suffix = fi == 0 ? "" : std::string("_") + to_string(s.bands[b].form);
        const std::string base = level_name(s.bands[b].eps);
        out << ',' << base << "_lo" << suffix << ',' << base << "_hi" << suffix;
    }
    out << '\n';
    const bool envelope = config.center == CiCenter::envelope;
    for (std::size_t t = 0; t < s.emp_mean.size(); ++t) {
        out << t << ',' << csv_number(s.emp_mean[t]) << ',' << csv_number(s.emp_var[t]) << ','
            << csv_number(s.mean_bound[t]);
        for (const auto& q : s.quantiles)
            out << ',' << csv_number(q[t]);
        for (const auto& band : s.bands) {
            const auto& lo = envelope ? band.lo_envelope : band.lo_empirical;
            const auto& hi = envelope ? band.hi_envelope : band.hi_empirical;
            out << ',' << csv_number(lo[t]) << ',' << csv_number(hi[t]);
        }
        out << '\n';
    }
    finish(out, config.output, "summary.csv");
}

LogRateMu log_r_mu(const Matrix& a)
{
    LogRateMu out;
    out.r = rk_rates(a).r;
    const ProjectorFamily family = rk_family(a);
    const std::size_t n = family.dim();
    MuOptions opts;
    // near-square tall families have tiny eigengaps; the dense route is exact there
    if (a.rows() >= a.cols() && n * (n + 1) / 2 <= symmetric_dense_limit)
        opts.solver = MuSolver::symmetric_dense;
    out.mu = compute_mu_p(family, 2, opts);
    out.log_r_mu = out.r < 1.0 ? std::log(out.mu) / std::log(out.r) : std::nan("");
    return out;
}

std::vector<MuCell> heatmap_mu(const std::vector<std::size_t>& m_list,
                               const std::vector<std::size_t>& n_list,
                               std::size_t trials_per_cell, double std_dev, std::uint64_t seed,
                               unsigned threads)
{
    if (m_list.empty() || n_list.empty())
        throw InvalidInput("heatmap_mu: grid lists must be nonempty");
    if (trials_per_cell < 1)
        throw InvalidInput("heatmap_mu: need at least one trial per cell");

    std::vector<MuCell> cells(m_list.size() * n_list.size());
    // largest cells first keeps workers busy
    std::vector<std::size_t> order(cells.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    const auto cost = [&](std::size_t c) {
        const double n = static_cast<double>(n_list[c % n_list.size()]);
        return m_list[c / n_list.size()] >= n_list[c % n_list.size()] ? n * n * n * n * n * n
                                                                       : n * n;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return cost(x) > cost(y); });

    parallel_for(order.size(), threads, [&](std::size_t slot) {
        const std::size_t c = order[slot];
        MuCell cell;
        cell.m = m_list[c / n_list.size()];
        cell.n = n_list[c % n_list.size()];
        const std::uint64_t cell_seed = child_seed(seed, c);
        double log_sum = 0.0, mu_sum = 0.0, r_sum = 0.0;
        bool degenerate = false;
        for (std::size_t t = 0; t < trials_per_cell; ++t) {
            const Matrix a =
                normalize(gaussian_matrix(cell.m, cell.n, std_dev, child_seed(cell_seed, t)), Axis::row);
            const LogRateMu lr = log_r_mu(a);
            const double r = lr.r, mu = lr.mu;
            mu_sum += mu;
            r_sum += r;
            if (cell.m >= cell.n) {
                if (r >= 1.0 || mu >= 1.0)
                    degenerate = true;
                else
                    log_sum += lr.log_r_mu;
            }
        }
        const double count = static_cast<double>(trials_per_cell);
        cell.mu_mean = mu_sum / count;
        cell.r_mean = r_sum / count;
        if (cell.m < cell.n) {
            cell.avg_log_r_mu = 0.0;
        } else if (degenerate) {
            cell.avg_log_r_mu = std::nan("");
            cell.note = "rank-deficient: r = 1";
        } else {
            cell.avg_log_r_mu = log_sum / count;
        }
        cells[c] = cell;
    });
    return cells;
}

void cmd_heatmap_mu(const ExperimentConfig& config, unsigned threads)
{
    const auto cells = heatmap_mu(config.mu_m_list, config.mu_n_list, config.mu_trials_per_cell,
                                  config.mu_std, config.mu_seed, threads);
    const bool any_note =
        std::any_of(cells.begin(), cells.end(), [](const MuCell& c) { return !c.note.empty(); });
    auto out = open_output(config.output, "mu_heatmap.csv");
    out << "m,n,avg_log_r_mu,mu_mean,r_mean" << (any_note ? ",note" : "") << '\n';
    for (const auto& c : cells) {
        out << c.m << ',' << c.n << ',' << csv_number(c.avg_log_r_mu) << ','
            << csv_number(c.mu_mean) << ',' << csv_number(c.r_mean);
        if (any_note)
            out << ',' << c.note;
        out << '\n';
    }
    finish(out, config.output, "mu_heatmap.csv");
}

std::vector<CompareCell> heatmap_compare(const Matrix& a, Method method,
                                         const std::vector<std::size_t>& k_list,
                                         const std::vector<double>& t_list)
{
    for (double t : t_list)
        if (!(t > 0.0))
            throw InvalidInput("heatmap_compare: t values must be positive");

    // t is in units of ||e0||^2
    const BoundParams paper = band_params(a, method, 1.0, VarianceForm::paper);
    const std::size_t n = static_cast<std::size_t>(a.cols());
    // mu_2 is only affordable for moderate n; r is a valid upper bound otherwise
    const BoundParams safe = n * (n + 1) / 2 <= symmetric_dense_limit
                                 ? linear_params(a, method, 1.0)
                                 : paper;

    std::vector<CompareCell> cells;
    for (std::size_t k : k_list)
        for (double t : t_list) {
            CompareCell c;
            c.k = k;
            c.t = t;
            c.chebyshev_paper = chebyshev_tail(paper, k, t, VarianceForm::paper).value;
            c.chebyshev_safe = chebyshev_tail(safe, k, t, VarianceForm::safe).value;
            c.markov = markov_bound(paper.r, k, 1.0, t).value;
            c.matrix_conc = matrix_conc_bound(paper.rho, n, k, 1.0, std::sqrt(t));
            cells.push_back(c);
        }
    return cells;
}

void cmd_heatmap_compare(const ExperimentConfig& config)
{
    const Matrix a = build_matrix(config);
    const auto cells = heatmap_compare(a, config.method, config.k_list, config.t_list);
    auto out = open_output(config.output, "bound_compare.csv");
    out << "k,t,chebyshev_paper,chebyshev_safe,markov,matrix_conc,matrix_conc_applicable\n";
    for (const auto& c : cells) {
        out << c.k << ',' << csv_number(c.t) << ',' << csv_number(c.chebyshev_paper) << ','
            << csv_number(c.chebyshev_safe) << ',' << csv_number(c.markov) << ','
            << (c.matrix_conc.applicable ? csv_number(c.matrix_conc.value) : "") << ','
            << (c.matrix_conc.applicable ? "true" : "false") << '\n';
    }
    finish(out, config.output, "bound_compare.csv");
}

namespace {

void report(std::ostream& out, const char* name, const BoundValue& v)
{
    out << name << " = " << (v.applicable ? csv_number(v.value) : "n/a")
        << "  applicable=" << (v.applicable ? "true" : "false")
        << "  vacuous=" << (v.vacuous() ? "true" : "false");
    if (!v.reason.empty())
        out << "  (" << v.reason << ")";
    out << '\n';
}

} // namespace

void cmd_bounds(const ExperimentConfig& config, std::ostream& out)
{
    const LinearSystem sys = build_system(config);
    const RunOptions opts = run_options(config);
    const Vector x0 = opts.x0 ? *opts.x0 : Vector::Zero(sys.a.cols());
    const double e0_sq = error_metric(sys, config.method, x0);
    const BoundParams p = linear_params(sys.a, config.method, e0_sq);
    const std::size_t k = config.point_k;
    const double t = config.point_t, eps = config.point_eps;
    const std::size_t n = static_cast<std::size_t>(sys.a.cols());

    out << "method = " << to_string(config.method) << '\n';
    out << "shape = " << sys.a.rows() << "x" << sys.a.cols() << '\n';
    out << "k = " << k << "  t = " << csv_number(t) << "  eps = " << csv_number(eps) << '\n';
    out << "e0_norm_sq = " << csv_number(e0_sq) << '\n';
    out << "r = " << csv_number(p.r) << '\n';
    out << "mu = " << csv_number(p.mu) << '\n';
    for (const auto& [q, v] : p.mu_p)
        out << "mu_" << q << " = " << csv_number(v) << '\n';
    out << "eta = " << csv_number(p.eta) << '\n';
    for (const auto& [q, v] : p.eta_p)
        out << "eta_" << q << " = " << csv_number(v) << '\n';
    out << "rho = " << csv_number(p.rho) << '\n';
    out << "alpha = " << csv_number(p.alpha) << '\n';
    out << "mean_bound = " << csv_number(std::pow(p.r, static_cast<double>(k)) * e0_sq) << '\n';
    out << "variance_safe = " << csv_number(variance_bound(p, k, VarianceForm::safe)) << '\n';
    out << "variance_paper = " << csv_number(variance_bound(p, k, VarianceForm::paper)) << '\n';
    out << "chebyshev_halfwidth_safe = "
        << csv_number(chebyshev_interval(p, k, eps, VarianceForm::safe)) << '\n';
    out << "chebyshev_halfwidth_paper = "
        << csv_number(chebyshev_interval(p, k, eps, VarianceForm::paper)) << '\n';
    report(out, "chebyshev_tail_safe", chebyshev_tail(p, k, t, VarianceForm::safe));
    report(out, "chebyshev_tail_paper", chebyshev_tail(p, k, t, VarianceForm::paper));
    report(out, "markov", markov_bound(p.r, k, e0_sq, t));
    out << "trajectory_envelope_multiplier = " << csv_number(trajectory_markov_bound(p.rho, eps))
        << '\n';
    report(out, "azuma", azuma_bound(p.rho, p.alpha, k, eps));
    report(out, "matrix_conc", matrix_conc_bound(p.rho, n, k, e0_sq, t));
    out << "anticoncentration_floor = "
        << csv_number(anticoncentration_floor(
               config.method == Method::rk ? static_cast<std::size_t>(sys.a.rows()) : n, k))
        << '\n';
}

void cmd_gen_matrix(const ExperimentConfig& config)
{
    const LinearSystem sys = build_system(config);
    std::error_code ec;
    std::filesystem::create_directories(config.output, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + config.output.string());
    save_matrix_market(config.output / "A.mtx", sys.a);
    save_matrix_market(config.output / "b.mtx", Matrix(sys.b));
    save_matrix_market(config.output / "x_star.mtx", Matrix(*sys.x_star));
}

} // namespace stochconc
