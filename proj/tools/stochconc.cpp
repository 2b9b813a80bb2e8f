#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stochconc/ensemble.hpp"
#include "stochconc/experiments.hpp"

using namespace stochconc;

namespace {

struct Common {
    std::string config;
    std::string preset;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool full = false;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--preset", c.preset, "named preset (fig1, fig2, fig3a..c, fig4a..c, fig4d-synthetic)");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--seed", c.seed, "master seed override");
    cmd->add_flag("--full", c.full, "paper-scale grid and trial counts");
}

ExperimentConfig resolve(const Common& c)
{
    if (!c.config.empty() && !c.preset.empty())
        throw ConfigError("--config and --preset are mutually exclusive");
    ExperimentConfig cfg = !c.config.empty()   ? load_config(c.config)
                           : !c.preset.empty() ? preset_config(c.preset, c.full)
                                               : ExperimentConfig{};
    if (c.full && c.preset.empty()) {
        // --full only rescales the fig2 grid
        const ExperimentConfig big = preset_config("fig2", true);
        cfg.mu_m_list = big.mu_m_list;
        cfg.mu_n_list = big.mu_n_list;
        cfg.mu_trials_per_cell = big.mu_trials_per_cell;
    }
    if (!c.out.empty())
        cfg.output = c.out;
    if (c.seed) {
        cfg.master_seed = *c.seed;
        cfg.mu_seed = *c.seed;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Randomized Kaczmarz / Gauss-Seidel concentration experiments"};
    app.require_subcommand(1);

    Common trials_opts, mu_opts, compare_opts, bounds_opts, gen_opts;
    auto* trials = app.add_subcommand("trials", "run a trial ensemble; writes trajectory.csv and summary.csv");
    add_common(trials, trials_opts);
    auto* mu = app.add_subcommand("heatmap-mu", "log_r(mu) grid; writes mu_heatmap.csv");
    add_common(mu, mu_opts);
    auto* compare = app.add_subcommand("heatmap-compare", "tail bound grid; writes bound_compare.csv");
    add_common(compare, compare_opts);
    auto* bounds = app.add_subcommand("bounds", "print every bound at one (k, t, eps)");
    add_common(bounds, bounds_opts);
    std::optional<std::size_t> k;
    std::optional<double> t, eps;
    bounds->add_option("--k", k, "iteration count");
    bounds->add_option("--t", t, "deviation threshold");
    bounds->add_option("--eps", eps, "failure probability");
    auto* gen = app.add_subcommand("gen-matrix", "write A.mtx, b.mtx and x_star.mtx");
    add_common(gen, gen_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        const unsigned threads = default_thread_count();
        if (trials->parsed()) {
            cmd_trials(resolve(trials_opts), threads);
        } else if (mu->parsed()) {
            cmd_heatmap_mu(resolve(mu_opts), threads);
        } else if (compare->parsed()) {
            cmd_heatmap_compare(resolve(compare_opts));
        } else if (bounds->parsed()) {
            ExperimentConfig cfg = resolve(bounds_opts);
            if (k)
                cfg.point_k = *k;
            if (t)
                cfg.point_t = *t;
            if (eps)
                cfg.point_eps = *eps;
            cmd_bounds(cfg, std::cout);
        } else if (gen->parsed()) {
            cmd_gen_matrix(resolve(gen_opts));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
