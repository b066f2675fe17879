#include "swarmgbp/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace swarmgbp::harness;

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::vector<std::string> sets;

    void attach(CLI::App* app)
    {
        app->add_option("--config", config, "JSON config file");
        app->add_option("--out", out, "output directory")->capture_default_str();
        app->add_option("--seed", seed, "master seed");
        app->add_option("--trials", trials, "number of trials");
        app->add_option("--set", sets, "override a config key, key=value (repeatable)");
    }

    SwarmConfig load() const
    {
        auto assignments = sets;
        if (seed)
            assignments.push_back("seed=" + std::to_string(*seed));
        if (trials)
            assignments.push_back("trials=" + std::to_string(*trials));
        std::optional<std::filesystem::path> path;
        if (!config.empty())
            path = config;
        return load_config(path, assignments);
    }
};

void print_experiment(const ExperimentResult& r)
{
    std::cout << "trials " << r.trials.size() << ", converged " << r.convergence_rate * 100.0 << "%";
    if (r.median_iterations)
        std::cout << ", median iterations " << *r.median_iterations;
    std::cout << ", " << r.wall_time_s << " s\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Distributed consensus swarm simulator"};
    app.require_subcommand(1);

    Common run_opts, sweep_opts, seed_opts;
    auto* run = app.add_subcommand("run", "run seeded trials, write traces and summary.json");
    run_opts.attach(run);

    auto* sw = app.add_subcommand("sweep", "vary one config key across values");
    sweep_opts.attach(sw);
    std::string axis;
    std::vector<double> values;
    sw->add_option("--axis", axis, "config key to vary")->required();
    sw->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

    auto* seeds = app.add_subcommand("seeds", "seed-robot study over zeta");
    seed_opts.attach(seeds);
    std::vector<double> zetas = table_zetas();
    seeds->add_option("--zetas", zetas, "comma-separated seed proportions")->delimiter(',')->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto cfg = run_opts.load();
            print_experiment(run_experiment(cfg, std::filesystem::path(run_opts.out)));
        } else if (sw->parsed()) {
            const auto cfg = sweep_opts.load();
            const auto rows = sweep(cfg, axis, values, std::filesystem::path(sweep_opts.out));
            for (double v : values) {
                std::size_t n = 0, c = 0;
                for (const auto& r : rows)
                    if (r.value == v) {
                        ++n;
                        c += r.result.converged;
                    }
                std::cout << axis << "=" << v << ": " << c << "/" << n << " converged\n";
            }
        } else if (seeds->parsed()) {
            auto cfg = seed_opts.load();
            for (const auto& row : seed_robot_study(cfg, zetas, std::filesystem::path(seed_opts.out)))
                std::cout << "zeta=" << row.zeta << ": " << row.percent << "% (" << row.converged << "/"
                          << row.trials << ")\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
