#include <doctest.h>

#include "swarmgbp/harness.hpp"

#include <fstream>
#include <sstream>

using namespace swarmgbp;
using namespace swarmgbp::harness;

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("swarmgbp_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

SwarmConfig discrete_config()
{
    SwarmConfig c;
    c.set("mode", "discrete");
    c.set("n_robots", 30);
    c.set("trials", 3);
    c.set("seed", 17);
    return c;
}

} // namespace

TEST_CASE("mode defaults")
{
    SwarmConfig c;
    CHECK(c.effective_T_max() == 5000);
    CHECK(c.effective_r_C() == 20.0);
    CHECK(c.effective_sigma_c()[0] == doctest::Approx(0.1));
    CHECK(c.effective_sigma_c()[2] == doctest::Approx(0.01 * 3.141592653589793));
    CHECK(c.effective_sigma_t_scale() == doctest::Approx(0.1));

    c.set("mode", "discrete");
    CHECK(c.effective_T_max() == 1000);
    CHECK(c.effective_sigma_p() == std::vector<double>{0.1});
    CHECK(c.effective_sigma_c()[0] == doctest::Approx(0.125));
    CHECK(c.effective_sigma_t_scale() == doctest::Approx(12.5));
    c.set("N_D", 8);
    CHECK(c.effective_sigma_c()[0] == doctest::Approx(0.0625));
    // An explicit consensus strength leaves the temporal strength alone.
    c.set("sigma_c", 0.625);
    CHECK(c.effective_sigma_t_scale() == doctest::Approx(6.25));

    c = SwarmConfig{};
    c.set("mode", "formation");
    CHECK(c.effective_T_max() == 5000);
    const auto sim = c.to_sim();
    CHECK(sim.n_robots == sim.shape.points.size());
}

TEST_CASE("key=value assignments")
{
    SwarmConfig c;
    c.set_assignment("r_C=33.5");
    CHECK(c.effective_r_C() == 33.5);
    c.set_assignment("mode=discrete");
    CHECK(c.mode == ExperimentMode::Discrete);
    c.set_assignment("sigma_p=[0.2]");
    CHECK(c.effective_sigma_p() == std::vector<double>{0.2});
    c.set_assignment("trace=false");
    CHECK_FALSE(c.trace);

    CHECK_THROWS_AS(c.set_assignment("nope=1"), ConfigError);
    CHECK_THROWS_AS(c.set_assignment("W=2.5"), ConfigError);
    CHECK_THROWS_AS(c.set_assignment("W=abc"), ConfigError);
    CHECK_THROWS_AS(c.set_assignment("mode=swimming"), ConfigError);
    CHECK_THROWS_AS(c.set_assignment("no_equals"), ConfigError);
}

TEST_CASE("invalid configs fail before simulating")
{
    CHECK_THROWS_AS(load_config(std::nullopt, {"r_C=-1"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"sigma_r=0"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"trials=0"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"mode=formation", "n_robots=3"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"mode=formation", "shape=missing.txt"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, {"mode=discrete", "grid_spacing=4"}), ConfigError);
    CHECK_THROWS_AS(load_config(std::filesystem::path("/nonexistent/config.json"), {}), ConfigError);

    const auto dir = scratch("badjson");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "c.json") << "{ not json";
    CHECK_THROWS_AS(load_config(dir / "c.json", {}), ConfigError);
}

TEST_CASE("config files resolve shapes beside them and take overrides")
{
    const auto dir = scratch("cfgfile");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "tri.txt") << "0 0\n5 0\n0 5\n";
    std::ofstream(dir / "c.json") << R"({"mode": "formation", "shape": "tri.txt", "T_max": 7, "r_C": 40})";
    const auto cfg = load_config(dir / "c.json", {"r_C=50"});
    CHECK(cfg.effective_T_max() == 7);
    CHECK(cfg.effective_r_C() == 50.0);
    CHECK(cfg.to_sim().n_robots == 3);
}

TEST_CASE("trace CSV round trip")
{
    auto cfg = discrete_config();
    cfg.set("T_max", 3);
    cfg.set("seed_decision", 1);
    std::stringstream csv;
    const auto r = run_trial(cfg, 0, &csv);

    std::string line;
    REQUIRE(std::getline(csv, line));
    CHECK(split(line) == trace_columns());

    // Replay the same trial and compare every row against the live world.
    sim::World w(cfg.to_sim(), trial_seed(cfg.seed, 0));
    std::size_t rows = 0;
    int last_t = 0;
    while (std::getline(csv, line)) {
        const auto cells = split(line);
        REQUIRE(cells.size() == trace_columns().size());
        const int t = std::stoi(cells[1]);
        if (t != w.t())
            w.step();
        REQUIRE(t == w.t());
        const auto i = std::stoul(cells[2]);
        CHECK(std::stoul(cells[0]) == 0);
        CHECK(std::stod(cells[3]) == w.positions()[i].x());
        CHECK(std::stod(cells[4]) == w.positions()[i].y());
        CHECK(cells[5].empty());
        CHECK(std::stod(cells[6]) == w.consensus_means()[i][0]);
        CHECK(cells[7].empty());
        CHECK(std::stoi(cells[9]) == w.decisions()[i]);
        CHECK(std::stoul(cells[13]) == w.graph().edge_count());
        last_t = t;
        ++rows;
    }
    CHECK(rows == static_cast<std::size_t>(last_t + 1) * 30);
    CHECK(last_t == r.iterations);
}

TEST_CASE("continuous traces carry pose beliefs and deviations")
{
    SwarmConfig cfg;
    cfg.set("n_robots", 4);
    cfg.set("T_max", 2);
    std::stringstream csv;
    run_trial(cfg, 0, &csv);
    std::string line;
    std::getline(csv, line);
    std::getline(csv, line);
    const auto cells = split(line);
    CHECK_FALSE(cells[5].empty());
    CHECK_FALSE(cells[8].empty());
    CHECK(cells[9].empty());
    CHECK(std::stod(cells[10]) > 0.0);
}

TEST_CASE("identical seeds give byte-identical traces")
{
    auto cfg = discrete_config();
    const auto a = scratch("det_a"), b = scratch("det_b");
    const auto ra = run_experiment(cfg, a);
    const auto rb = run_experiment(cfg, b);
    for (int k = 0; k < cfg.trials; ++k) {
        const auto name = "trace_trial" + std::to_string(k) + ".csv";
        REQUIRE(std::filesystem::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }
    CHECK(ra.convergence_rate == rb.convergence_rate);
    REQUIRE(std::filesystem::exists(a / "summary.json"));
    const auto summary = json::parse(slurp(a / "summary.json"));
    CHECK(summary["trials"].size() == 3);
    CHECK(summary["config"]["seed"] == 17);
}

TEST_CASE("non-converged trials report T_max")
{
    auto cfg = discrete_config();
    cfg.set("T_max", 1);
    cfg.set("r_C", 5.5);
    const auto r = run_experiment(cfg, std::nullopt);
    for (const auto& t : r.trials)
        if (!t.converged)
            CHECK(t.iterations == 1);
}

TEST_CASE("single-value sweep equals run_experiment")
{
    auto cfg = discrete_config();
    const auto rows = sweep(cfg, "r_C", {18.0}, std::nullopt);
    cfg.set("r_C", 18.0);
    const auto direct = run_experiment(cfg, std::nullopt);
    REQUIRE(rows.size() == direct.trials.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].value == 18.0);
        CHECK(rows[k].result.seed == direct.trials[k].seed);
        CHECK(rows[k].result.iterations == direct.trials[k].iterations);
        CHECK(rows[k].result.converged == direct.trials[k].converged);
    }
}

TEST_CASE("sweep rejects unknown axes and lists valid ones")
{
    try {
        sweep(SwarmConfig{}, "warp_factor", {1.0}, std::nullopt);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("warp_factor") != std::string::npos);
        CHECK(msg.find("r_C") != std::string::npos);
    }
    CHECK_THROWS_AS(sweep(SwarmConfig{}, "mode", {1.0}, std::nullopt), ConfigError);
}

TEST_CASE("sweep writes a long CSV")
{
    auto cfg = discrete_config();
    cfg.set("trials", 2);
    const auto out = scratch("sweep");
    sweep(cfg, "W", {2, 3}, out);
    std::ifstream f(out / "sweep.csv");
    std::string line;
    std::getline(f, line);
    CHECK(line == "axis,value,trial,seed,iterations,converged,min_distance");
    std::size_t rows = 0;
    while (std::getline(f, line)) {
        CHECK(split(line).size() == 7);
        CHECK(line.rfind("W,", 0) == 0);
        ++rows;
    }
    CHECK(rows == 4);
}

TEST_CASE("seed-robot study")
{
    auto cfg = discrete_config();
    cfg.set("trials", 2);
    const auto rows = seed_robot_study(cfg, {1.0}, std::nullopt);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].percent == 100.0);
    CHECK(table_zetas().front() == 0.002);
    CHECK(table_zetas().size() == 7);
    CHECK_THROWS_AS(seed_robot_study(SwarmConfig{}, {0.1}, std::nullopt), ConfigError);
}

TEST_CASE("well-connected discrete swarms converge")
{
    auto cfg = discrete_config();
    cfg.set("n_robots", 50);
    cfg.set("r_C", 30.0);
    cfg.set("trials", 20);
    const auto r = run_experiment(cfg, std::nullopt);
    CHECK(r.convergence_rate >= 0.95);
}
