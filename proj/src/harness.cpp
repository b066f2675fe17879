#include "swarmgbp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace swarmgbp::harness {

namespace {

enum class KeyType { Number, Integer, Boolean, Text, Vector };

struct Key {
    std::string name;
    KeyType type;
    std::function<void(SwarmConfig&, const json&)> set;
    std::function<json(const SwarmConfig&)> get;
};

double as_number(const std::string& key, const json& v)
{
    if (!v.is_number())
        throw ConfigError("key '" + key + "' expects a number, got " + v.dump());
    return v.get<double>();
}

long long as_integer(const std::string& key, const json& v)
{
    const double d = as_number(key, v);
    if (std::floor(d) != d || std::abs(d) > 9e15)
        throw ConfigError("key '" + key + "' expects an integer, got " + v.dump());
    return static_cast<long long>(d);
}

bool as_bool(const std::string& key, const json& v)
{
    if (v.is_boolean())
        return v.get<bool>();
    if (v.is_number_integer() && (v.get<long long>() == 0 || v.get<long long>() == 1))
        return v.get<long long>() == 1;
    throw ConfigError("key '" + key + "' expects true or false, got " + v.dump());
}

std::string as_text(const std::string& key, const json& v)
{
    if (!v.is_string())
        throw ConfigError("key '" + key + "' expects a string, got " + v.dump());
    return v.get<std::string>();
}

std::vector<double> as_vector(const std::string& key, const json& v)
{
    if (v.is_number())
        return {v.get<double>()};
    if (!v.is_array() || v.empty())
        throw ConfigError("key '" + key + "' expects a number or a non-empty array, got " + v.dump());
    std::vector<double> out;
    for (const auto& x : v)
        out.push_back(as_number(key, x));
    return out;
}

template <class T>
json opt(const std::optional<T>& v)
{
    return v ? json(*v) : json(nullptr);
}

#define SWARM_NUMBER(field)                                                                                            \
    Key{#field, KeyType::Number, [](SwarmConfig& c, const json& v) { c.field = as_number(#field, v); },                 \
        [](const SwarmConfig& c) { return json(c.field); }}
#define SWARM_INTEGER(field)                                                                                           \
    Key{#field, KeyType::Integer,                                                                                      \
        [](SwarmConfig& c, const json& v) { c.field = static_cast<decltype(c.field)>(as_integer(#field, v)); },        \
        [](const SwarmConfig& c) { return json(c.field); }}
#define SWARM_BOOL(field)                                                                                              \
    Key{#field, KeyType::Boolean, [](SwarmConfig& c, const json& v) { c.field = as_bool(#field, v); },                  \
        [](const SwarmConfig& c) { return json(c.field); }}
#define SWARM_TEXT(field)                                                                                              \
    Key{#field, KeyType::Text, [](SwarmConfig& c, const json& v) { c.field = as_text(#field, v); },                     \
        [](const SwarmConfig& c) { return json(c.field); }}

const std::vector<Key>& keys()
{
    static const std::vector<Key> table = {
        Key{"mode", KeyType::Text,
            [](SwarmConfig& c, const json& v) {
                const auto s = as_text("mode", v);
                if (s == "formation")
                    c.mode = ExperimentMode::Formation;
                else if (s == "exploration")
                    c.mode = ExperimentMode::Exploration;
                else if (s == "discrete")
                    c.mode = ExperimentMode::Discrete;
                else
                    throw ConfigError("mode must be formation, exploration or discrete, got '" + s + "'");
            },
            [](const SwarmConfig& c) {
                switch (c.mode) {
                case ExperimentMode::Formation: return json("formation");
                case ExperimentMode::Discrete: return json("discrete");
                default: return json("exploration");
                }
            }},
        Key{"n_robots", KeyType::Integer,
            [](SwarmConfig& c, const json& v) {
                const auto n = as_integer("n_robots", v);
                if (n < 1)
                    throw ConfigError("n_robots must be at least 1");
                c.n_robots = static_cast<std::size_t>(n);
            },
            [](const SwarmConfig& c) {
                try {
                    return json(c.to_sim().n_robots);
                } catch (const std::exception&) {
                    return opt(c.n_robots);
                }
            }},
        SWARM_NUMBER(world_size),
        Key{"r_C", KeyType::Number, [](SwarmConfig& c, const json& v) { c.r_C = as_number("r_C", v); },
            [](const SwarmConfig& c) { return json(c.effective_r_C()); }},
        SWARM_NUMBER(dt),
        SWARM_INTEGER(N_I),
        SWARM_INTEGER(W),
        SWARM_INTEGER(T_S),
        Key{"sigma_p", KeyType::Vector, [](SwarmConfig& c, const json& v) { c.sigma_p = as_vector("sigma_p", v); },
            [](const SwarmConfig& c) { return json(c.effective_sigma_p()); }},
        Key{"sigma_c", KeyType::Vector, [](SwarmConfig& c, const json& v) { c.sigma_c = as_vector("sigma_c", v); },
            [](const SwarmConfig& c) { return json(c.effective_sigma_c()); }},
        Key{"sigma_t_scale", KeyType::Number,
            [](SwarmConfig& c, const json& v) { c.sigma_t_scale = as_number("sigma_t_scale", v); },
            [](const SwarmConfig& c) { return json(c.effective_sigma_t_scale()); }},
        SWARM_TEXT(attach),
        SWARM_INTEGER(H),
        SWARM_NUMBER(T_H),
        SWARM_NUMBER(sigma_d),
        SWARM_NUMBER(sigma_u),
        SWARM_NUMBER(sigma_r),
        SWARM_NUMBER(sigma_current),
        SWARM_NUMBER(sigma_horizon),
        SWARM_NUMBER(collision_damping),
        SWARM_NUMBER(v_max),
        SWARM_NUMBER(omega_max),
        SWARM_NUMBER(d_min),
        SWARM_TEXT(unicycle_form),
        SWARM_NUMBER(goal_radius),
        SWARM_NUMBER(min_start_separation),
        SWARM_TEXT(shape),
        SWARM_NUMBER(r_N),
        SWARM_NUMBER(r_S),
        SWARM_NUMBER(r_R),
        SWARM_NUMBER(tau_0),
        SWARM_BOOL(occupancy_weighting),
        SWARM_INTEGER(N_D),
        SWARM_NUMBER(zeta),
        SWARM_INTEGER(seed_decision),
        SWARM_NUMBER(grid_spacing),
        SWARM_NUMBER(grid_jitter),
        Key{"T_max", KeyType::Integer,
            [](SwarmConfig& c, const json& v) { c.T_max = static_cast<int>(as_integer("T_max", v)); },
            [](const SwarmConfig& c) { return json(c.effective_T_max()); }},
        SWARM_INTEGER(trials),
        Key{"seed", KeyType::Integer,
            [](SwarmConfig& c, const json& v) {
                if (v.is_number_unsigned())
                    c.seed = v.get<std::uint64_t>();
                else {
                    const auto s = as_integer("seed", v);
                    if (s < 0)
                        throw ConfigError("seed must be non-negative");
                    c.seed = static_cast<std::uint64_t>(s);
                }
            },
            [](const SwarmConfig& c) { return json(c.seed); }},
        SWARM_BOOL(parallel),
        SWARM_BOOL(trace),
    };
    return table;
}

#undef SWARM_NUMBER
#undef SWARM_INTEGER
#undef SWARM_BOOL
#undef SWARM_TEXT

const Key& find_key(const std::string& name)
{
    for (const auto& k : keys())
        if (k.name == name)
            return k;
    std::string valid;
    for (const auto& k : keys())
        valid += (valid.empty() ? "" : ", ") + k.name;
    throw ConfigError("unknown config key '" + name + "'; valid keys: " + valid);
}

bool continuous(ExperimentMode m) { return m != ExperimentMode::Discrete; }

std::vector<double> default_sigma_p(ExperimentMode m)
{
    if (continuous(m))
        return {10.0, 10.0, std::numbers::pi};
    return {0.1};
}

std::vector<double> default_sigma_c(ExperimentMode m, int n_options, const std::vector<double>& sigma_p)
{
    if (continuous(m)) {
        std::vector<double> out;
        for (double s : sigma_p)
            out.push_back(0.01 * s);
        return out;
    }
    return {0.5 / n_options};
}

std::filesystem::path resolve_shape(const std::string& shape)
{
    const std::filesystem::path p(shape);
    if (p.is_absolute() || std::filesystem::exists(p))
        return p;
#ifdef SWARMGBP_DATA_DIR
    const auto bundled = std::filesystem::path(SWARMGBP_DATA_DIR) / p;
    if (std::filesystem::exists(bundled))
        return bundled;
#endif
    return p;
}

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

bool trial_converged(const SwarmConfig& cfg, const sim::World& w)
{
    switch (cfg.mode) {
    case ExperimentMode::Discrete: {
        const auto d = w.decisions();
        if (cfg.zeta > 0.0)
            return std::all_of(d.begin(), d.end(), [&](int x) { return x == cfg.seed_decision; });
        return sim::discrete_converged(d);
    }
    case ExperimentMode::Formation: return w.formation_complete();
    case ExperimentMode::Exploration: return sim::continuous_converged(w.consensus_means());
    }
    return false;
}

void write_rows(std::ostream& os, std::size_t trial, const sim::World& w, bool converged)
{
    const auto means = w.consensus_means();
    const bool se2 = !means.empty() && means.front().kind().group() == lie::Group::SE2;
    std::string dev_p, dev_h;
    if (se2 && means.size() >= 2) {
        const auto d = sim::mean_pairwise_deviation(means);
        dev_p = fmt(d.position);
        dev_h = fmt(d.heading);
    }
    std::vector<int> decisions;
    if (w.config().mode == sim::Mode::Discrete)
        decisions = w.decisions();
    const bool moving = w.config().mode == sim::Mode::Formation || w.config().mode == sim::Mode::Exploration;
    const auto edges = w.graph().edge_count();
    for (std::size_t i = 0; i < w.robots().size(); ++i) {
        const auto& r = w.robots()[i];
        const auto p = r.position();
        os << trial << ',' << w.t() << ',' << i << ',' << fmt(p.x()) << ',' << fmt(p.y()) << ',';
        if (moving)
            os << fmt(r.heading());
        for (int k = 0; k < 3; ++k) {
            os << ',';
            if (k < means[i].kind().dim())
                os << fmt(means[i][k]);
        }
        os << ',';
        if (!decisions.empty())
            os << decisions[i];
        os << ',' << dev_p << ',' << dev_h << ',' << (converged ? 1 : 0) << ',' << edges << '\n';
    }
}

void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    f << j.dump(2) << '\n';
}

std::optional<double> median(std::vector<double> xs)
{
    if (xs.empty())
        return std::nullopt;
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

ExperimentResult aggregate(std::vector<TrialResult> trials, double wall)
{
    ExperimentResult r;
    std::vector<double> its;
    std::size_t conv = 0;
    for (const auto& t : trials)
        if (t.converged) {
            ++conv;
            its.push_back(t.iterations);
        }
    r.convergence_rate = trials.empty() ? 0.0 : static_cast<double>(conv) / static_cast<double>(trials.size());
    r.median_iterations = median(its);
    r.trials = std::move(trials);
    r.wall_time_s = wall;
    return r;
}

json trial_json(const TrialResult& t)
{
    return json{{"trial", t.trial},
                {"seed", t.seed},
                {"converged", t.converged},
                {"iterations", t.iterations},
                {"min_distance", t.min_distance},
                {"singular_messages", t.singular_messages}};
}

void prepare_dir(const std::filesystem::path& out)
{
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec)
        throw std::runtime_error("cannot create " + out.string() + ": " + ec.message());
}

} // namespace

void SwarmConfig::set(const std::string& key, const json& value) { find_key(key).set(*this, value); }

void SwarmConfig::set_assignment(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("expected key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded())
        value = text;
    set(key, value);
}

void SwarmConfig::merge(const json& object)
{
    if (!object.is_object())
        throw ConfigError("config must be a JSON object");
    for (const auto& [k, v] : object.items())
        set(k, v);
}

json SwarmConfig::to_json() const
{
    json j = json::object();
    for (const auto& k : keys())
        j[k.name] = k.get(*this);
    return j;
}

double SwarmConfig::effective_r_C() const
{
    if (r_C)
        return *r_C;
    switch (mode) {
    case ExperimentMode::Formation: return 150.0;
    case ExperimentMode::Discrete: return 12.0;
    case ExperimentMode::Exploration: return 20.0;
    }
    return 20.0;
}

int SwarmConfig::effective_T_max() const
{
    if (T_max)
        return *T_max;
    return mode == ExperimentMode::Discrete ? 1000 : 5000;
}

std::vector<double> SwarmConfig::effective_sigma_p() const { return sigma_p.value_or(default_sigma_p(mode)); }

std::vector<double> SwarmConfig::effective_sigma_c() const
{
    return sigma_c.value_or(default_sigma_c(mode, N_D, effective_sigma_p()));
}

double SwarmConfig::effective_sigma_t_scale() const
{
    if (sigma_t_scale)
        return *sigma_t_scale;
    const auto sp = effective_sigma_p();
    return 10.0 * default_sigma_c(mode, N_D, sp).front() / sp.front();
}

sim::SimConfig SwarmConfig::to_sim() const
{
    auto require = [](bool ok, const std::string& what) {
        if (!ok)
            throw ConfigError(what);
    };
    require(trials >= 1, "trials must be at least 1");
    require(effective_T_max() >= 1, "T_max must be at least 1");
    for (double s : {sigma_d, sigma_u, sigma_r, sigma_current, sigma_horizon, effective_sigma_t_scale()})
        require(s > 0.0, "all strengths must be positive");
    for (double s : effective_sigma_p())
        require(s > 0.0, "all strengths must be positive");
    for (double s : effective_sigma_c())
        require(s > 0.0, "all strengths must be positive");
    require(attach == "window" || attach == "newest", "attach must be window or newest");
    require(unicycle_form == "corrected" || unicycle_form == "paper", "unicycle_form must be corrected or paper");
    require(H >= 1, "H must be at least 1");
    require(r_S > 0.0, "r_S must be positive");

    sim::SimConfig c;
    c.world_size = world_size;
    c.r_C = effective_r_C();
    c.dt = dt;
    c.iterations = N_I;
    c.window = W;
    c.slide_period = T_S;
    c.sigma_p = effective_sigma_p();
    c.sigma_c = effective_sigma_c();
    c.sigma_t_scale = effective_sigma_t_scale();
    c.attach = attach == "newest" ? sim::ConsensusAttach::Newest : sim::ConsensusAttach::Window;
    c.plan.horizon_steps = H;
    c.plan.horizon_time = T_H;
    c.plan.sigma_dynamics = sigma_d;
    c.plan.sigma_unicycle = sigma_u;
    c.plan.sigma_collision = sigma_r;
    c.plan.sigma_current = sigma_current;
    c.plan.sigma_horizon = sigma_horizon;
    c.plan.collision_damping = collision_damping;
    c.plan.v_max = v_max;
    c.plan.omega_max = omega_max;
    c.plan.d_min = d_min;
    c.plan.unicycle = unicycle_form == "paper" ? planning::UnicycleForm::Paper : planning::UnicycleForm::Corrected;
    c.goal_radius = goal_radius;
    c.min_start_separation = min_start_separation;
    c.occupancy.r_N = r_N;
    c.occupancy.tau_0 = tau_0;
    c.occupancy.weighting = occupancy_weighting;
    c.r_R = r_R;
    c.n_options = N_D;
    c.zeta = zeta;
    c.seed_decision = seed_decision;
    c.grid_spacing = grid_spacing;
    c.grid_jitter = grid_jitter;
    c.parallel = parallel;

    switch (mode) {
    case ExperimentMode::Formation: {
        c.mode = sim::Mode::Formation;
        try {
            c.shape = formation::ShapeSpec::load(resolve_shape(shape), r_S);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("shape: ") + e.what());
        }
        c.n_robots = n_robots.value_or(c.shape.points.size());
        break;
    }
    case ExperimentMode::Exploration:
        c.mode = sim::Mode::Exploration;
        c.n_robots = n_robots.value_or(10);
        break;
    case ExperimentMode::Discrete:
        c.mode = sim::Mode::Discrete;
        c.n_robots = n_robots.value_or(50);
        break;
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> out;
    for (const auto& k : keys())
        out.push_back(k.name);
    return out;
}

std::vector<std::string> sweep_axes()
{
    std::vector<std::string> out;
    for (const auto& k : keys())
        if (k.type == KeyType::Number || k.type == KeyType::Integer || k.type == KeyType::Vector)
            if (k.name != "trials" && k.name != "seed")
                out.push_back(k.name);
    return out;
}

SwarmConfig load_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& assignments)
{
    SwarmConfig cfg;
    if (path) {
        std::ifstream f(*path);
        if (!f)
            throw ConfigError("cannot open config " + path->string());
        json j = json::parse(f, nullptr, false);
        if (j.is_discarded())
            throw ConfigError("config " + path->string() + " is not valid JSON");
        if (j.is_object() && j.contains("shape") && j["shape"].is_string()) {
            const std::filesystem::path s(j["shape"].get<std::string>());
            const auto beside = path->parent_path() / s;
            if (s.is_relative() && std::filesystem::exists(beside))
                j["shape"] = beside.string();
        }
        cfg.merge(j);
    }
    for (const auto& a : assignments)
        cfg.set_assignment(a);
    cfg.to_sim();
    return cfg;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) { return sim::derive_seed(master, trial); }

const std::vector<std::string>& trace_columns()
{
    static const std::vector<std::string> cols = {"trial",    "t",        "robot",        "x",
                                                  "y",        "heading",  "belief_0",     "belief_1",
                                                  "belief_2", "decision", "dev_position", "dev_heading",
                                                  "converged", "edges"};
    return cols;
}

TrialResult run_trial(const SwarmConfig& cfg, std::size_t trial, std::ostream* trace)
{
    const auto sc = cfg.to_sim();
    TrialResult r;
    r.trial = trial;
    r.seed = trial_seed(cfg.seed, trial);
    const int t_max = cfg.effective_T_max();

    sim::World w(sc, r.seed);
    r.min_distance = w.min_pairwise_distance();
    bool done = trial_converged(cfg, w);
    if (trace) {
        for (std::size_t c = 0; c < trace_columns().size(); ++c)
            *trace << (c ? "," : "") << trace_columns()[c];
        *trace << '\n';
        write_rows(*trace, trial, w, done);
    }
    while (!done && w.t() < t_max) {
        w.step();
        r.min_distance = std::min(r.min_distance, w.min_pairwise_distance());
        done = trial_converged(cfg, w);
        if (trace)
            write_rows(*trace, trial, w, done);
    }
    r.converged = done;
    r.iterations = done ? w.t() : t_max;
    r.singular_messages = w.singular_messages();
    return r;
}

ExperimentResult run_experiment(const SwarmConfig& cfg, const std::optional<std::filesystem::path>& out)
{
    cfg.to_sim();
    if (out)
        prepare_dir(*out);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<TrialResult> trials;
    for (int k = 0; k < cfg.trials; ++k) {
        const auto i = static_cast<std::size_t>(k);
        if (out && cfg.trace) {
            const auto path = *out / ("trace_trial" + std::to_string(i) + ".csv");
            std::ofstream f(path);
            if (!f)
                throw std::runtime_error("cannot write " + path.string());
            trials.push_back(run_trial(cfg, i, &f));
        } else {
            trials.push_back(run_trial(cfg, i, nullptr));
        }
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto result = aggregate(std::move(trials), wall);
    if (out)
        write_json(*out / "summary.json", summary_json(cfg, result));
    return result;
}

json summary_json(const SwarmConfig& cfg, const ExperimentResult& r)
{
    json trials = json::array();
    for (const auto& t : r.trials)
        trials.push_back(trial_json(t));
    return json{{"config", cfg.to_json()},
                {"t_max", cfg.effective_T_max()},
                {"trials", trials},
                {"convergence_rate", r.convergence_rate},
                {"median_iterations", opt(r.median_iterations)},
                {"wall_time_s", r.wall_time_s}};
}

std::vector<SweepRow> sweep(const SwarmConfig& base, const std::string& axis, const std::vector<double>& values,
                            const std::optional<std::filesystem::path>& out)
{
    const auto axes = sweep_axes();
    if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
        std::string valid;
        for (const auto& a : axes)
            valid += (valid.empty() ? "" : ", ") + a;
        throw ConfigError("unknown sweep axis '" + axis + "'; valid axes: " + valid);
    }
    if (values.empty())
        throw ConfigError("sweep needs at least one value");
    std::vector<SwarmConfig> cells;
    for (double v : values) {
        SwarmConfig c = base;
        c.set(axis, json(v));
        c.to_sim();
        cells.push_back(std::move(c));
    }
    if (out)
        prepare_dir(*out);

    std::vector<SweepRow> rows;
    json per_value = json::array();
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto r = run_experiment(cells[k], std::nullopt);
        for (const auto& t : r.trials)
            rows.push_back(SweepRow{values[k], t});
        per_value.push_back(json{{"value", values[k]},
                                 {"convergence_rate", r.convergence_rate},
                                 {"median_iterations", opt(r.median_iterations)},
                                 {"wall_time_s", r.wall_time_s}});
    }
    if (out) {
        std::ofstream csv(*out / "sweep.csv");
        csv << "axis,value,trial,seed,iterations,converged,min_distance\n";
        for (const auto& row : rows)
            csv << axis << ',' << fmt(row.value) << ',' << row.result.trial << ',' << row.result.seed << ','
                << row.result.iterations << ',' << (row.result.converged ? 1 : 0) << ','
                << fmt(row.result.min_distance) << '\n';
        write_json(*out / "summary.json",
                   json{{"config", base.to_json()}, {"axis", axis}, {"values", per_value}});
    }
    return rows;
}

std::vector<double> table_zetas() { return {0.002, 0.01, 0.02, 0.05, 0.10, 0.15, 0.20}; }

std::vector<SeedRow> seed_robot_study(const SwarmConfig& base, const std::vector<double>& zetas,
                                      const std::optional<std::filesystem::path>& out)
{
    if (base.mode != ExperimentMode::Discrete)
        throw ConfigError("the seed-robot study needs discrete mode");
    std::vector<SwarmConfig> cells;
    for (double z : zetas) {
        SwarmConfig c = base;
        c.set("zeta", json(z));
        c.to_sim();
        cells.push_back(std::move(c));
    }
    if (out)
        prepare_dir(*out);
    std::vector<SeedRow> rows;
    json table = json::array();
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto r = run_experiment(cells[k], std::nullopt);
        SeedRow row;
        row.zeta = zetas[k];
        row.trials = r.trials.size();
        for (const auto& t : r.trials)
            row.converged += t.converged;
        row.percent = 100.0 * static_cast<double>(row.converged) / static_cast<double>(row.trials);
        rows.push_back(row);
        table.push_back(json{{"zeta", row.zeta},
                             {"trials", row.trials},
                             {"converged", row.converged},
                             {"percent", row.percent},
                             {"median_iterations", opt(r.median_iterations)},
                             {"wall_time_s", r.wall_time_s}});
    }
    if (out) {
        std::ofstream csv(*out / "seeds.csv");
        csv << "zeta,trials,converged,percent\n";
        for (const auto& row : rows)
            csv << fmt(row.zeta) << ',' << row.trials << ',' << row.converged << ',' << fmt(row.percent) << '\n';
        write_json(*out / "summary.json", json{{"config", base.to_json()}, {"rows", table}});
    }
    return rows;
}

} // namespace swarmgbp::harness
