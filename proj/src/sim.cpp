#include "swarmgbp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace swarmgbp::sim {

using ids::Tag;
using lie::Vec;

namespace {

// Keeps seed robots' temporal factors numerically sane.
constexpr double kMinTemporalSigma = 1e-6;

VarId consensus_var(RobotId r, std::uint32_t serial) { return ids::make(Tag::ConsensusVar, r, 0, serial); }
VarId plan_var(RobotId r, std::uint32_t k) { return ids::make(Tag::PlanVar, r, 0, k); }

Vec to_vec(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool moving(Mode m) { return m == Mode::Formation || m == Mode::Exploration; }

std::vector<VarId> linked_slots(const RobotAgent& r, ConsensusAttach attach)
{
    if (attach == ConsensusAttach::Newest)
        return {r.window.newest()};
    return r.window.window;
}

void link_slot(RobotAgent& r, RobotId j, VarId mine, const Vec& sigma_c)
{
    const auto serial = ids::serial_of(mine);
    const FactorId f = consensus_link_id(r.id, j, serial);
    if (shared_factor_ownership(r.id, j) == r.id)
        r.consensus_graph.add_factor(
            consensus::make_consensus_factor(f, mine, r.window.kind, consensus_var(j, serial), r.window.kind, sigma_c));
    else
        r.consensus_graph.attach_remote_factor(mine, f);
}

void unlink_slot(RobotAgent& r, RobotId j, VarId mine)
{
    const FactorId f = consensus_link_id(r.id, j, ids::serial_of(mine));
    if (shared_factor_ownership(r.id, j) == r.id)
        r.consensus_graph.remove_factor(f);
    else
        r.consensus_graph.detach_remote_factor(mine, f);
}

void connect(RobotAgent& r, RobotId j, const SimConfig& cfg, const Vec& sigma_c)
{
    for (VarId v : linked_slots(r, cfg.attach))
        link_slot(r, j, v, sigma_c);
    if (!r.chain)
        return;
    const bool host = shared_factor_ownership(r.id, j) == r.id;
    for (std::uint32_t k = 1; k < r.chain->states.size(); ++k) {
        const FactorId f = collision_link_id(r.id, j, k);
        if (host)
            r.plan_graph.add_factor(planning::make_collision_factor(f, plan_var(r.id, k), plan_var(j, k), cfg.plan));
        else
            r.plan_graph.attach_remote_factor(plan_var(r.id, k), f);
    }
}

void disconnect(RobotAgent& r, RobotId j, const SimConfig& cfg)
{
    for (VarId v : linked_slots(r, cfg.attach))
        unlink_slot(r, j, v);
    if (!r.chain)
        return;
    const bool host = shared_factor_ownership(r.id, j) == r.id;
    for (std::uint32_t k = 1; k < r.chain->states.size(); ++k) {
        const FactorId f = collision_link_id(r.id, j, k);
        if (host)
            r.plan_graph.remove_factor(f);
        else
            r.plan_graph.detach_remote_factor(plan_var(r.id, k), f);
    }
}

void publish_link(const gbp::FactorGraph& g, RobotId self, RobotId j, FactorId f, VarId mine,
                  std::vector<OutMessage>& out)
{
    if (shared_factor_ownership(self, j) == self) {
        if (!g.has_factor(f))
            return;
        const auto& fac = g.factor(f);
        if (const auto& sent = fac.outgoing[1])
            out.push_back(OutMessage{j, f, fac.adjacent[1], sent->first, sent->second});
        return;
    }
    if (!g.has_variable(mine))
        return;
    const auto& var = g.variable(mine);
    if (!var.inbox_entry(f))
        return;
    out.push_back(OutMessage{j, f, mine, var.belief - *var.inbox_entry(f), var.lin_point});
}

std::vector<Eigen::Vector2d> random_starts(std::size_t n, double extent, double min_sep, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, extent);
    std::vector<Eigen::Vector2d> out;
    const std::size_t max_attempts = 1000 * (n + 1);
    std::size_t attempts = 0;
    while (out.size() < n) {
        if (++attempts > max_attempts)
            throw std::invalid_argument("cannot place robots with the requested start separation");
        const Eigen::Vector2d p(u(rng), u(rng));
        bool ok = true;
        for (const auto& q : out)
            if ((p - q).norm() < min_sep) {
                ok = false;
                break;
            }
        if (ok)
            out.push_back(p);
    }
    return out;
}

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw std::invalid_argument(what);
}

bool all_positive(const std::vector<double>& v)
{
    return !v.empty() && std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0 && std::isfinite(x); });
}

} // namespace

// ---------------------------------------------------------------------------

void SimConfig::validate() const
{
    require(n_robots >= 1, "n_robots must be at least 1");
    require(r_C > 0.0, "r_C must be positive");
    require(dt > 0.0, "dt must be positive");
    require(world_size > 0.0, "world_size must be positive");
    require(iterations >= 1, "iterations must be at least 1");
    require(window >= 1, "window must be at least 1");
    require(slide_period >= 1, "slide_period must be at least 1");
    require(all_positive(sigma_p), "sigma_p entries must be positive");
    require(all_positive(sigma_c), "sigma_c entries must be positive");
    require(sigma_t_scale > 0.0, "sigma_t_scale must be positive");
    require(plan.horizon_steps >= 1, "horizon_steps must be at least 1");
    for (double s : {plan.horizon_time, plan.sigma_dynamics, plan.sigma_unicycle, plan.sigma_collision,
                     plan.sigma_current, plan.sigma_horizon, plan.v_max, plan.omega_max, plan.d_min})
        require(s > 0.0, "planning strengths, limits and d_min must be positive");
    require(plan.collision_damping >= 0.0 && plan.collision_damping < 1.0, "collision_damping must lie in [0, 1)");
    require(goal_radius > 0.0, "goal_radius must be positive");
    require(r_R > 0.0, "r_R must be positive");
    require(occupancy.r_N > 0.0 && occupancy.tau_0 > 0.0, "r_N and tau_0 must be positive");
    require(start_positions.empty() || start_positions.size() == n_robots, "start_positions needs one entry per robot");
    require(start_headings.empty() || start_headings.size() == n_robots, "start_headings needs one entry per robot");
    require(fixed_goals.empty() || (mode == Mode::Exploration && fixed_goals.size() == n_robots),
            "fixed_goals needs exploration mode and one goal per robot");

    switch (mode) {
    case Mode::Formation:
        require(!shape.points.empty(), "formation mode needs a shape");
        shape.validate();
        require(n_robots == shape.points.size(), "formation mode needs one robot per formation point");
        [[fallthrough]];
    case Mode::Exploration:
        require(sigma_p.size() == 3 && sigma_c.size() == 3, "SE(2) modes need 3-component sigma_p and sigma_c");
        require(min_start_separation >= 0.0, "min_start_separation must be non-negative");
        break;
    case Mode::Discrete:
        require(sigma_p.size() == 1 && sigma_c.size() == 1, "discrete mode needs scalar sigma_p and sigma_c");
        require(n_options >= 2, "n_options must be at least 2");
        require(zeta >= 0.0 && zeta <= 1.0, "zeta must lie in [0, 1]");
        require(seed_decision >= 0 && seed_decision < n_options, "seed_decision must be a valid option");
        require(grid_jitter >= 0.0 && grid_spacing - 2.0 * grid_jitter >= kGridMinSeparation,
                "grid spacing minus twice the jitter must be at least 5 m");
        break;
    case Mode::Static:
        require(static_priors.size() == n_robots, "static mode needs one prior per robot");
        require(start_positions.size() == n_robots, "static mode needs one position per robot");
        for (const auto& p : static_priors) {
            require(p.kind() == static_priors.front().kind(), "static priors must share one kind");
            require(static_cast<int>(sigma_p.size()) == p.kind().dim(), "sigma_p size must match the prior kind");
            require(static_cast<int>(sigma_c.size()) == p.kind().dim(), "sigma_c size must match the prior kind");
        }
        break;
    }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

FactorId consensus_link_id(RobotId i, RobotId j, std::uint32_t serial)
{
    return ids::make(Tag::ConsensusLink, std::min(i, j), std::max(i, j), serial);
}

FactorId collision_link_id(RobotId i, RobotId j, std::uint32_t k)
{
    return ids::make(Tag::CollisionLink, std::min(i, j), std::max(i, j), k);
}

// ---------------------------------------------------------------------------
// Communication graph

std::size_t CommGraph::edge_count() const
{
    std::size_t n = 0;
    for (const auto& a : adjacency)
        n += a.size();
    return n / 2;
}

bool CommGraph::connected(RobotId i, RobotId j) const
{
    const auto& a = adjacency.at(i);
    return std::binary_search(a.begin(), a.end(), j);
}

CommGraph build_comm_graph(std::span<const Eigen::Vector2d> positions, double r_C)
{
    CommGraph g;
    g.adjacency.resize(positions.size());
    if (positions.empty())
        return g;

    auto cell_of = [&](const Eigen::Vector2d& p) {
        return std::make_pair(static_cast<std::int64_t>(std::floor(p.x() / r_C)),
                              static_cast<std::int64_t>(std::floor(p.y() / r_C)));
    };
    auto key = [](std::int64_t cx, std::int64_t cy) {
        return (static_cast<std::uint64_t>(cx) << 32) ^ static_cast<std::uint64_t>(cy & 0xffffffff);
    };
    std::unordered_map<std::uint64_t, std::vector<RobotId>> cells;
    for (RobotId i = 0; i < positions.size(); ++i) {
        const auto [cx, cy] = cell_of(positions[i]);
        cells[key(cx, cy)].push_back(i);
    }
    const double r2 = r_C * r_C;
    for (RobotId i = 0; i < positions.size(); ++i) {
        const auto [cx, cy] = cell_of(positions[i]);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = cells.find(key(cx + dx, cy + dy));
                if (it == cells.end())
                    continue;
                for (RobotId j : it->second)
                    if (j != i && (positions[i] - positions[j]).squaredNorm() < r2)
                        g.adjacency[i].push_back(j);
            }
        std::sort(g.adjacency[i].begin(), g.adjacency[i].end());
    }
    return g;
}

// ---------------------------------------------------------------------------
// Mailbox

const Webpage& MailboxView::page(RobotId j) const
{
    if (!std::binary_search(neighbors_.begin(), neighbors_.end(), j))
        throw std::logic_error("robot " + std::to_string(self_) + " has no edge to robot " + std::to_string(j));
    return pages_[j];
}

std::span<const OutMessage> MailboxView::from(RobotId j) const
{
    const auto& msgs = page(j).messages;
    auto lo = std::lower_bound(msgs.begin(), msgs.end(), self_,
                               [](const OutMessage& m, RobotId r) { return m.to < r; });
    auto hi = std::upper_bound(lo, msgs.end(), self_, [](RobotId r, const OutMessage& m) { return r < m.to; });
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Robots

Eigen::Vector2d RobotAgent::position() const
{
    return chain ? chain->current.position() : fixed_position;
}

double RobotAgent::heading() const
{
    return chain ? chain->current.p.z() : 0.0;
}

std::vector<RobotId> linked_robots(const RobotAgent& r)
{
    std::vector<RobotId> out;
    auto note = [&](std::uint64_t id) {
        const Tag tag = ids::tag_of(id);
        if (tag != Tag::ConsensusLink && tag != Tag::CollisionLink)
            return;
        const RobotId a = ids::robot_of(id), b = ids::other_of(id);
        out.push_back(a == r.id ? b : a);
    };
    for (const auto* g : {&r.consensus_graph, &r.plan_graph}) {
        for (const auto& f : g->factors())
            note(f.id);
        for (const auto& v : g->variables())
            for (const auto& [fid, msg] : v.inbox)
                note(fid);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Metrics

Deviation mean_pairwise_deviation(std::span<const ManifoldPoint> beliefs)
{
    Deviation d;
    const std::size_t n = beliefs.size();
    if (n < 2)
        return d;
    double pos = 0.0, ang = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            pos += std::hypot(beliefs[i][0] - beliefs[j][0], beliefs[i][1] - beliefs[j][1]);
            ang += std::abs(lie::wrap_angle(beliefs[i][2] - beliefs[j][2]));
        }
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    d.position = pos / pairs;
    d.heading = ang / pairs;
    return d;
}

bool continuous_converged(std::span<const ManifoldPoint> beliefs, double pos_tol, double ang_tol)
{
    if (beliefs.size() < 2)
        return true;
    const auto d = mean_pairwise_deviation(beliefs);
    return d.position < pos_tol && d.heading < ang_tol;
}

bool discrete_converged(std::span<const int> decisions)
{
    return std::adjacent_find(decisions.begin(), decisions.end(), std::not_equal_to<>()) == decisions.end();
}

std::vector<Eigen::Vector2d> init_triangular_grid(std::size_t n, double spacing, double jitter, std::mt19937_64& rng,
                                                  const Eigen::Vector2d& center)
{
    if (!(jitter >= 0.0) || spacing - 2.0 * jitter < kGridMinSeparation)
        throw std::invalid_argument("triangular grid cannot guarantee 5 m separation");
    const double row_height = spacing * std::sqrt(3.0) / 2.0;
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n) * row_height / spacing)));
    std::vector<Eigen::Vector2d> out;
    out.reserve(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row = i / std::max<std::size_t>(cols, 1), col = i % std::max<std::size_t>(cols, 1);
        Eigen::Vector2d p(static_cast<double>(col) * spacing + (row % 2 ? spacing / 2.0 : 0.0),
                          static_cast<double>(row) * row_height);
        const double r = jitter * std::sqrt(u(rng)), a = 2.0 * std::numbers::pi * u(rng);
        p += r * Eigen::Vector2d(std::cos(a), std::sin(a));
        out.push_back(p);
    }
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : out)
        centroid += p;
    if (!out.empty())
        centroid /= static_cast<double>(out.size());
    for (auto& p : out)
        p += center - centroid;

    const auto graph = build_comm_graph(out, kGridMinSeparation - 1e-9);
    if (graph.edge_count() != 0)
        throw std::logic_error("triangular grid violates the 5 m separation");
    return out;
}

// ---------------------------------------------------------------------------
// World

World::World(SimConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg))
{
    cfg_.validate();
    cfg_.occupancy.r_C = cfg_.r_C;
    std::mt19937_64 rng(seed);
    const std::size_t n = cfg_.n_robots;
    const Vec sigma_p = to_vec(cfg_.sigma_p);

    std::vector<Eigen::Vector2d> starts;
    std::vector<double> headings(n, 0.0);
    std::vector<discrete::RobotDecisionInit> decisions;
    switch (cfg_.mode) {
    case Mode::Formation:
    case Mode::Exploration: {
        starts = cfg_.start_positions.empty() ? random_starts(n, cfg_.world_size, cfg_.min_start_separation, rng)
                                              : cfg_.start_positions;
        std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
        for (auto& h : headings)
            h = ang(rng);
        if (!cfg_.start_headings.empty())
            headings = cfg_.start_headings;
        break;
    }
    case Mode::Discrete:
        starts = init_triangular_grid(n, cfg_.grid_spacing, cfg_.grid_jitter, rng,
                                      Eigen::Vector2d::Constant(cfg_.world_size / 2.0));
        decisions = discrete::init_discrete_experiment(n, discrete::DecisionSpace(cfg_.n_options), cfg_.zeta,
                                                       cfg_.seed_decision, cfg_.sigma_p.front(), rng);
        break;
    case Mode::Static:
        starts = cfg_.start_positions;
        break;
    }

    std::vector<formation::AugmentedFormationPoint> shape_points;
    if (cfg_.mode == Mode::Formation)
        shape_points = formation::augment(cfg_.shape);

    robots_.resize(n);
    for (RobotId i = 0; i < n; ++i) {
        auto& r = robots_[i];
        r.id = i;
        r.rng.seed(derive_seed(seed, i));
        r.fixed_position = starts[i];

        ManifoldPoint prior = ManifoldPoint::se2(starts[i].x(), starts[i].y(), headings[i]);
        Vec sp = sigma_p;
        if (cfg_.mode == Mode::Discrete) {
            r.decision = decisions[i];
            prior = ManifoldPoint::scalar(discrete::DecisionSpace(cfg_.n_options).dequantize(decisions[i].initial_decision));
            sp = Vec::Constant(1, decisions[i].sigma_p);
        } else if (cfg_.mode == Mode::Static) {
            prior = cfg_.static_priors[i];
        }
        const Vec st = (cfg_.sigma_t_scale * sp).cwiseMax(kMinTemporalSigma);
        r.window = consensus::init_window(r.consensus_graph, i, prior, sp, st, cfg_.window, cfg_.slide_period);

        if (moving(cfg_.mode)) {
            planning::PlanState s;
            s.p << starts[i].x(), starts[i].y(), headings[i];
            r.chain = planning::init_chain(r.plan_graph, i, s, cfg_.plan);
        }
        if (cfg_.mode == Mode::Exploration) {
            std::uniform_real_distribution<double> u(0.0, cfg_.world_size);
            r.goal = cfg_.fixed_goals.empty() ? Eigen::Vector2d(u(r.rng), u(r.rng)) : cfg_.fixed_goals[i];
        }
        if (cfg_.mode == Mode::Formation) {
            r.formation.emplace();
            r.formation->points = shape_points;
            formation::update_occupancy(r.formation->points, prior, starts[i], {}, cfg_.occupancy);
            r.formation->rebuild();
            r.goal = formation::select_goal(*r.formation, prior, starts[i]).goal;
        }
    }

    pages_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        pages_[i] = publish(robots_[i]);
    graph_ = build_comm_graph(positions(), cfg_.r_C);
}

void World::robot_step(RobotAgent& r, std::span<const RobotId> neighbors)
{
    const Vec sigma_c = to_vec(cfg_.sigma_c);

    // Inter-robot factors follow the communication graph.
    std::vector<RobotId> lost, found;
    std::set_difference(r.connected.begin(), r.connected.end(), neighbors.begin(), neighbors.end(),
                        std::back_inserter(lost));
    std::set_difference(neighbors.begin(), neighbors.end(), r.connected.begin(), r.connected.end(),
                        std::back_inserter(found));
    for (RobotId j : lost)
        disconnect(r, j, cfg_);
    for (RobotId j : found)
        connect(r, j, cfg_, sigma_c);
    r.connected.assign(neighbors.begin(), neighbors.end());

    // Read last round's messages.
    const MailboxView mail(r.id, neighbors, pages_);
    for (RobotId j : neighbors) {
        for (const auto& m : mail.from(j)) {
            auto& g = ids::tag_of(m.factor) == Tag::ConsensusLink ? r.consensus_graph : r.plan_graph;
            if (g.has_factor(m.factor))
                g.set_remote_message(m.var, m.factor, m.msg, m.lin);
            else
                g.deliver_message(m.var, m.factor, m.msg, m.lin);
        }
    }
    for (auto* g : {&r.consensus_graph, &r.plan_graph})
        for (const auto& v : g->variables())
            g->update_belief(v.id);

    for (int k = 0; k < cfg_.iterations; ++k)
        r.consensus_graph.iterate();
    if (r.chain) {
        for (int k = 0; k < cfg_.iterations; ++k) {
            r.plan_graph.iterate();
            planning::rewrap_angles(r.plan_graph, *r.chain);
        }
        planning::advance_current_state(*r.chain, r.plan_graph, cfg_.dt, cfg_.plan);
        planning::advance_horizon(*r.chain, r.plan_graph, r.goal, cfg_.dt, cfg_.plan);
    }

    if ((t_ + 1) % cfg_.slide_period == 0) {
        const VarId previous_newest = r.window.newest();
        const auto slid = consensus::slide_window(r.window, r.consensus_graph);
        for (RobotId j : r.connected) {
            if (cfg_.attach == ConsensusAttach::Newest)
                unlink_slot(r, j, previous_newest);
            link_slot(r, j, slid.added, sigma_c);
        }
    }

    if (cfg_.mode == Mode::Exploration && cfg_.fixed_goals.empty()) {
        if ((r.chain->horizon_target.position() - r.goal).norm() < cfg_.goal_radius) {
            std::uniform_real_distribution<double> u(0.0, cfg_.world_size);
            r.goal = Eigen::Vector2d(u(r.rng), u(r.rng));
        }
    } else if (cfg_.mode == Mode::Formation) {
        const auto& var = r.consensus_graph.variable(r.window.newest());
        if (auto frame = var.mean_point()) {
            std::vector<Eigen::Vector2d> near;
            near.reserve(neighbors.size());
            for (RobotId j : neighbors)
                near.push_back(mail.page(j).position);
            formation::update_occupancy(r.formation->points, *frame, r.position(), near, cfg_.occupancy);
            r.formation->rebuild();
            r.goal = formation::select_goal(*r.formation, *frame, r.position()).goal;
        }
    }
}

Webpage World::publish(const RobotAgent& r) const
{
    Webpage page;
    page.robot = r.id;
    page.position = r.position();
    for (RobotId j : r.connected) {
        for (VarId v : linked_slots(r, cfg_.attach))
            publish_link(r.consensus_graph, r.id, j, consensus_link_id(r.id, j, ids::serial_of(v)), v, page.messages);
        if (r.chain)
            for (std::uint32_t k = 1; k < r.chain->states.size(); ++k)
                publish_link(r.plan_graph, r.id, j, collision_link_id(r.id, j, k), plan_var(r.id, k), page.messages);
    }
    return page;
}

void World::step(bool parallel)
{
    graph_ = build_comm_graph(positions(), cfg_.r_C);
    const auto n = static_cast<std::ptrdiff_t>(robots_.size());
    std::vector<Webpage> next(robots_.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            robot_step(robots_[i], graph_.adjacency[i]);
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            next[i] = publish(robots_[i]);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            robot_step(robots_[i], graph_.adjacency[i]);
        for (std::ptrdiff_t i = 0; i < n; ++i)
            next[i] = publish(robots_[i]);
    }
    pages_ = std::move(next);
    ++t_;
}

std::vector<Eigen::Vector2d> World::positions() const
{
    std::vector<Eigen::Vector2d> out;
    out.reserve(robots_.size());
    for (const auto& r : robots_)
        out.push_back(r.position());
    return out;
}

std::vector<ManifoldPoint> World::consensus_means() const
{
    std::vector<ManifoldPoint> out;
    out.reserve(robots_.size());
    for (const auto& r : robots_) {
        const auto& v = r.consensus_graph.variable(r.window.newest());
        out.push_back(v.mean_point().value_or(v.lin_point));
    }
    return out;
}

std::vector<int> World::decisions() const
{
    std::vector<int> out;
    if (cfg_.mode != Mode::Discrete)
        return out;
    const discrete::DecisionSpace space(cfg_.n_options);
    for (const auto& m : consensus_means())
        out.push_back(space.quantize(m[0]));
    return out;
}

double World::min_pairwise_distance() const
{
    const auto p = positions();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j)
            best = std::min(best, (p[i] - p[j]).norm());
    return best;
}

bool World::formation_complete() const
{
    if (cfg_.mode != Mode::Formation)
        return false;
    return formation::formation_complete(cfg_.shape, positions(), consensus_means(), cfg_.r_R);
}

void World::place(RobotId i, const Eigen::Vector2d& p)
{
    auto& r = robots_.at(i);
    if (r.chain)
        throw std::logic_error("place() is only for stationary robots");
    r.fixed_position = p;
}

std::uint64_t World::singular_messages() const
{
    std::uint64_t n = 0;
    for (const auto& r : robots_)
        n += r.consensus_graph.diagnostics().singular_messages + r.plan_graph.diagnostics().singular_messages;
    return n;
}

} // namespace swarmgbp::sim
