#pragma once

// Multi-robot simulation kernel. Every robot owns a consensus graph and (in
// moving modes) a planning graph; robots only learn about each other through
// webpages published at the end of the previous timestep, and only from
// robots they currently share an edge with.

#include "swarmgbp/consensus.hpp"
#include "swarmgbp/discrete.hpp"
#include "swarmgbp/formation.hpp"
#include "swarmgbp/planning.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace swarmgbp::sim {

using gbp::FactorId;
using gbp::GaussianInfo;
using gbp::VarId;
using lie::ManifoldPoint;

enum class Mode {
    /// Plan toward formation points while agreeing on the SE(2) frame.
    Formation,
    /// Plan toward random goals while agreeing on the SE(2) frame.
    Exploration,
    /// Stationary robots on a triangular grid agreeing on one of N_D options.
    Discrete,
    /// Stationary robots with caller-supplied priors; consensus only.
    Static,
};

enum class ConsensusAttach {
    /// Same-slot link on every window variable.
    Window,
    /// Link on the newest variable only, moved on every slide.
    Newest,
};

struct SimConfig {
    Mode mode = Mode::Exploration;
    std::size_t n_robots = 10;
    double world_size = 100.0;
    double r_C = 20.0;
    double dt = 0.1;
    int iterations = 2;

    int window = 3;
    int slide_period = 1;
    std::vector<double> sigma_p{10.0, 10.0, 3.141592653589793};
    /// Temporal strength relative to each robot's own prior strength.
    double sigma_t_scale = 0.1;
    std::vector<double> sigma_c{0.1, 0.1, 0.031415926535897934};
    ConsensusAttach attach = ConsensusAttach::Window;

    planning::PlanConfig plan;
    double min_start_separation = 4.0;
    double goal_radius = 2.0;

    formation::ShapeSpec shape;
    /// occupancy.r_C is overwritten with the communication radius.
    formation::OccupancyParams occupancy;
    double r_R = 1.0;

    int n_options = 4;
    double zeta = 0.0;
    int seed_decision = 0;
    double grid_spacing = 5.5;
    double grid_jitter = 0.24;

    /// Static mode: one prior per robot.
    std::vector<ManifoldPoint> static_priors;
    /// Scripted starts (required in static mode, optional otherwise) and,
    /// for exploration, goals that are never resampled.
    std::vector<Eigen::Vector2d> start_positions;
    std::vector<double> start_headings;
    std::vector<Eigen::Vector2d> fixed_goals;

    bool parallel = true;

    /// Throws std::invalid_argument describing the first problem found.
    void validate() const;
};

/// splitmix64 of master + index; used for per-trial and per-robot streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Lower id hosts a shared factor.
constexpr RobotId shared_factor_ownership(RobotId i, RobotId j) { return i < j ? i : j; }

FactorId consensus_link_id(RobotId i, RobotId j, std::uint32_t serial);
FactorId collision_link_id(RobotId i, RobotId j, std::uint32_t k);

struct CommGraph {
    /// Sorted neighbour ids per robot.
    std::vector<std::vector<RobotId>> adjacency;

    std::size_t edge_count() const;
    bool connected(RobotId i, RobotId j) const;
};

/// Edge iff distance < r_C, built with a uniform cell grid.
CommGraph build_comm_graph(std::span<const Eigen::Vector2d> positions, double r_C);

struct OutMessage {
    RobotId to = 0;
    FactorId factor = 0;
    /// The variable the message concerns: the sender's own variable for a
    /// variable-to-factor message, the recipient's for factor-to-variable.
    VarId var = 0;
    GaussianInfo msg;
    ManifoldPoint lin;
};

struct Webpage {
    RobotId robot = 0;
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    /// Sorted by recipient.
    std::vector<OutMessage> messages;
};

/// The only window a robot has onto other robots.
class MailboxView {
public:
    MailboxView(RobotId self, std::span<const RobotId> neighbors, std::span<const Webpage> pages)
        : self_(self), neighbors_(neighbors), pages_(pages)
    {
    }

    /// Throws std::logic_error for a robot that is not a current neighbour.
    const Webpage& page(RobotId j) const;
    /// Messages on j's page addressed to this robot.
    std::span<const OutMessage> from(RobotId j) const;

private:
    RobotId self_;
    std::span<const RobotId> neighbors_;
    std::span<const Webpage> pages_;
};

struct RobotAgent {
    RobotId id = 0;
    gbp::FactorGraph consensus_graph;
    consensus::ConsensusWindow window;
    gbp::FactorGraph plan_graph;
    std::optional<planning::PlanChain> chain;
    std::optional<formation::FormationIndex> formation;
    std::optional<discrete::RobotDecisionInit> decision;
    /// Physical position of a stationary robot; moving robots use chain->current.
    Eigen::Vector2d fixed_position = Eigen::Vector2d::Zero();
    Eigen::Vector2d goal = Eigen::Vector2d::Zero();
    std::mt19937_64 rng;
    /// Robots with live inter-robot factors, sorted.
    std::vector<RobotId> connected;

    Eigen::Vector2d position() const;
    double heading() const;
};

/// Robots whose variables appear in any of this robot's inter-robot factors,
/// read from the graphs themselves.
std::vector<RobotId> linked_robots(const RobotAgent& r);

/// Mean over unordered pairs of the translation distance and the wrapped
/// heading difference between SE(2) beliefs.
struct Deviation {
    double position = 0.0;
    double heading = 0.0;
};
Deviation mean_pairwise_deviation(std::span<const ManifoldPoint> beliefs);

bool continuous_converged(std::span<const ManifoldPoint> beliefs, double pos_tol = 0.1, double ang_tol = 0.01);
bool discrete_converged(std::span<const int> decisions);

/// Jittered triangular lattice centred on `center`. Jitter is uniform in a
/// disc; throws std::invalid_argument if spacing - 2 jitter < 5 m and
/// std::logic_error if the result violates the 5 m separation.
std::vector<Eigen::Vector2d> init_triangular_grid(std::size_t n, double spacing, double jitter, std::mt19937_64& rng,
                                                  const Eigen::Vector2d& center = Eigen::Vector2d(50.0, 50.0));

inline constexpr double kGridMinSeparation = 5.0;

class World {
public:
    World(SimConfig cfg, std::uint64_t seed);

    /// One synchronous timestep; OpenMP across robots when `parallel`.
    void step(bool parallel);
    void step() { step(cfg_.parallel); }

    int t() const { return t_; }
    const SimConfig& config() const { return cfg_; }
    const std::vector<RobotAgent>& robots() const { return robots_; }
    const CommGraph& graph() const { return graph_; }
    const std::vector<Webpage>& pages() const { return pages_; }

    std::vector<Eigen::Vector2d> positions() const;
    /// Newest consensus mean per robot.
    std::vector<ManifoldPoint> consensus_means() const;
    std::vector<int> decisions() const;
    double min_pairwise_distance() const;
    bool formation_complete() const;
    std::uint64_t singular_messages() const;

    /// Move a stationary robot; scripted scenarios only.
    void place(RobotId i, const Eigen::Vector2d& p);

private:
    void robot_step(RobotAgent& r, std::span<const RobotId> neighbors);
    Webpage publish(const RobotAgent& r) const;

    SimConfig cfg_;
    std::vector<RobotAgent> robots_;
    CommGraph graph_;
    std::vector<Webpage> pages_;
    int t_ = 0;
};

} // namespace swarmgbp::sim
