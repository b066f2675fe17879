#pragma once

// Shape formation: canonical formation points, occupancy weighting and
// distance-occupancy goal selection through a 3-d nearest-neighbour index.

#include "swarmgbp/lie.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace swarmgbp::formation {

using lie::ManifoldPoint;

struct ShapeSpec {
    std::vector<Eigen::Vector2d> points;
    double min_spacing = 4.0;

    /// One "x y" pair per line; blank lines and '#' comments are skipped.
    /// Throws std::invalid_argument on malformed lines or spacing below r_S.
    static ShapeSpec parse(std::istream& in, double min_spacing);
    static ShapeSpec load(const std::filesystem::path& path, double min_spacing);
    void validate() const;
};

struct AugmentedFormationPoint {
    Eigen::Vector2d q;
    double tau = 0.0;
};

std::vector<AugmentedFormationPoint> augment(const ShapeSpec& shape);

/// Static KD-tree over 3-d points. Nearest queries break distance ties by
/// the lowest point index.
class KdTree3 {
public:
    KdTree3() = default;
    explicit KdTree3(std::vector<Eigen::Vector3d> points);

    std::size_t size() const { return points_.size(); }
    /// Throws std::logic_error on an empty tree.
    std::size_t nearest(const Eigen::Vector3d& query) const;

private:
    struct Node {
        std::size_t point;
        int axis;
        int left = -1;
        int right = -1;
    };
    int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi);
    void search(int node, const Eigen::Vector3d& q, std::size_t& best, double& best_d2) const;

    std::vector<Eigen::Vector3d> points_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

struct FormationIndex {
    std::vector<AugmentedFormationPoint> points;
    KdTree3 tree;

    void rebuild();
};

struct OccupancyParams {
    double r_N = 2.0;
    double r_C = 10.0;
    double tau_0 = 1e3;
    /// Without weighting a point only counts as occupied while a neighbour
    /// is on it.
    bool weighting = true;
};

/// One occupancy pass. Positions are global; `pose` is the consensus belief
/// of the formation frame.
void update_occupancy(std::vector<AugmentedFormationPoint>& points, const ManifoldPoint& pose,
                      const Eigen::Vector2d& self_position, std::span<const Eigen::Vector2d> neighbors,
                      const OccupancyParams& params);

struct GoalChoice {
    std::size_t index;
    Eigen::Vector2d goal;
};

/// Nearest augmented point to (canonical self position, 0); the rebuilt
/// index must match `index.points`. Throws std::invalid_argument when empty.
GoalChoice select_goal(const FormationIndex& index, const ManifoldPoint& pose, const Eigen::Vector2d& self_position);

/// Tangent-space mean of SE(2) poses.
ManifoldPoint average_pose(std::span<const ManifoldPoint> poses);

/// Every formation point, placed with the averaged pose, has a robot within r_R.
bool formation_complete(const ShapeSpec& shape, std::span<const Eigen::Vector2d> robots,
                        std::span<const ManifoldPoint> beliefs, double r_R);

} // namespace swarmgbp::formation
