#include "swarmgbp/formation.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace swarmgbp::formation {

ShapeSpec ShapeSpec::parse(std::istream& in, double min_spacing)
{
    ShapeSpec s;
    s.min_spacing = min_spacing;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        double x, y;
        if (!(ls >> x)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            throw std::invalid_argument("shape line " + std::to_string(lineno) + ": expected two numbers");
        }
        std::string rest;
        if (!(ls >> y) || (ls >> rest))
            throw std::invalid_argument("shape line " + std::to_string(lineno) + ": expected two numbers");
        s.points.emplace_back(x, y);
    }
    s.validate();
    return s;
}

ShapeSpec ShapeSpec::load(const std::filesystem::path& path, double min_spacing)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open shape file " + path.string());
    return parse(in, min_spacing);
}

void ShapeSpec::validate() const
{
    if (points.empty())
        throw std::invalid_argument("shape has no points");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if ((points[i] - points[j]).norm() < min_spacing - 1e-9)
                throw std::invalid_argument("shape points " + std::to_string(i) + " and " + std::to_string(j) +
                                            " are closer than r_S");
}

std::vector<AugmentedFormationPoint> augment(const ShapeSpec& shape)
{
    std::vector<AugmentedFormationPoint> out;
    out.reserve(shape.points.size());
    for (const auto& q : shape.points)
        out.push_back({q, 0.0});
    return out;
}

// ---------------------------------------------------------------------------

KdTree3::KdTree3(std::vector<Eigen::Vector3d> points) : points_(std::move(points))
{
    std::vector<std::size_t> idx(points_.size());
    std::iota(idx.begin(), idx.end(), 0);
    nodes_.reserve(points_.size());
    root_ = build(idx, 0, idx.size());
}

int KdTree3::build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi)
{
    if (lo >= hi)
        return -1;
    Eigen::Vector3d mn = points_[idx[lo]], mx = mn;
    for (std::size_t i = lo; i < hi; ++i) {
        mn = mn.cwiseMin(points_[idx[i]]);
        mx = mx.cwiseMax(points_[idx[i]]);
    }
    int axis;
    (mx - mn).maxCoeff(&axis);
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi, [&](std::size_t a, std::size_t b) {
        return points_[a][axis] < points_[b][axis] || (points_[a][axis] == points_[b][axis] && a < b);
    });
    const int node = static_cast<int>(nodes_.size());
    nodes_.push_back({idx[mid], axis});
    const int left = build(idx, lo, mid);
    const int right = build(idx, mid + 1, hi);
    nodes_[node].left = left;
    nodes_[node].right = right;
    return node;
}

void KdTree3::search(int node, const Eigen::Vector3d& q, std::size_t& best, double& best_d2) const
{
    if (node < 0)
        return;
    const Node& n = nodes_[node];
    const double d2 = (points_[n.point] - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && n.point < best)) {
        best = n.point;
        best_d2 = d2;
    }
    const double diff = q[n.axis] - points_[n.point][n.axis];
    const int near = diff < 0 ? n.left : n.right;
    const int far = diff < 0 ? n.right : n.left;
    search(near, q, best, best_d2);
    if (diff * diff <= best_d2)
        search(far, q, best, best_d2);
}

std::size_t KdTree3::nearest(const Eigen::Vector3d& query) const
{
    if (root_ < 0)
        throw std::logic_error("nearest on an empty index");
    std::size_t best = std::numeric_limits<std::size_t>::max();
    double best_d2 = std::numeric_limits<double>::infinity();
    search(root_, query, best, best_d2);
    return best;
}

void FormationIndex::rebuild()
{
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(points.size());
    for (const auto& p : points)
        pts.emplace_back(p.q.x(), p.q.y(), p.tau);
    tree = KdTree3(std::move(pts));
}

// ---------------------------------------------------------------------------

void update_occupancy(std::vector<AugmentedFormationPoint>& points, const ManifoldPoint& pose,
                      const Eigen::Vector2d& self_position, std::span<const Eigen::Vector2d> neighbors,
                      const OccupancyParams& params)
{
    const ManifoldPoint to_canonical = lie::inverse(pose);
    std::vector<Eigen::Vector2d> local;
    local.reserve(neighbors.size());
    for (const auto& p : neighbors)
        local.push_back(lie::act(to_canonical, p));
    const Eigen::Vector2d self = lie::act(to_canonical, self_position);

    for (auto& pt : points) {
        const bool occupied = std::any_of(local.begin(), local.end(),
                                          [&](const Eigen::Vector2d& n) { return (pt.q - n).norm() < params.r_N; });
        if (occupied)
            pt.tau = params.tau_0;
        else if (!params.weighting || (pt.q - self).norm() < params.r_C)
            pt.tau = 0.0;
        else
            pt.tau = std::max(0.0, pt.tau - 1.0);
    }
}

GoalChoice select_goal(const FormationIndex& index, const ManifoldPoint& pose, const Eigen::Vector2d& self_position)
{
    if (index.points.empty() || index.tree.size() != index.points.size())
        throw std::invalid_argument("goal selection needs a non-empty, rebuilt formation index");
    const Eigen::Vector2d self = lie::act(lie::inverse(pose), self_position);
    const std::size_t best = index.tree.nearest(Eigen::Vector3d(self.x(), self.y(), 0.0));
    return {best, lie::act(pose, index.points[best].q)};
}

ManifoldPoint average_pose(std::span<const ManifoldPoint> poses)
{
    if (poses.empty())
        throw std::invalid_argument("average of no poses");
    ManifoldPoint mean = poses.front();
    for (int iter = 0; iter < 20; ++iter) {
        lie::Vec step = lie::Vec::Zero(mean.kind().dim());
        for (const auto& p : poses)
            step += lie::right_minus(p, mean).value;
        step /= static_cast<double>(poses.size());
        mean = lie::right_plus(mean, step);
        if (step.norm() < 1e-12)
            break;
    }
    return mean;
}

bool formation_complete(const ShapeSpec& shape, std::span<const Eigen::Vector2d> robots,
                        std::span<const ManifoldPoint> beliefs, double r_R)
{
    if (robots.empty() || beliefs.empty())
        return false;
    const ManifoldPoint pose = average_pose(beliefs);
    for (const auto& q : shape.points) {
        const Eigen::Vector2d g = lie::act(pose, q);
        const bool covered =
            std::any_of(robots.begin(), robots.end(), [&](const Eigen::Vector2d& r) { return (r - g).norm() < r_R; });
        if (!covered)
            return false;
    }
    return true;
}

} // namespace swarmgbp::formation
