#pragma once

// Path-planning layer: a chain of planned states over a short horizon with
// constant-velocity dynamics, a unicycle heading constraint and soft
// inter-robot separation. State vector is [x, y, theta, vx, vy, omega].

#include "swarmgbp/gbp.hpp"
#include "swarmgbp/ids.hpp"

#include <Eigen/Core>

#include <vector>

namespace swarmgbp::planning {

using gbp::FactorGraph;
using gbp::FactorId;
using gbp::FactorNode;
using gbp::VarId;
using lie::ManifoldPoint;
using lie::Vec;

inline constexpr int kStateDim = 6;

struct PlanState {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    Eigen::Vector3d pdot = Eigen::Vector3d::Zero();

    static PlanState from_vector(const Vec& v);
    Vec vector() const;
    ManifoldPoint point() const;
    Eigen::Vector2d position() const { return p.head<2>(); }
    double speed() const { return pdot.head<2>().norm(); }
};

enum class UnicycleForm { Corrected, Paper };

/// X_{k+1} - Phi(dt) X_k with the heading row wrapped.
Vec dynamics_residual(const Vec& xk, const Vec& xk1, double dt);
/// Corrected: vx sin(theta) - vy cos(theta). Paper: vx cos(theta) - vy sin(theta).
double unicycle_residual(const Vec& x, UnicycleForm form);
/// exp(-|pi - pj| / d_min).
double collision_residual(const Eigen::Vector2d& pi, const Eigen::Vector2d& pj, double d_min);

/// Drive a horizon state toward `goal` with clamped speed and turn rate, then
/// integrate it by dt.
PlanState horizon_update(const PlanState& xh, const Eigen::Vector2d& goal, double dt, double v_max,
                         double omega_max);

class DynamicsMeasurement final : public gbp::Measurement {
public:
    explicit DynamicsMeasurement(double dt) : dt_(dt) {}
    int output_dim() const override { return kStateDim; }
    Vec evaluate(std::span<const ManifoldPoint> x) const override;
    gbp::JacobianMat jacobian(std::span<const ManifoldPoint> x) const override;
    bool angular_output(int i) const override { return i == 2; }

private:
    double dt_;
};

class UnicycleMeasurement final : public gbp::Measurement {
public:
    explicit UnicycleMeasurement(UnicycleForm form) : form_(form) {}
    int output_dim() const override { return 1; }
    Vec evaluate(std::span<const ManifoldPoint> x) const override;
    gbp::JacobianMat jacobian(std::span<const ManifoldPoint> x) const override;

private:
    UnicycleForm form_;
};

class CollisionMeasurement final : public gbp::Measurement {
public:
    explicit CollisionMeasurement(double d_min) : d_min_(d_min) {}
    int output_dim() const override { return 1; }
    Vec evaluate(std::span<const ManifoldPoint> x) const override;
    gbp::JacobianMat jacobian(std::span<const ManifoldPoint> x) const override;

private:
    double d_min_;
};

/// h(X) = X; the observation is the anchor state.
class StateMeasurement final : public gbp::Measurement {
public:
    int output_dim() const override { return kStateDim; }
    Vec evaluate(std::span<const ManifoldPoint> x) const override { return x[0].data(); }
    gbp::JacobianMat jacobian(std::span<const ManifoldPoint> x) const override;
    bool angular_output(int i) const override { return i == 2; }
};

struct PlanConfig {
    int horizon_steps = 6;
    double horizon_time = 1.5;
    double sigma_dynamics = 0.1;
    double sigma_unicycle = 0.001;
    double sigma_collision = 0.01;
    double sigma_current = 1e-6;
    double sigma_horizon = 0.1;
    double collision_damping = 0.25;
    double v_max = 2.0;
    double omega_max = 1.0;
    double d_min = 2.0;
    UnicycleForm unicycle = UnicycleForm::Corrected;
};

struct PlanChain {
    RobotId robot = 0;
    /// k = 0 ... H.
    std::vector<VarId> states;
    /// dt[k] spans states k and k + 1.
    std::vector<double> dt;
    FactorId anchor_current = 0;
    FactorId anchor_horizon = 0;
    std::vector<FactorId> dynamics;
    std::vector<FactorId> unicycle;
    /// The robot's physical state, pinned to X_0.
    PlanState current;
    /// Where the horizon state is being pulled.
    PlanState horizon_target;
};

PlanChain init_chain(FactorGraph& g, RobotId robot, const PlanState& start, const PlanConfig& cfg);

/// Collision factor between same-index planned states of two robots.
FactorNode make_collision_factor(FactorId id, VarId vi, VarId vj, const PlanConfig& cfg);

/// Bring stored headings back into (-pi, pi] after tangent updates.
void rewrap_angles(FactorGraph& g, const PlanChain& chain);

/// Move the physical state toward the planned state X_1 by dt and re-anchor X_0.
void advance_current_state(PlanChain& chain, FactorGraph& g, double dt, const PlanConfig& cfg);

/// Step the horizon target toward `goal` and re-anchor X_H. The target is kept
/// within v_max * T_H of the current position.
void advance_horizon(PlanChain& chain, FactorGraph& g, const Eigen::Vector2d& goal, double dt, const PlanConfig& cfg);

/// Belief mean of planned state k, or its lin point if the belief is improper.
PlanState planned_state(const PlanChain& chain, const FactorGraph& g, std::size_t k);

} // namespace swarmgbp::planning
