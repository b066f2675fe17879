#include "swarmgbp/planning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swarmgbp::planning {

namespace {

Eigen::Matrix<double, 6, 6> transition(double dt)
{
    Eigen::Matrix<double, 6, 6> phi = Eigen::Matrix<double, 6, 6>::Identity();
    phi.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity() * dt;
    return phi;
}

Vec sigma_vector(double sigma, int n)
{
    return Vec::Constant(n, sigma);
}

void set_anchor(FactorGraph& g, FactorId f, const PlanState& s)
{
    g.factor(f).z = s.vector();
}

} // namespace

PlanState PlanState::from_vector(const Vec& v)
{
    if (v.size() != kStateDim)
        throw std::invalid_argument("plan state needs 6 components");
    PlanState s;
    s.p << v[0], v[1], lie::wrap_angle(v[2]);
    s.pdot << v[3], v[4], v[5];
    return s;
}

Vec PlanState::vector() const
{
    Vec v(kStateDim);
    v << p, pdot;
    return v;
}

ManifoldPoint PlanState::point() const
{
    return ManifoldPoint::rn(vector());
}

Vec dynamics_residual(const Vec& xk, const Vec& xk1, double dt)
{
    Vec r = xk1 - transition(dt) * xk;
    r[2] = lie::wrap_angle(r[2]);
    return r;
}

double unicycle_residual(const Vec& x, UnicycleForm form)
{
    const double th = x[2], vx = x[3], vy = x[4];
    if (form == UnicycleForm::Paper)
        return vx * std::cos(th) - vy * std::sin(th);
    return vx * std::sin(th) - vy * std::cos(th);
}

double collision_residual(const Eigen::Vector2d& pi, const Eigen::Vector2d& pj, double d_min)
{
    return std::exp(-(pi - pj).norm() / d_min);
}

PlanState horizon_update(const PlanState& xh, const Eigen::Vector2d& goal, double dt, double v_max, double omega_max)
{
    PlanState out = xh;
    const Eigen::Vector2d d = goal - xh.position();
    const double dist = d.norm();
    if (dist == 0.0) {
        out.pdot.setZero();
        return out;
    }
    const double speed = std::min(v_max, dist / dt);
    const double turn = lie::wrap_angle(std::atan2(d.y(), d.x()) - xh.p.z());
    const double omega = std::min(omega_max, std::abs(turn) / dt) * (turn > 0 ? 1.0 : (turn < 0 ? -1.0 : 0.0));
    out.pdot << speed * d / dist, omega;
    out.p += out.pdot * dt;
    out.p.z() = lie::wrap_angle(out.p.z());
    return out;
}

Vec DynamicsMeasurement::evaluate(std::span<const ManifoldPoint> x) const
{
    return dynamics_residual(x[0].data(), x[1].data(), dt_);
}

gbp::JacobianMat DynamicsMeasurement::jacobian(std::span<const ManifoldPoint>) const
{
    gbp::JacobianMat j(kStateDim, 2 * kStateDim);
    j.leftCols(kStateDim) = -transition(dt_);
    j.rightCols(kStateDim).setIdentity();
    return j;
}

Vec UnicycleMeasurement::evaluate(std::span<const ManifoldPoint> x) const
{
    Vec out(1);
    out << unicycle_residual(x[0].data(), form_);
    return out;
}

gbp::JacobianMat UnicycleMeasurement::jacobian(std::span<const ManifoldPoint> x) const
{
    const Vec& s = x[0].data();
    const double c = std::cos(s[2]), sn = std::sin(s[2]), vx = s[3], vy = s[4];
    gbp::JacobianMat j = gbp::JacobianMat::Zero(1, kStateDim);
    if (form_ == UnicycleForm::Paper) {
        j(0, 2) = -vx * sn - vy * c;
        j(0, 3) = c;
        j(0, 4) = -sn;
    } else {
        j(0, 2) = vx * c + vy * sn;
        j(0, 3) = sn;
        j(0, 4) = -c;
    }
    return j;
}

Vec CollisionMeasurement::evaluate(std::span<const ManifoldPoint> x) const
{
    Vec out(1);
    out << collision_residual(x[0].data().head<2>(), x[1].data().head<2>(), d_min_);
    return out;
}

gbp::JacobianMat CollisionMeasurement::jacobian(std::span<const ManifoldPoint> x) const
{
    gbp::JacobianMat j = gbp::JacobianMat::Zero(1, 2 * kStateDim);
    const Eigen::Vector2d diff = x[0].data().head<2>() - x[1].data().head<2>();
    const double dist = diff.norm();
    if (dist < 1e-9)
        return j;
    const double h = std::exp(-dist / d_min_);
    const Eigen::Vector2d grad = -h / (d_min_ * dist) * diff;
    j(0, 0) = grad.x();
    j(0, 1) = grad.y();
    j(0, kStateDim) = -grad.x();
    j(0, kStateDim + 1) = -grad.y();
    return j;
}

gbp::JacobianMat StateMeasurement::jacobian(std::span<const ManifoldPoint>) const
{
    return gbp::JacobianMat::Identity(kStateDim, kStateDim);
}

PlanChain init_chain(FactorGraph& g, RobotId robot, const PlanState& start, const PlanConfig& cfg)
{
    if (cfg.horizon_steps < 1 || !(cfg.horizon_time > 0.0))
        throw std::invalid_argument("planning horizon must be positive");
    const auto kind = lie::ManifoldKind::rn(kStateDim);
    PlanChain c;
    c.robot = robot;
    c.current = start;
    c.horizon_target = start;
    const int n = cfg.horizon_steps;
    c.dt.assign(n, cfg.horizon_time / n);

    for (int k = 0; k <= n; ++k) {
        PlanState s = start;
        s.p += start.pdot * (c.dt[0] * k);
        s.p.z() = lie::wrap_angle(s.p.z());
        const VarId v = ids::make(ids::Tag::PlanVar, robot, 0, k);
        g.add_variable(v, s.point());
        c.states.push_back(v);
    }
    const auto state_h = std::make_shared<StateMeasurement>();
    c.anchor_current = ids::make(ids::Tag::AnchorCurrent, robot, 0, 0);
    g.add_factor(gbp::make_factor(c.anchor_current, {c.states.front()}, {kind}, start.vector(),
                                  sigma_vector(cfg.sigma_current, kStateDim), state_h));
    c.anchor_horizon = ids::make(ids::Tag::AnchorHorizon, robot, 0, 0);
    g.add_factor(gbp::make_factor(c.anchor_horizon, {c.states.back()}, {kind}, start.vector(),
                                  sigma_vector(cfg.sigma_horizon, kStateDim), state_h));

    for (int k = 0; k < n; ++k) {
        const FactorId f = ids::make(ids::Tag::Dynamics, robot, 0, k);
        g.add_factor(gbp::make_factor(f, {c.states[k], c.states[k + 1]}, {kind, kind}, Vec::Zero(kStateDim),
                                      sigma_vector(cfg.sigma_dynamics, kStateDim),
                                      std::make_shared<DynamicsMeasurement>(c.dt[k])));
        c.dynamics.push_back(f);
    }
    const auto uni = std::make_shared<UnicycleMeasurement>(cfg.unicycle);
    for (int k = 0; k <= n; ++k) {
        const FactorId f = ids::make(ids::Tag::Unicycle, robot, 0, k);
        g.add_factor(gbp::make_factor(f, {c.states[k]}, {kind}, Vec::Zero(1), sigma_vector(cfg.sigma_unicycle, 1),
                                      uni));
        c.unicycle.push_back(f);
    }
    return c;
}

FactorNode make_collision_factor(FactorId id, VarId vi, VarId vj, const PlanConfig& cfg)
{
    if (!(cfg.d_min > 0.0))
        throw std::invalid_argument("d_min must be positive");
    const auto kind = lie::ManifoldKind::rn(kStateDim);
    return gbp::make_factor(id, {vi, vj}, {kind, kind}, Vec::Zero(1), sigma_vector(cfg.sigma_collision, 1),
                            std::make_shared<CollisionMeasurement>(cfg.d_min), cfg.collision_damping);
}

void rewrap_angles(FactorGraph& g, const PlanChain& chain)
{
    for (VarId v : chain.states) {
        const auto& lin = g.variable(v).lin_point;
        const double th = lin[2];
        if (th > -std::numbers::pi && th <= std::numbers::pi)
            continue;
        Vec d = lin.data();
        d[2] = lie::wrap_angle(th);
        g.set_lin_point_unchecked(v, ManifoldPoint::rn(d));
    }
}

PlanState planned_state(const PlanChain& chain, const FactorGraph& g, std::size_t k)
{
    const auto& var = g.variable(chain.states.at(k));
    return PlanState::from_vector(var.mean_point().value_or(var.lin_point).data());
}

void advance_current_state(PlanChain& chain, FactorGraph& g, double dt, const PlanConfig& cfg)
{
    const PlanState& now = chain.current;
    const PlanState next_plan = planned_state(chain, g, 1);
    const double alpha = std::min(1.0, dt / chain.dt.front());

    PlanState next = now;
    Eigen::Vector2d step = alpha * (next_plan.position() - now.position());
    const double max_step = cfg.v_max * dt;
    if (step.norm() > max_step)
        step *= max_step / step.norm();
    double turn = alpha * lie::wrap_angle(next_plan.p.z() - now.p.z());
    turn = std::clamp(turn, -cfg.omega_max * dt, cfg.omega_max * dt);
    next.p.head<2>() += step;
    next.p.z() = lie::wrap_angle(now.p.z() + turn);

    next.pdot = now.pdot + alpha * (next_plan.pdot - now.pdot);
    const double speed = next.speed();
    if (speed > cfg.v_max)
        next.pdot.head<2>() *= cfg.v_max / speed;
    next.pdot.z() = std::clamp(next.pdot.z(), -cfg.omega_max, cfg.omega_max);

    chain.current = next;
    set_anchor(g, chain.anchor_current, next);
    g.set_lin_point(chain.states.front(), next.point());
}

void advance_horizon(PlanChain& chain, FactorGraph& g, const Eigen::Vector2d& goal, double dt, const PlanConfig& cfg)
{
    PlanState target = horizon_update(chain.horizon_target, goal, dt, cfg.v_max, cfg.omega_max);
    const double reach = cfg.v_max * cfg.horizon_time;
    const Eigen::Vector2d offset = target.position() - chain.current.position();
    if (offset.norm() > reach)
        target.p.head<2>() = chain.current.position() + offset * (reach / offset.norm());
    chain.horizon_target = target;
    set_anchor(g, chain.anchor_horizon, target);
}

} // namespace swarmgbp::planning
