#include "swarmgbp/consensus.hpp"

#include <stdexcept>

namespace swarmgbp::consensus {

namespace {

bool is_angle_component(ManifoldKind kind, int i)
{
    switch (kind.group()) {
    case lie::Group::SO2: return i == 0;
    case lie::Group::SE2: return i == 2;
    case lie::Group::Rn: return false;
    }
    return false;
}

Vec zeros(ManifoldKind kind)
{
    return Vec::Zero(kind.dim());
}

} // namespace

Vec PriorMeasurement::evaluate(std::span<const ManifoldPoint> x) const
{
    return lie::right_minus(x[0], anchor_).value;
}

gbp::JacobianMat PriorMeasurement::jacobian(std::span<const ManifoldPoint> x) const
{
    Mat da, db;
    lie::right_minus_jacobians(x[0], anchor_, da, db);
    return da;
}

bool PriorMeasurement::angular_output(int i) const
{
    return is_angle_component(anchor_.kind(), i);
}

Vec DifferenceMeasurement::evaluate(std::span<const ManifoldPoint> x) const
{
    return lie::right_minus(x[0], x[1]).value;
}

gbp::JacobianMat DifferenceMeasurement::jacobian(std::span<const ManifoldPoint> x) const
{
    Mat da, db;
    lie::right_minus_jacobians(x[0], x[1], da, db);
    const int d = kind_.dim();
    gbp::JacobianMat j(d, 2 * d);
    j.leftCols(d) = da;
    j.rightCols(d) = db;
    return j;
}

bool DifferenceMeasurement::angular_output(int i) const
{
    return is_angle_component(kind_, i);
}

FactorNode make_prior_factor(FactorId id, VarId v, const ManifoldPoint& x0, const Vec& sigma_p)
{
    if (sigma_p.size() != x0.kind().dim())
        throw std::invalid_argument("prior strength has the wrong dimension");
    return gbp::make_factor(id, {v}, {x0.kind()}, zeros(x0.kind()), sigma_p, std::make_shared<PriorMeasurement>(x0));
}

FactorNode make_consensus_factor(FactorId id, VarId vi, ManifoldKind ki, VarId vj, ManifoldKind kj,
                                 const Vec& sigma_c, double damping)
{
    if (ki != kj)
        throw std::invalid_argument("consensus factor joins variables of different kinds");
    if (sigma_c.size() != ki.dim())
        throw std::invalid_argument("consensus strength has the wrong dimension");
    return gbp::make_factor(id, {vi, vj}, {ki, kj}, zeros(ki), sigma_c, std::make_shared<DifferenceMeasurement>(ki),
                            damping);
}

ConsensusWindow init_window(FactorGraph& g, RobotId robot, const ManifoldPoint& x0, const Vec& sigma_p,
                            const Vec& sigma_t, int length, int slide_period)
{
    if (length < 1)
        throw std::invalid_argument("window length must be at least 1");
    if (slide_period < 1)
        throw std::invalid_argument("slide period must be at least 1");
    ConsensusWindow w;
    w.robot = robot;
    w.kind = x0.kind();
    w.length = length;
    w.slide_period = slide_period;
    w.sigma_t = sigma_t;

    for (int k = 0; k < length; ++k) {
        const VarId v = ids::make(ids::Tag::ConsensusVar, robot, 0, w.next_serial++);
        g.add_variable(v, x0);
        w.window.insert(w.window.begin(), v);
    }
    w.marginal_prior = ids::make(ids::Tag::Prior, robot, 0, ids::serial_of(w.oldest()));
    g.add_factor(make_prior_factor(w.marginal_prior, w.oldest(), x0, sigma_p));
    for (int k = 0; k + 1 < length; ++k) {
        const FactorId f = ids::make(ids::Tag::Temporal, robot, 0, ids::serial_of(w.window[k]));
        g.add_factor(make_consensus_factor(f, w.window[k + 1], w.kind, w.window[k], w.kind, sigma_t));
        w.temporal_factors.push_back(f);
    }
    for (int k = 0; k < length; ++k)
        g.iterate();
    return w;
}

SlideResult slide_window(ConsensusWindow& w, FactorGraph& g)
{
    SlideResult out;
    const VarId newest = w.newest();
    const auto& nv = g.variable(newest);
    const ManifoldPoint start = nv.mean_point().value_or(nv.lin_point);

    out.added = ids::make(ids::Tag::ConsensusVar, w.robot, 0, w.next_serial++);
    g.add_variable(out.added, start);
    const FactorId ft = ids::make(ids::Tag::Temporal, w.robot, 0, ids::serial_of(out.added));
    g.add_factor(make_consensus_factor(ft, newest, w.kind, out.added, w.kind, w.sigma_t));
    g.send(ft, 1);
    w.window.insert(w.window.begin(), out.added);
    w.temporal_factors.insert(w.temporal_factors.begin(), ft);

    if (static_cast<int>(w.window.size()) <= w.length)
        return out;

    const VarId old = w.window.back();
    const VarId next = w.window[w.window.size() - 2];
    const FactorId f_old = w.temporal_factors.back();
    const auto msg = g.factor_to_variable_message(g.factor(f_old), 1);
    g.remove_variable(old);
    w.window.pop_back();
    w.temporal_factors.pop_back();
    out.removed = old;

    const ManifoldPoint lin = g.variable(next).lin_point;
    ManifoldPoint anchor = lin;
    Mat precision = Mat::Zero(w.kind.dim(), w.kind.dim());
    if (msg) {
        precision = (msg->lambda + msg->lambda.transpose()) * 0.5;
        if (auto mu = msg->mean())
            anchor = lie::right_plus(lin, *mu);
    }
    w.marginal_prior = ids::make(ids::Tag::MarginalPrior, w.robot, 0, ids::serial_of(next));
    g.add_factor(gbp::make_factor_with_precision(w.marginal_prior, {next}, {w.kind}, zeros(w.kind), precision,
                                                 std::make_shared<PriorMeasurement>(anchor)));
    g.send(w.marginal_prior, 0);
    return out;
}

ConsensusBelief current_consensus_belief(const ConsensusWindow& w, const FactorGraph& g)
{
    if (w.window.empty())
        throw std::runtime_error("consensus layer not initialised");
    const auto& v = g.variable(w.newest());
    auto cov = v.belief.covariance();
    auto mean = v.mean_point();
    if (!cov || !mean)
        throw std::runtime_error("consensus layer not initialised");
    return ConsensusBelief{*mean, *cov};
}

} // namespace swarmgbp::consensus
