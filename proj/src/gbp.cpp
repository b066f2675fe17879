#include "swarmgbp/gbp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace swarmgbp::gbp {

namespace {

constexpr double kJitter = 1e-12;

using OtherMat = JointMat;

template <typename Entries>
auto find_entry(Entries& entries, FactorId f) -> decltype(&entries.front().second)
{
    for (auto& [id, msg] : entries)
        if (id == f)
            return &msg;
    return nullptr;
}

} // namespace

// ---------------------------------------------------------------------------
// GaussianInfo

GaussianInfo GaussianInfo::zero(int dim)
{
    return GaussianInfo{Vec::Zero(dim), Mat::Zero(dim, dim)};
}

bool GaussianInfo::is_zero() const
{
    return eta.isZero(0.0) && lambda.isZero(0.0);
}

std::optional<Vec> GaussianInfo::mean() const
{
    if (dim() == 0)
        return std::nullopt;
    Eigen::LLT<Mat> llt(lambda);
    if (llt.info() != Eigen::Success)
        return std::nullopt;
    Vec mu = llt.solve(eta);
    if (!mu.allFinite())
        return std::nullopt;
    return mu;
}

std::optional<Mat> GaussianInfo::covariance() const
{
    if (dim() == 0)
        return std::nullopt;
    Eigen::LLT<Mat> llt(lambda);
    if (llt.info() != Eigen::Success)
        return std::nullopt;
    Mat cov = llt.solve(Mat::Identity(dim(), dim()));
    if (!cov.allFinite())
        return std::nullopt;
    return Mat((cov + cov.transpose()) * 0.5);
}

GaussianInfo& GaussianInfo::operator+=(const GaussianInfo& o)
{
    eta += o.eta;
    lambda += o.lambda;
    return *this;
}

GaussianInfo& GaussianInfo::operator-=(const GaussianInfo& o)
{
    eta -= o.eta;
    lambda -= o.lambda;
    return *this;
}

GaussianInfo GaussianInfo::rebased(const ManifoldPoint& from, const ManifoldPoint& to) const
{
    if (from.kind() != to.kind())
        throw std::invalid_argument("rebased: kind mismatch");
    const Vec shift = lie::right_minus(to, from).value;
    if (shift.isZero(0.0))
        return *this;
    GaussianInfo out = *this;
    out.eta -= lambda * shift;
    return out;
}

GaussianInfo damp(const GaussianInfo& fresh, const GaussianInfo& prev, double beta)
{
    if (beta == 0.0)
        return fresh;
    return GaussianInfo{(1.0 - beta) * fresh.eta + beta * prev.eta, (1.0 - beta) * fresh.lambda + beta * prev.lambda};
}

// ---------------------------------------------------------------------------
// Measurement

JacobianMat Measurement::jacobian(std::span<const ManifoldPoint> x) const
{
    return numeric_jacobian(*this, x);
}

Vec Measurement::residual(const Vec& z, std::span<const ManifoldPoint> x) const
{
    Vec r = z - evaluate(x);
    for (int i = 0; i < r.size(); ++i)
        if (angular_output(i))
            r[i] = lie::wrap_angle(r[i]);
    return r;
}

JacobianMat numeric_jacobian(const Measurement& h, std::span<const ManifoldPoint> x, double step)
{
    int cols = 0;
    for (const auto& p : x)
        cols += p.kind().dim();
    const int rows = h.output_dim();
    JacobianMat jac = JacobianMat::Zero(rows, cols);

    std::vector<ManifoldPoint> probe(x.begin(), x.end());
    int col = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const int d = x[k].kind().dim();
        for (int e = 0; e < d; ++e, ++col) {
            Vec delta = Vec::Zero(d);
            delta[e] = step;
            probe[k] = lie::right_plus(x[k], delta);
            const Vec hp = h.evaluate(probe);
            probe[k] = lie::right_plus(x[k], -delta);
            const Vec hm = h.evaluate(probe);
            probe[k] = x[k];
            for (int i = 0; i < rows; ++i) {
                double diff = hp[i] - hm[i];
                if (h.angular_output(i))
                    diff = lie::wrap_angle(diff);
                jac(i, col) = diff / (2.0 * step);
            }
        }
    }
    return jac;
}

// ---------------------------------------------------------------------------
// Factor construction

FactorNode make_factor_with_precision(FactorId id, std::vector<VarId> adjacent, std::vector<ManifoldKind> kinds,
                                      Vec z, Mat precision, std::shared_ptr<const Measurement> h, double damping)
{
    if (!h)
        throw std::invalid_argument("factor needs a measurement function");
    if (adjacent.empty() || adjacent.size() != kinds.size())
        throw std::invalid_argument("factor adjacency and kinds disagree");
    if (z.size() != h->output_dim() || precision.rows() != h->output_dim() || precision.cols() != h->output_dim())
        throw std::invalid_argument("measurement output dimension does not match z / precision");
    if (!(damping >= 0.0 && damping < 1.0))
        throw std::invalid_argument("damping must lie in [0, 1)");
    int joint = 0;
    for (auto k : kinds)
        joint += k.dim();
    if (joint > kMaxJoint)
        throw std::invalid_argument("factor joint dimension exceeds " + std::to_string(kMaxJoint));

    FactorNode f;
    f.id = id;
    f.outgoing.resize(adjacent.size());
    f.adjacent = std::move(adjacent);
    f.kinds = std::move(kinds);
    f.z = std::move(z);
    f.precision = std::move(precision);
    f.measurement = std::move(h);
    f.damping = damping;
    return f;
}

FactorNode make_factor(FactorId id, std::vector<VarId> adjacent, std::vector<ManifoldKind> kinds, Vec z,
                       const Vec& sigma, std::shared_ptr<const Measurement> h, double damping)
{
    if (sigma.size() == 0 || (sigma.array() <= 0.0).any() || !sigma.allFinite())
        throw std::invalid_argument("factor strengths must be positive");
    Mat precision = sigma.array().pow(-2.0).matrix().asDiagonal();
    return make_factor_with_precision(id, std::move(adjacent), std::move(kinds), std::move(z), std::move(precision),
                                      std::move(h), damping);
}

// ---------------------------------------------------------------------------
// VariableNode

GaussianInfo* VariableNode::inbox_entry(FactorId f)
{
    return find_entry(inbox, f);
}

const GaussianInfo* VariableNode::inbox_entry(FactorId f) const
{
    for (const auto& [id, msg] : inbox)
        if (id == f)
            return &msg;
    return nullptr;
}

std::optional<ManifoldPoint> VariableNode::mean_point() const
{
    auto mu = belief.mean();
    if (!mu)
        return std::nullopt;
    return lie::right_plus(lin_point, *mu);
}

// ---------------------------------------------------------------------------
// FactorGraph: structure

VariableNode& FactorGraph::add_variable(VarId id, const ManifoldPoint& lin_point)
{
    if (has_variable(id))
        throw std::invalid_argument("duplicate variable id " + std::to_string(id));
    VariableNode v;
    v.id = id;
    v.kind = lin_point.kind();
    v.lin_point = lin_point;
    v.belief = GaussianInfo::zero(v.kind.dim());
    var_index_[id] = vars_.size();
    vars_.push_back(std::move(v));
    return vars_.back();
}

void FactorGraph::remove_variable(VarId id)
{
    auto it = var_index_.find(id);
    if (it == var_index_.end())
        return;
    std::vector<FactorId> attached;
    for (const auto& f : factors_)
        if (std::find(f.adjacent.begin(), f.adjacent.end(), id) != f.adjacent.end())
            attached.push_back(f.id);
    for (auto f : attached)
        remove_factor(f);
    vars_.erase(vars_.begin() + static_cast<std::ptrdiff_t>(var_index_.at(id)));
    reindex_variables();
}

VariableNode& FactorGraph::variable(VarId id)
{
    auto it = var_index_.find(id);
    if (it == var_index_.end())
        throw std::out_of_range("unknown variable " + std::to_string(id));
    return vars_[it->second];
}

const VariableNode& FactorGraph::variable(VarId id) const
{
    auto it = var_index_.find(id);
    if (it == var_index_.end())
        throw std::out_of_range("unknown variable " + std::to_string(id));
    return vars_[it->second];
}

FactorNode& FactorGraph::add_factor(FactorNode f)
{
    if (has_factor(f.id))
        throw std::invalid_argument("duplicate factor id " + std::to_string(f.id));
    for (std::size_t k = 0; k < f.adjacent.size(); ++k) {
        const VarId v = f.adjacent[k];
        if (has_variable(v)) {
            auto& var = variable(v);
            if (var.kind != f.kinds[k])
                throw std::invalid_argument("factor kind does not match variable " + std::to_string(v));
            if (!var.inbox_entry(f.id))
                var.inbox.emplace_back(f.id, GaussianInfo::zero(var.kind.dim()));
        } else {
            auto& proxy = remote_mut(v);
            if (!find_entry(proxy.to_factor, f.id))
                proxy.to_factor.emplace_back(f.id, GaussianInfo::zero(f.kinds[k].dim()));
        }
    }
    factor_index_[f.id] = factors_.size();
    factors_.push_back(std::move(f));
    return factors_.back();
}

void FactorGraph::remove_factor(FactorId id)
{
    auto it = factor_index_.find(id);
    if (it == factor_index_.end())
        return;
    const FactorNode& f = factors_[it->second];
    for (VarId v : f.adjacent) {
        if (has_variable(v)) {
            auto& inbox = variable(v).inbox;
            inbox.erase(std::remove_if(inbox.begin(), inbox.end(), [&](const auto& e) { return e.first == id; }),
                        inbox.end());
        } else {
            if (auto rit = remote_index_.find(v); rit != remote_index_.end()) {
                auto& links = remotes_[rit->second].to_factor;
                links.erase(std::remove_if(links.begin(), links.end(), [&](const auto& e) { return e.first == id; }),
                            links.end());
                if (links.empty()) {
                    remotes_.erase(remotes_.begin() + static_cast<std::ptrdiff_t>(rit->second));
                    reindex_remotes();
                }
            }
        }
    }
    factors_.erase(factors_.begin() + static_cast<std::ptrdiff_t>(it->second));
    reindex_factors();
}

FactorNode& FactorGraph::factor(FactorId id)
{
    auto it = factor_index_.find(id);
    if (it == factor_index_.end())
        throw std::out_of_range("unknown factor " + std::to_string(id));
    return factors_[it->second];
}

const FactorNode& FactorGraph::factor(FactorId id) const
{
    auto it = factor_index_.find(id);
    if (it == factor_index_.end())
        throw std::out_of_range("unknown factor " + std::to_string(id));
    return factors_[it->second];
}

void FactorGraph::attach_remote_factor(VarId local, FactorId remote)
{
    auto& var = variable(local);
    if (!var.inbox_entry(remote))
        var.inbox.emplace_back(remote, GaussianInfo::zero(var.kind.dim()));
}

void FactorGraph::detach_remote_factor(VarId local, FactorId remote)
{
    if (!has_variable(local))
        return;
    auto& inbox = variable(local).inbox;
    inbox.erase(std::remove_if(inbox.begin(), inbox.end(), [&](const auto& e) { return e.first == remote; }),
                inbox.end());
}

const RemoteVariable* FactorGraph::remote(VarId id) const
{
    auto it = remote_index_.find(id);
    return it == remote_index_.end() ? nullptr : &remotes_[it->second];
}

RemoteVariable& FactorGraph::remote_mut(VarId id)
{
    if (auto it = remote_index_.find(id); it != remote_index_.end())
        return remotes_[it->second];
    remote_index_.emplace(id, remotes_.size());
    remotes_.push_back(RemoteVariable{id, std::nullopt, {}});
    return remotes_.back();
}

void FactorGraph::reindex_remotes()
{
    remote_index_.clear();
    for (std::size_t i = 0; i < remotes_.size(); ++i)
        remote_index_.emplace(remotes_[i].id, i);
}

void FactorGraph::set_remote_message(VarId remote, FactorId f, const GaussianInfo& msg, const ManifoldPoint& lin)
{
    auto it = remote_index_.find(remote);
    if (it == remote_index_.end())
        return;
    auto& r = remotes_[it->second];
    if (auto* slot = find_entry(r.to_factor, f)) {
        *slot = msg;
        r.lin_point = lin;
    }
}

void FactorGraph::deliver_message(VarId local, FactorId f, const GaussianInfo& msg, const ManifoldPoint& lin)
{
    if (!has_variable(local))
        return;
    auto& var = variable(local);
    if (auto* slot = var.inbox_entry(f))
        *slot = msg.rebased(lin, var.lin_point);
}

void FactorGraph::set_lin_point(VarId v, const ManifoldPoint& p)
{
    auto& var = variable(v);
    if (p.kind() != var.kind)
        throw std::invalid_argument("set_lin_point: kind mismatch");
    for (auto& [fid, msg] : var.inbox)
        msg = msg.rebased(var.lin_point, p);
    var.belief = var.belief.rebased(var.lin_point, p);
    var.lin_point = p;
}

void FactorGraph::set_lin_point_unchecked(VarId v, const ManifoldPoint& p)
{
    auto& var = variable(v);
    if (p.kind() != var.kind)
        throw std::invalid_argument("set_lin_point_unchecked: kind mismatch");
    var.lin_point = p;
}

void FactorGraph::reindex_variables()
{
    var_index_.clear();
    for (std::size_t i = 0; i < vars_.size(); ++i)
        var_index_[vars_[i].id] = i;
}

void FactorGraph::reindex_factors()
{
    factor_index_.clear();
    for (std::size_t i = 0; i < factors_.size(); ++i)
        factor_index_[factors_[i].id] = i;
}

// ---------------------------------------------------------------------------
// FactorGraph: message passing

std::optional<ManifoldPoint> FactorGraph::lin_point_seen_by(const FactorNode& f, std::size_t slot) const
{
    const VarId v = f.adjacent[slot];
    if (auto it = var_index_.find(v); it != var_index_.end())
        return vars_[it->second].lin_point;
    if (const auto* r = remote(v))
        return r->lin_point;
    return std::nullopt;
}

GaussianInfo FactorGraph::variable_to_factor_message(VarId v, FactorId f) const
{
    const auto& var = variable(v);
    const auto* in = var.inbox_entry(f);
    if (!in)
        throw std::invalid_argument("variable " + std::to_string(v) + " is not adjacent to factor " +
                                    std::to_string(f));
    return var.belief - *in;
}

std::optional<GaussianInfo> FactorGraph::factor_to_variable_message(const FactorNode& f, std::size_t target)
{
    const std::size_t n = f.adjacent.size();
    std::vector<ManifoldPoint> lins;
    lins.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto lp = lin_point_seen_by(f, k);
        if (!lp)
            return std::nullopt;
        lins.push_back(*lp);
    }

    std::array<int, kMaxJoint + 1> offset{};
    for (std::size_t k = 0; k < n; ++k)
        offset[k + 1] = offset[k] + f.kinds[k].dim();
    const int joint = offset[n];

    // Factor potential in the joint tangent space at the lin points.
    const JacobianMat jac = f.measurement->jacobian(lins);
    const Vec r = f.measurement->residual(f.z, lins);
    const JacobianMat pj = f.precision * jac;
    JointMat lam = jac.transpose() * pj;
    JointVec eta = pj.transpose() * r;

    for (std::size_t k = 0; k < n; ++k) {
        if (k == target)
            continue;
        const VarId v = f.adjacent[k];
        const int o = offset[k], d = f.kinds[k].dim();
        if (auto it = var_index_.find(v); it != var_index_.end()) {
            const auto& var = vars_[it->second];
            const auto* in = var.inbox_entry(f.id);
            eta.segment(o, d) += var.belief.eta - in->eta;
            lam.block(o, o, d, d) += var.belief.lambda - in->lambda;
        } else if (const auto* rv = remote(v)) {
            for (const auto& [fid, msg] : rv->to_factor) {
                if (fid == f.id) {
                    eta.segment(o, d) += msg.eta;
                    lam.block(o, o, d, d) += msg.lambda;
                    break;
                }
            }
        }
    }

    const int to = offset[target], td = f.kinds[target].dim();
    const ManifoldPoint& target_lin = lins[target];

    auto previous = [&]() {
        const auto& prev = f.outgoing[target];
        if (!prev)
            return GaussianInfo::zero(td);
        return prev->first.rebased(prev->second, target_lin);
    };

    GaussianInfo fresh;
    if (n == 1) {
        fresh = GaussianInfo{eta.head(td), lam.topLeftCorner(td, td)};
    } else {
        // Schur complement onto the target block.
        const int od = joint - td;
        std::array<int, kMaxJoint> others{};
        int m = 0;
        for (int i = 0; i < joint; ++i)
            if (i < to || i >= to + td)
                others[m++] = i;

        OtherMat loo(od, od);
        JointMat lto(td, od);
        JointVec eo(od);
        for (int a = 0; a < od; ++a) {
            eo[a] = eta[others[a]];
            for (int b = 0; b < od; ++b)
                loo(a, b) = lam(others[a], others[b]);
            for (int t = 0; t < td; ++t)
                lto(t, a) = lam(to + t, others[a]);
        }

        Eigen::LLT<OtherMat> llt(loo);
        if (llt.info() != Eigen::Success) {
            loo.diagonal().array() += kJitter;
            llt.compute(loo);
        }
        if (llt.info() != Eigen::Success) {
            ++diag_.singular_messages;
            return previous();
        }
        const JointMat solved_l = llt.solve(lto.transpose());
        const JointVec solved_e = llt.solve(eo);
        Mat lam_t = lam.block(to, to, td, td) - lto * solved_l;
        Vec eta_t = eta.segment(to, td) - lto * solved_e;
        if (!lam_t.allFinite() || !eta_t.allFinite()) {
            ++diag_.singular_messages;
            return previous();
        }
        fresh = GaussianInfo{eta_t, Mat((lam_t + lam_t.transpose()) * 0.5)};
    }

    if (f.damping > 0.0 && f.outgoing[target])
        return damp(fresh, previous(), f.damping);
    return fresh;
}

const GaussianInfo& FactorGraph::update_belief(VarId v)
{
    auto& var = variable(v);
    GaussianInfo b = GaussianInfo::zero(var.kind.dim());
    for (const auto& [fid, msg] : var.inbox)
        b += msg;
    var.belief = std::move(b);
    return var.belief;
}

void FactorGraph::relinearize(VarId v)
{
    auto& var = variable(v);
    if (var.belief.lambda.isZero(0.0)) {
        ++diag_.skipped_relinearizations;
        return;
    }
    auto mu = var.belief.mean();
    if (!mu) {
        ++diag_.skipped_relinearizations;
        return;
    }
    if (mu->isZero(0.0))
        return;
    var.lin_point = lie::right_plus(var.lin_point, *mu);
    for (auto& [fid, msg] : var.inbox)
        msg.eta -= msg.lambda * *mu;
    var.belief.eta -= var.belief.lambda * *mu;
}

bool FactorGraph::send(FactorId fid, std::size_t target)
{
    auto& f = factor(fid);
    auto msg = factor_to_variable_message(f, target);
    if (!msg)
        return false;
    f.outgoing[target] = std::make_pair(*msg, *lin_point_seen_by(f, target));
    const VarId v = f.adjacent[target];
    if (has_variable(v)) {
        *variable(v).inbox_entry(fid) = *msg;
        update_belief(v);
    }
    return true;
}

void FactorGraph::iterate(bool relinearize_variables)
{
    std::vector<std::vector<std::optional<GaussianInfo>>> fresh(factors_.size());
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        const auto& f = factors_[i];
        fresh[i].resize(f.adjacent.size());
        for (std::size_t k = 0; k < f.adjacent.size(); ++k)
            fresh[i][k] = factor_to_variable_message(f, k);
    }
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        auto& f = factors_[i];
        for (std::size_t k = 0; k < f.adjacent.size(); ++k) {
            if (!fresh[i][k])
                continue;
            auto lin = lin_point_seen_by(f, k);
            f.outgoing[k] = std::make_pair(*fresh[i][k], *lin);
            if (auto it = var_index_.find(f.adjacent[k]); it != var_index_.end())
                *vars_[it->second].inbox_entry(f.id) = *fresh[i][k];
        }
    }
    for (auto& var : vars_) {
        update_belief(var.id);
        if (relinearize_variables)
            relinearize(var.id);
    }
}

} // namespace swarmgbp::gbp
