#pragma once

// Gaussian belief propagation over factor graphs whose variables live on
// Lie groups. Every message and belief is an information-form Gaussian over
// the tangent space at the receiving variable's linearisation point.
//
// A FactorGraph holds one partition of the global graph (one robot's layer).
// Factors may touch variables owned by another partition; those appear here
// as remote proxies whose lin points and outgoing messages are fed in from a
// mailbox, and messages to them are read back out of the hosting factor.

#include "swarmgbp/lie.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace swarmgbp::gbp {

using lie::ManifoldKind;
using lie::ManifoldPoint;
using lie::Mat;
using lie::Vec;

/// Joint tangent space of a factor: up to two 6-dof variables.
inline constexpr int kMaxJoint = 12;
using JointVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxJoint, 1>;
using JointMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxJoint, kMaxJoint>;
using JacobianMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, lie::kMaxTangent, kMaxJoint>;

using VarId = std::uint64_t;
using FactorId = std::uint64_t;

struct GaussianInfo {
    Vec eta;
    Mat lambda;

    static GaussianInfo zero(int dim);
    int dim() const { return static_cast<int>(eta.size()); }
    bool is_zero() const;

    /// Mean and covariance; nullopt when lambda is not positive definite.
    std::optional<Vec> mean() const;
    std::optional<Mat> covariance() const;

    GaussianInfo& operator+=(const GaussianInfo& o);
    GaussianInfo& operator-=(const GaussianInfo& o);
    friend GaussianInfo operator+(GaussianInfo a, const GaussianInfo& b) { return a += b; }
    friend GaussianInfo operator-(GaussianInfo a, const GaussianInfo& b) { return a -= b; }

    /// Re-express a message held at `from` in the tangent space at `to`,
    /// transporting the tangent frame by identity.
    GaussianInfo rebased(const ManifoldPoint& from, const ManifoldPoint& to) const;
};

/// A measurement function h(X_s) and its Jacobian with respect to right-plus
/// perturbations of each adjacent variable, stacked column-wise.
class Measurement {
public:
    virtual ~Measurement() = default;

    virtual int output_dim() const = 0;
    virtual Vec evaluate(std::span<const ManifoldPoint> x) const = 0;
    virtual JacobianMat jacobian(std::span<const ManifoldPoint> x) const;

    /// Output components holding angles; their residuals are wrapped.
    virtual bool angular_output(int /*i*/) const { return false; }

    Vec residual(const Vec& z, std::span<const ManifoldPoint> x) const;
};

/// Central differences on the tangent space with step 1e-6.
JacobianMat numeric_jacobian(const Measurement& h, std::span<const ManifoldPoint> x, double step = 1e-6);

struct FactorNode {
    FactorId id = 0;
    std::vector<VarId> adjacent;
    std::vector<ManifoldKind> kinds;
    Vec z;
    /// Lambda_s; diag(sigma^-2) for factors built from strengths.
    Mat precision;
    std::shared_ptr<const Measurement> measurement;
    double damping = 0.0;

    /// Last message sent to each adjacent variable, with the lin point it
    /// was expressed at.
    std::vector<std::optional<std::pair<GaussianInfo, ManifoldPoint>>> outgoing;
};

/// Build a factor with Lambda_s = diag(sigma^-2). Throws std::invalid_argument
/// on a non-positive strength, a damping outside [0,1) or mismatched dimensions.
FactorNode make_factor(FactorId id, std::vector<VarId> adjacent, std::vector<ManifoldKind> kinds, Vec z,
                       const Vec& sigma, std::shared_ptr<const Measurement> h, double damping = 0.0);

/// Same as make_factor but with an explicit (possibly dense) precision.
FactorNode make_factor_with_precision(FactorId id, std::vector<VarId> adjacent, std::vector<ManifoldKind> kinds,
                                      Vec z, Mat precision, std::shared_ptr<const Measurement> h,
                                      double damping = 0.0);

struct VariableNode {
    VarId id = 0;
    ManifoldKind kind = ManifoldKind::rn(1);
    ManifoldPoint lin_point = ManifoldPoint::scalar(0.0);
    GaussianInfo belief;
    /// Incoming factor-to-variable messages, in attachment order.
    std::vector<std::pair<FactorId, GaussianInfo>> inbox;

    GaussianInfo* inbox_entry(FactorId f);
    const GaussianInfo* inbox_entry(FactorId f) const;
    /// lin_point (+) mean; nullopt for a non-invertible belief.
    std::optional<ManifoldPoint> mean_point() const;
};

struct RemoteVariable {
    VarId id = 0;
    std::optional<ManifoldPoint> lin_point;
    std::vector<std::pair<FactorId, GaussianInfo>> to_factor;
};

/// Updates `prev` into the message actually sent: (1 - beta) new + beta prev.
GaussianInfo damp(const GaussianInfo& fresh, const GaussianInfo& prev, double beta);

class FactorGraph {
public:
    struct Diagnostics {
        std::uint64_t singular_messages = 0;
        std::uint64_t skipped_relinearizations = 0;
    };

    VariableNode& add_variable(VarId id, const ManifoldPoint& lin_point);
    /// Removes the variable and every locally hosted factor attached to it.
    void remove_variable(VarId id);
    bool has_variable(VarId id) const { return var_index_.contains(id); }
    VariableNode& variable(VarId id);
    const VariableNode& variable(VarId id) const;
    const std::vector<VariableNode>& variables() const { return vars_; }

    /// Adds a hosted factor. Adjacent ids that are not local variables are
    /// treated as remote and get a proxy.
    FactorNode& add_factor(FactorNode f);
    void remove_factor(FactorId id);
    bool has_factor(FactorId id) const { return factor_index_.contains(id); }
    FactorNode& factor(FactorId id);
    const FactorNode& factor(FactorId id) const;
    const std::vector<FactorNode>& factors() const { return factors_; }

    /// Register a factor hosted by another partition as adjacent to a local variable.
    void attach_remote_factor(VarId local, FactorId remote);
    void detach_remote_factor(VarId local, FactorId remote);

    const RemoteVariable* remote(VarId id) const;
    const std::vector<RemoteVariable>& remotes() const { return remotes_; }
    /// Mailbox ingress: a remote variable's lin point and its message to one of our factors.
    void set_remote_message(VarId remote, FactorId f, const GaussianInfo& msg, const ManifoldPoint& lin);
    /// Mailbox ingress: a remote factor's message to a local variable, expressed at `lin`.
    void deliver_message(VarId local, FactorId f, const GaussianInfo& msg, const ManifoldPoint& lin);

    /// Message from factor f to its adjacent variable at position `target`.
    /// Returns nullopt if some adjacent remote variable has not been heard from.
    std::optional<GaussianInfo> factor_to_variable_message(const FactorNode& f, std::size_t target);
    GaussianInfo variable_to_factor_message(VarId v, FactorId f) const;
    const GaussianInfo& update_belief(VarId v);
    void relinearize(VarId v);

    /// Lin point the factor sees for its adjacent variable `slot`.
    std::optional<ManifoldPoint> lin_point_seen_by(const FactorNode& f, std::size_t slot) const;

    /// Compute one factor-to-variable message and, for a local target,
    /// deliver it and refresh that belief. Returns false if it could not be computed.
    bool send(FactorId f, std::size_t target);

    /// One synchronous sweep: every factor sends to every adjacent variable,
    /// then every local belief is updated and (optionally) relinearised.
    void iterate(bool relinearize_variables = true);

    /// Move a lin point and re-express the belief and inbox there.
    void set_lin_point(VarId v, const ManifoldPoint& p);

    /// Overwrite a lin point without rebasing; only valid when the new point
    /// represents the same element (e.g. an angle shifted by 2 pi).
    void set_lin_point_unchecked(VarId v, const ManifoldPoint& p);

    const Diagnostics& diagnostics() const { return diag_; }

private:
    RemoteVariable& remote_mut(VarId id);
    void reindex_variables();
    void reindex_factors();
    void reindex_remotes();

    std::vector<VariableNode> vars_;
    std::vector<FactorNode> factors_;
    std::vector<RemoteVariable> remotes_;
    std::unordered_map<VarId, std::size_t> var_index_;
    std::unordered_map<FactorId, std::size_t> factor_index_;
    std::unordered_map<VarId, std::size_t> remote_index_;
    Diagnostics diag_;
};

} // namespace swarmgbp::gbp
