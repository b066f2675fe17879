#pragma once

// Global consensus layer: each robot holds a sliding window of variables on
// a Lie group, tied to its prior belief and (through the simulator) to the
// same-slot variables of its neighbours.

#include "swarmgbp/gbp.hpp"
#include "swarmgbp/ids.hpp"

#include <optional>
#include <vector>

namespace swarmgbp::consensus {

using gbp::FactorGraph;
using gbp::FactorId;
using gbp::FactorNode;
using gbp::VarId;
using lie::ManifoldKind;
using lie::ManifoldPoint;
using lie::Mat;
using lie::Vec;

/// h(X) = X (-) anchor.
class PriorMeasurement final : public gbp::Measurement {
public:
    explicit PriorMeasurement(ManifoldPoint anchor) : anchor_(std::move(anchor)) {}

    int output_dim() const override { return anchor_.kind().dim(); }
    Vec evaluate(std::span<const ManifoldPoint> x) const override;
    gbp::JacobianMat jacobian(std::span<const ManifoldPoint> x) const override;
    bool angular_output(int i) const override;

    const ManifoldPoint& anchor() const { return anchor_; }

private:
    ManifoldPoint anchor_;
};

/// h(X_a, X_b) = X_a (-) X_b. Used for both inter-robot and temporal factors.
class DifferenceMeasurement final : public gbp::Measurement {
public:
    explicit DifferenceMeasurement(ManifoldKind kind) : kind_(kind) {}

    int output_dim() const override { return kind_.dim(); }
    Vec evaluate(std::span<const ManifoldPoint> x) const override;
    gbp::JacobianMat jacobian(std::span<const ManifoldPoint> x) const override;
    bool angular_output(int i) const override;

private:
    ManifoldKind kind_;
};

/// Throws std::invalid_argument on a non-positive strength.
FactorNode make_prior_factor(FactorId id, VarId v, const ManifoldPoint& x0, const Vec& sigma_p);

/// Throws std::invalid_argument when the kinds differ.
FactorNode make_consensus_factor(FactorId id, VarId vi, ManifoldKind ki, VarId vj, ManifoldKind kj,
                                 const Vec& sigma_c, double damping = 0.0);

struct ConsensusWindow {
    RobotId robot = 0;
    ManifoldKind kind = ManifoldKind::rn(1);
    /// Newest first.
    std::vector<VarId> window;
    /// temporal_factors[k] joins window[k + 1] (older) to window[k].
    std::vector<FactorId> temporal_factors;
    /// The single prior-type factor on the oldest variable.
    FactorId marginal_prior = 0;
    int length = 1;
    int slide_period = 1;
    Vec sigma_t;
    std::uint32_t next_serial = 0;

    VarId newest() const { return window.front(); }
    VarId oldest() const { return window.back(); }
};

/// W variables at x0, the prior on the oldest and temporal factors between
/// them, followed by W local sweeps so every belief is proper.
ConsensusWindow init_window(FactorGraph& g, RobotId robot, const ManifoldPoint& x0, const Vec& sigma_p,
                            const Vec& sigma_t, int length, int slide_period);

struct SlideResult {
    VarId added = 0;
    std::optional<VarId> removed;
};

/// Prepend a variable at the newest mean; if the window overflows, fold the
/// oldest variable into a prior on its successor and delete it.
SlideResult slide_window(ConsensusWindow& w, FactorGraph& g);

struct ConsensusBelief {
    ManifoldPoint mean;
    Mat covariance;
};

/// Belief of the newest variable. Throws std::runtime_error if it carries
/// no usable information yet.
ConsensusBelief current_consensus_belief(const ConsensusWindow& w, const FactorGraph& g);

} // namespace swarmgbp::consensus
