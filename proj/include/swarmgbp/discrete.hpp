#pragma once

// Best-of-N decisions carried as R^1 consensus: option k sits at k / N_D on
// [0, 1] and a belief mean is read back by flooring.

#include "swarmgbp/consensus.hpp"

#include <random>
#include <vector>

namespace swarmgbp::discrete {

struct DecisionSpace {
    int n_options = 2;

    /// Throws std::invalid_argument for fewer than two options.
    explicit DecisionSpace(int n);

    /// floor(N_D * x) after clamping x into [0, 1); a 1e-9 slack keeps k / N_D
    /// on option k despite rounding.
    int quantize(double x) const;
    /// k / N_D. Throws std::invalid_argument for k outside [0, N_D).
    double dequantize(int k) const;
};

struct RobotDecisionInit {
    int initial_decision = 0;
    bool is_seed = false;
    double sigma_p = 0.1;
};

inline constexpr double kSeedSigma = 1e-10;

/// ceil(zeta * n) without letting rounding noise add a robot.
std::size_t seed_count(std::size_t n_robots, double zeta);

/// Seeds are a random subset holding `seed_decision`; the rest draw
/// uniformly from the options.
std::vector<RobotDecisionInit> init_discrete_experiment(std::size_t n_robots, const DecisionSpace& space,
                                                        double zeta, int seed_decision, double sigma_p,
                                                        std::mt19937_64& rng);

/// Quantized mean of the newest window variable.
int exhibited_decision(const consensus::ConsensusWindow& w, const gbp::FactorGraph& g, const DecisionSpace& space);

} // namespace swarmgbp::discrete
