#include "swarmgbp/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace swarmgbp::discrete {

DecisionSpace::DecisionSpace(int n) : n_options(n)
{
    if (n < 2)
        throw std::invalid_argument("a decision space needs at least two options");
}

int DecisionSpace::quantize(double x) const
{
    constexpr double kTop = 1.0 - 1e-12;
    if (!(x > 0.0))
        x = 0.0;
    x = std::min(x, kTop);
    return std::min(static_cast<int>(std::floor(n_options * x + 1e-9)), n_options - 1);
}

double DecisionSpace::dequantize(int k) const
{
    if (k < 0 || k >= n_options)
        throw std::invalid_argument("decision index out of range");
    return static_cast<double>(k) / n_options;
}

std::size_t seed_count(std::size_t n_robots, double zeta)
{
    if (!(zeta >= 0.0 && zeta <= 1.0))
        throw std::invalid_argument("seed proportion must lie in [0, 1]");
    const double exact = zeta * static_cast<double>(n_robots);
    return std::min(n_robots, static_cast<std::size_t>(std::ceil(exact - 1e-9)));
}

std::vector<RobotDecisionInit> init_discrete_experiment(std::size_t n_robots, const DecisionSpace& space,
                                                        double zeta, int seed_decision, double sigma_p,
                                                        std::mt19937_64& rng)
{
    space.dequantize(seed_decision);
    const std::size_t seeds = seed_count(n_robots, zeta);
    std::vector<std::size_t> order(n_robots);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::uniform_int_distribution<int> pick(0, space.n_options - 1);
    std::vector<RobotDecisionInit> out(n_robots);
    for (auto& r : out) {
        r.initial_decision = pick(rng);
        r.sigma_p = sigma_p;
    }
    for (std::size_t s = 0; s < seeds; ++s) {
        auto& r = out[order[s]];
        r.is_seed = true;
        r.initial_decision = seed_decision;
        r.sigma_p = kSeedSigma;
    }
    return out;
}

int exhibited_decision(const consensus::ConsensusWindow& w, const gbp::FactorGraph& g, const DecisionSpace& space)
{
    return space.quantize(consensus::current_consensus_belief(w, g).mean[0]);
}

} // namespace swarmgbp::discrete
