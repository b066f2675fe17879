#include <doctest.h>

#include "swarmgbp/discrete.hpp"

using namespace swarmgbp;
using namespace swarmgbp::discrete;

TEST_CASE("quantize")
{
    CHECK(DecisionSpace(4).quantize(0.3) == 1);
    CHECK(DecisionSpace(4).quantize(1.0) == 3);
    CHECK(DecisionSpace(2).quantize(0.49) == 0);
    CHECK(DecisionSpace(4).quantize(-0.7) == 0);
    CHECK(DecisionSpace(4).quantize(17.0) == 3);
    CHECK_THROWS_AS(DecisionSpace(1), std::invalid_argument);
}

TEST_CASE("dequantize")
{
    CHECK(DecisionSpace(4).dequantize(2) == 0.5);
    CHECK(DecisionSpace(5).dequantize(0) == 0.0);
    CHECK_THROWS_AS(DecisionSpace(4).dequantize(4), std::invalid_argument);
    CHECK_THROWS_AS(DecisionSpace(4).dequantize(-1), std::invalid_argument);
    for (int n = 2; n <= 64; ++n) {
        const DecisionSpace s(n);
        for (int k = 0; k < n; ++k)
            CHECK(s.quantize(s.dequantize(k)) == k);
    }
}

TEST_CASE("seed robots")
{
    std::mt19937_64 rng(1);
    const DecisionSpace s(4);
    auto count = [](const std::vector<RobotDecisionInit>& r) {
        return std::count_if(r.begin(), r.end(), [](const auto& x) { return x.is_seed; });
    };
    CHECK(count(init_discrete_experiment(500, s, 0.002, 0, 0.1, rng)) == 1);
    CHECK(count(init_discrete_experiment(500, s, 0.01, 0, 0.1, rng)) == 5);
    CHECK(count(init_discrete_experiment(500, s, 0.0, 0, 0.1, rng)) == 0);
    CHECK(seed_count(500, 0.15) == 75);
    CHECK(seed_count(10, 0.05) == 1);

    const auto all = init_discrete_experiment(30, s, 1.0, 2, 0.1, rng);
    for (const auto& r : all) {
        CHECK(r.is_seed);
        CHECK(r.initial_decision == 2);
        CHECK(r.sigma_p == kSeedSigma);
    }
    const auto some = init_discrete_experiment(200, s, 0.1, 3, 0.1, rng);
    for (const auto& r : some) {
        CHECK(r.initial_decision >= 0);
        CHECK(r.initial_decision < 4);
        if (!r.is_seed)
            CHECK(r.sigma_p == 0.1);
    }
    CHECK_THROWS_AS(init_discrete_experiment(10, s, 1.5, 0, 0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(init_discrete_experiment(10, s, 0.5, 4, 0.1, rng), std::invalid_argument);
}

TEST_CASE("exhibited decision")
{
    using lie::ManifoldPoint;
    using lie::Vec;
    const DecisionSpace five(5);
    gbp::FactorGraph g;
    auto w = consensus::init_window(g, 0, ManifoldPoint::scalar(five.dequantize(3)), Vec::Constant(1, 0.1),
                                    Vec::Constant(1, 0.01), 1, 1);
    CHECK(exhibited_decision(w, g, five) == 3);

    // Two robots at options 0 and 1 of two meet at 0.25, which floors to 0.
    const DecisionSpace two(2);
    gbp::FactorGraph pair;
    pair.add_variable(1, ManifoldPoint::scalar(0.0));
    pair.add_variable(2, ManifoldPoint::scalar(0.5));
    pair.add_factor(consensus::make_prior_factor(10, 1, ManifoldPoint::scalar(0.0), Vec::Constant(1, 0.1)));
    pair.add_factor(consensus::make_prior_factor(11, 2, ManifoldPoint::scalar(0.5), Vec::Constant(1, 0.1)));
    const auto k = lie::ManifoldKind::rn(1);
    pair.add_factor(consensus::make_consensus_factor(12, 1, k, 2, k, Vec::Constant(1, 0.25)));
    for (int i = 0; i < 5; ++i)
        pair.iterate();
    const double m1 = (*pair.variable(1).mean_point())[0], m2 = (*pair.variable(2).mean_point())[0];
    // Dense 2x2 solve: symmetric problem, so the pair is centred on 0.25.
    CHECK(m1 + m2 == doctest::Approx(0.5));
    CHECK(two.quantize(m1) == 0);
    CHECK(two.quantize(m2) == 0);

    gbp::FactorGraph blank;
    consensus::ConsensusWindow none;
    CHECK_THROWS_AS(exhibited_decision(none, blank, two), std::runtime_error);
}
