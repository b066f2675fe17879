#include <doctest.h>

#include "swarmgbp/consensus.hpp"

#include <Eigen/Dense>

#include <numbers>
#include <random>

using namespace swarmgbp;
using namespace swarmgbp::consensus;

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec3(double a, double b, double c)
{
    Vec v(3);
    v << a, b, c;
    return v;
}

Vec vec1(double a)
{
    Vec v(1);
    v << a;
    return v;
}

int prior_factors_on(const FactorGraph& g, VarId v)
{
    int n = 0;
    for (const auto& f : g.factors()) {
        const auto tag = ids::tag_of(f.id);
        if ((tag == ids::Tag::Prior || tag == ids::Tag::MarginalPrior) && f.adjacent.size() == 1 && f.adjacent[0] == v)
            ++n;
    }
    return n;
}

void check_window_shape(const ConsensusWindow& w, const FactorGraph& g)
{
    REQUIRE(static_cast<int>(w.window.size()) == w.length);
    REQUIRE(static_cast<int>(w.temporal_factors.size()) == w.length - 1);
    CHECK(prior_factors_on(g, w.oldest()) == 1);
    for (std::size_t k = 0; k < w.temporal_factors.size(); ++k) {
        const auto& f = g.factor(w.temporal_factors[k]);
        CHECK(f.adjacent == std::vector<VarId>{w.window[k + 1], w.window[k]});
    }
    for (std::size_t k = 0; k + 1 < w.window.size(); ++k)
        CHECK(prior_factors_on(g, w.window[k]) == 0);
}

// Dense oracle for two robots: joint Gaussian over the stacked tangent
// coordinates of two linear variables (prior precision lp, coupling lc).
std::pair<Eigen::VectorXd, Eigen::VectorXd> dense_pair(const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
                                                       const Eigen::VectorXd& lp, const Eigen::VectorXd& lc)
{
    const int d = static_cast<int>(p1.size());
    Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(2 * d);
    lam.topLeftCorner(d, d) += lp.asDiagonal();
    lam.bottomRightCorner(d, d) += lp.asDiagonal();
    eta.head(d) = lp.cwiseProduct(p1);
    eta.tail(d) = lp.cwiseProduct(p2);
    Eigen::MatrixXd a(d, 2 * d);
    a << Eigen::MatrixXd::Identity(d, d), -Eigen::MatrixXd::Identity(d, d);
    lam += a.transpose() * lc.asDiagonal() * a;
    const Eigen::VectorXd mu = lam.ldlt().solve(eta);
    return {mu.head(d), mu.tail(d)};
}

} // namespace

TEST_CASE("prior factor")
{
    const auto x0 = ManifoldPoint::se2(1, -2, 0.4);
    const auto f = make_prior_factor(1, 10, x0, vec3(10, 10, kPi));
    const std::vector<ManifoldPoint> at{x0};
    CHECK(f.measurement->residual(f.z, at).norm() == 0.0);

    Mat expect = Mat::Zero(3, 3);
    expect.diagonal() << 0.01, 0.01, 1.0 / (kPi * kPi);
    CHECK((f.precision - expect).cwiseAbs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(make_prior_factor(1, 10, x0, vec3(10, 0, kPi)), std::invalid_argument);
    CHECK_THROWS_AS(make_prior_factor(1, 10, x0, vec3(10, -1, kPi)), std::invalid_argument);
}

TEST_CASE("single variable with a prior has the prior as belief")
{
    FactorGraph g;
    const auto x0 = ManifoldPoint::se2(3, 4, -2.5);
    // Linearise away from x0 so the solve has work to do.
    g.add_variable(1, ManifoldPoint::se2(2.5, 4.3, -2.3));
    g.add_factor(make_prior_factor(2, 1, x0, vec3(2, 3, 0.5)));
    for (int i = 0; i < 5; ++i)
        g.iterate();
    const auto& v = g.variable(1);
    CHECK(lie::right_minus(*v.mean_point(), x0).norm() < 1e-12);
    Mat cov = *v.belief.covariance();
    CHECK(cov(0, 0) == doctest::Approx(4.0));
    CHECK(cov(1, 1) == doctest::Approx(9.0));
    CHECK(cov(2, 2) == doctest::Approx(0.25));
}

TEST_CASE("consensus factor")
{
    const auto k = lie::ManifoldKind::se2();
    const auto f = make_consensus_factor(1, 10, k, 11, k, vec3(0.1, 0.1, 0.03));
    const auto x = ManifoldPoint::se2(-1, 7, 3.0);
    const std::vector<ManifoldPoint> same{x, x};
    CHECK(f.measurement->residual(f.z, same).norm() == 0.0);
    CHECK_THROWS_AS(make_consensus_factor(1, 10, k, 11, lie::ManifoldKind::so2(), vec3(1, 1, 1)),
                    std::invalid_argument);

    // Analytic Jacobians agree with central differences.
    const std::vector<ManifoldPoint> pair{ManifoldPoint::se2(1, 2, 0.7), ManifoldPoint::se2(-3, 0.5, -2.9)};
    const Eigen::MatrixXd analytic = f.measurement->jacobian(pair);
    const Eigen::MatrixXd numeric = gbp::numeric_jacobian(*f.measurement, pair);
    CHECK((analytic - numeric).cwiseAbs().maxCoeff() < 1e-5 * analytic.cwiseAbs().maxCoeff());
}

TEST_CASE("two SE2 robots agree on the midpoint")
{
    const auto k = lie::ManifoldKind::se2();
    const Vec sp = vec3(10, 10, kPi);
    for (double scale : {0.5, 0.01}) {
        const Vec sc = sp * scale;
        FactorGraph g;
        g.add_variable(1, ManifoldPoint::se2(0, 0, 0));
        g.add_variable(2, ManifoldPoint::se2(2, 0, 0));
        g.add_factor(make_prior_factor(10, 1, ManifoldPoint::se2(0, 0, 0), sp));
        g.add_factor(make_prior_factor(11, 2, ManifoldPoint::se2(2, 0, 0), sp));
        g.add_factor(make_consensus_factor(12, 1, k, 2, k, sc));
        for (int i = 0; i < 20; ++i)
            g.iterate();

        Eigen::VectorXd p1(3), p2(3);
        p1 << 0, 0, 0;
        p2 << 2, 0, 0;
        const auto [m1, m2] = dense_pair(p1, p2, sp.array().pow(-2), sc.array().pow(-2));
        const auto b1 = *g.variable(1).mean_point();
        const auto b2 = *g.variable(2).mean_point();
        for (int i = 0; i < 3; ++i) {
            CHECK(b1[i] == doctest::Approx(m1[i]).epsilon(1e-9));
            CHECK(b2[i] == doctest::Approx(m2[i]).epsilon(1e-9));
        }
        if (scale < 0.1) {
            CHECK(std::abs(b1[0] - 1.0) < 1e-3);
            CHECK(std::abs(b2[0] - 1.0) < 1e-3);
        }
    }
}

TEST_CASE("SO2 consensus takes the geodesic midpoint across the wrap")
{
    const auto k = lie::ManifoldKind::so2();
    const double deg = kPi / 180.0;
    FactorGraph g;
    g.add_variable(1, ManifoldPoint::so2(170 * deg));
    g.add_variable(2, ManifoldPoint::so2(-170 * deg));
    g.add_factor(make_prior_factor(10, 1, ManifoldPoint::so2(170 * deg), vec1(kPi)));
    g.add_factor(make_prior_factor(11, 2, ManifoldPoint::so2(-170 * deg), vec1(kPi)));
    g.add_factor(make_consensus_factor(12, 1, k, 2, k, vec1(0.01 * kPi)));
    for (int i = 0; i < 20; ++i)
        g.iterate();

    // Tangent-space oracle: average the offsets from one endpoint, then map back.
    const double offset = lie::right_minus(ManifoldPoint::so2(-170 * deg), ManifoldPoint::so2(170 * deg)).value[0];
    const double midpoint = lie::wrap_angle(170 * deg + offset / 2);
    CHECK(std::abs(midpoint) == doctest::Approx(kPi));
    for (VarId v : {1u, 2u}) {
        const double th = (*g.variable(v).mean_point())[0];
        CHECK(std::abs(lie::wrap_angle(th - midpoint)) < 0.01);
        CHECK(std::abs(th) > 3.0);
    }
}

TEST_CASE("window initialisation")
{
    for (int length : {1, 2, 3, 5}) {
        FactorGraph g;
        const auto x0 = ManifoldPoint::se2(5, 6, 1.0);
        auto w = init_window(g, 7, x0, vec3(10, 10, kPi), vec3(1, 1, 0.1 * kPi), length, 1);
        check_window_shape(w, g);
        const auto b = current_consensus_belief(w, g);
        CHECK(lie::right_minus(b.mean, x0).norm() < 1e-12);
        CHECK((b.covariance - b.covariance.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(b.covariance));
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
    FactorGraph g;
    CHECK_THROWS_AS(init_window(g, 1, ManifoldPoint::scalar(0), vec1(1), vec1(1), 0, 1), std::invalid_argument);
}

TEST_CASE("an uninitialised window has no belief")
{
    FactorGraph g;
    ConsensusWindow w;
    CHECK_THROWS_AS(current_consensus_belief(w, g), std::runtime_error);
    g.add_variable(1, ManifoldPoint::scalar(0));
    w.window.push_back(1);
    CHECK_THROWS_AS(current_consensus_belief(w, g), std::runtime_error);
}

TEST_CASE("isolated sliding keeps the mean and widens the covariance")
{
    for (int length : {1, 2, 3, 5}) {
        FactorGraph g;
        const auto x0 = ManifoldPoint::se2(-20, 13, 2.9);
        auto w = init_window(g, 3, x0, vec3(10, 10, kPi), vec3(1, 1, 0.1 * kPi), length, 1);
        double trace = current_consensus_belief(w, g).covariance.trace();
        for (int s = 0; s < 3 * length + 2; ++s) {
            const auto before = current_consensus_belief(w, g);
            const auto r = slide_window(w, g);
            CHECK(r.removed.has_value());
            check_window_shape(w, g);
            const auto after = current_consensus_belief(w, g);
            CHECK(lie::right_minus(after.mean, before.mean).norm() < 1e-9);
            for (int i = 0; i < 2; ++i)
                g.iterate();
            const auto settled = current_consensus_belief(w, g);
            CHECK(lie::right_minus(settled.mean, x0).norm() < 1e-9);
            CHECK(settled.covariance.trace() >= trace - 1e-9);
            trace = settled.covariance.trace();
        }
    }
}

TEST_CASE("a one-slot window refreshes its prior at the current mean")
{
    FactorGraph g;
    auto w = init_window(g, 1, ManifoldPoint::scalar(0.3), vec1(0.1), vec1(0.01), 1, 1);
    const auto first = w.marginal_prior;
    const auto r = slide_window(w, g);
    REQUIRE(r.removed.has_value());
    CHECK(*r.removed != w.newest());
    CHECK(w.marginal_prior != first);
    const auto& prior = dynamic_cast<const PriorMeasurement&>(*g.factor(w.marginal_prior).measurement);
    CHECK(prior.anchor()[0] == doctest::Approx(0.3));
    // Precision of N(0.3, 0.1^2 + 0.01^2).
    CHECK(g.factor(w.marginal_prior).precision(0, 0) == doctest::Approx(1.0 / (0.01 + 0.0001)));
    CHECK(g.variables().size() == 1);
    CHECK(g.factors().size() == 1);
}

TEST_CASE("sliding keeps the newest mean after outside information arrives")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 20; ++trial) {
        FactorGraph g;
        auto w = init_window(g, 1, ManifoldPoint::se2(u(rng), u(rng), u(rng) / 2), vec3(10, 10, kPi),
                             vec3(1, 1, 0.1 * kPi), 3, 1);
        // An extra pull on the newest variable plays the role of a neighbour.
        g.add_factor(make_prior_factor(999, w.newest(), ManifoldPoint::se2(u(rng), u(rng), u(rng) / 2),
                                       vec3(0.5, 0.5, 0.1)));
        for (int i = 0; i < 4; ++i)
            g.iterate();
        const auto before = current_consensus_belief(w, g);
        slide_window(w, g);
        CHECK(lie::right_minus(current_consensus_belief(w, g).mean, before.mean).norm() < 1e-9);
    }
}
