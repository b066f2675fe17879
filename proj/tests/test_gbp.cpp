#include <doctest.h>

#include "linear_oracle.hpp"
#include "swarmgbp/gbp.hpp"

#include <Eigen/Dense>

#include <random>

using namespace swarmgbp;
using namespace swarmgbp::gbp;
using swarmgbp::testing::LinearMeasurement;

namespace {

Vec vec1(double a)
{
    Vec v(1);
    v << a;
    return v;
}

Eigen::MatrixXd mat1(double a)
{
    return Eigen::MatrixXd::Constant(1, 1, a);
}

std::shared_ptr<LinearMeasurement> unary_identity(int d)
{
    return std::make_shared<LinearMeasurement>(std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Identity(d, d)});
}

std::shared_ptr<LinearMeasurement> difference(int d)
{
    return std::make_shared<LinearMeasurement>(
        std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Identity(d, d), -Eigen::MatrixXd::Identity(d, d)});
}

GaussianInfo info(double eta, double lambda)
{
    GaussianInfo g = GaussianInfo::zero(1);
    g.eta[0] = eta;
    g.lambda(0, 0) = lambda;
    return g;
}

double absolute_mean(const FactorGraph& g, VarId v)
{
    const auto& var = g.variable(v);
    return var.lin_point[0] + var.belief.mean().value()[0];
}

} // namespace

TEST_CASE("unary factor message is the factor potential")
{
    FactorGraph g;
    g.add_variable(1, lie::ManifoldPoint::scalar(0.5));
    auto& f = g.add_factor(make_factor(10, {1}, {lie::ManifoldKind::rn(1)}, vec1(2.0), vec1(0.5), unary_identity(1)));
    const auto msg = g.factor_to_variable_message(f, 0).value();
    // J = 1, Lambda_s = 4, r = 2 - 0.5.
    CHECK(msg.lambda(0, 0) == doctest::Approx(4.0));
    CHECK(msg.eta[0] == doctest::Approx(4.0 * 1.5));
}

TEST_CASE("two-variable consensus matches the dense joint solve")
{
    for (double sigma_c : {0.5, 1e-3}) {
        testing::LinearProblem p;
        p.dims = {1, 1};
        p.factors.push_back({{0}, {mat1(1)}, Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0)});
        p.factors.push_back({{1}, {mat1(1)}, Eigen::VectorXd::Constant(1, 4.0), Eigen::VectorXd::Constant(1, 1.0)});
        p.factors.push_back({{0, 1}, {mat1(1), mat1(-1)}, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, sigma_c)});
        p.edges = {{0, 1}};
        auto g = testing::build_graph(p);
        for (int i = 0; i < 5; ++i)
            g.iterate();
        const auto dense = testing::dense_marginals(p);
        for (VarId v : {0u, 1u}) {
            CHECK(absolute_mean(g, v) == doctest::Approx(dense[v].mean[0]).epsilon(1e-9));
            CHECK(g.variable(v).belief.covariance().value()(0, 0) == doctest::Approx(dense[v].cov(0, 0)).epsilon(1e-9));
        }
        CHECK(absolute_mean(g, 0) + absolute_mean(g, 1) == doctest::Approx(4.0));
        if (sigma_c < 0.01) {
            CHECK(absolute_mean(g, 0) == doctest::Approx(2.0).epsilon(1e-5));
            CHECK(absolute_mean(g, 1) == doctest::Approx(2.0).epsilon(1e-5));
        }
    }
}

TEST_CASE("5-variable chain reaches dense marginals")
{
    std::mt19937_64 rng(42);
    testing::LinearProblem p;
    p.dims.assign(5, 1);
    for (std::size_t i = 0; i < 5; ++i)
        p.factors.push_back({{i}, {mat1(1)}, testing::random_vector(1, -5, 5, rng), testing::random_vector(1, 0.5, 2, rng)});
    for (std::size_t i = 0; i + 1 < 5; ++i) {
        p.factors.push_back({{i, i + 1}, {mat1(1), mat1(-1)}, testing::random_vector(1, -1, 1, rng),
                             testing::random_vector(1, 0.2, 1, rng)});
        p.edges.emplace_back(i, i + 1);
    }
    auto g = testing::build_graph(p);
    for (int i = 0; i < 10; ++i)
        g.iterate();
    const auto dense = testing::dense_marginals(p);
    for (VarId v = 0; v < 5; ++v) {
        CHECK(std::abs(absolute_mean(g, v) - dense[v].mean[0]) < 1e-8);
        CHECK(std::abs(g.variable(v).belief.covariance().value()(0, 0) - dense[v].cov(0, 0)) < 1e-8);
    }
}

TEST_CASE("tree exactness after diameter sweeps on mixed R1/R3 trees")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        std::uniform_int_distribution<int> size(2, 20);
        const auto p = testing::random_tree(size(rng), rng);
        auto g = testing::build_graph(p);
        const int sweeps = testing::tree_diameter(p) + 1;
        for (int i = 0; i < sweeps; ++i)
            g.iterate();
        const auto dense = testing::dense_marginals(p);
        for (std::size_t v = 0; v < p.dims.size(); ++v) {
            const auto& var = g.variable(v);
            const Eigen::VectorXd mu = var.lin_point.data() + var.belief.mean().value();
            CHECK((mu - dense[v].mean).cwiseAbs().maxCoeff() < 1e-8);
            CHECK((Eigen::MatrixXd(var.belief.covariance().value()) - dense[v].cov).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("update_belief is the information-form product of the inbox")
{
    FactorGraph g;
    g.add_variable(1, lie::ManifoldPoint::scalar(0));
    CHECK(g.update_belief(1).is_zero());

    g.attach_remote_factor(1, 7);
    g.deliver_message(1, 7, info(2, 3), lie::ManifoldPoint::scalar(0));
    CHECK(g.update_belief(1).eta[0] == 2);
    CHECK(g.update_belief(1).lambda(0, 0) == 3);

    g.attach_remote_factor(1, 8);
    g.deliver_message(1, 8, info(-1, 5), lie::ManifoldPoint::scalar(0));
    const auto& b = g.update_belief(1);
    CHECK(b.eta[0] == 1);
    CHECK(b.lambda(0, 0) == 8);
}

TEST_CASE("variable_to_factor_message excludes the receiving factor")
{
    FactorGraph g;
    g.add_variable(1, lie::ManifoldPoint::scalar(0));
    g.attach_remote_factor(1, 7);
    g.deliver_message(1, 7, info(2, 3), lie::ManifoldPoint::scalar(0));
    g.update_belief(1);
    CHECK(g.variable_to_factor_message(1, 7).is_zero());

    g.attach_remote_factor(1, 8);
    g.deliver_message(1, 8, info(-1, 5), lie::ManifoldPoint::scalar(0));
    g.update_belief(1);
    const auto m7 = g.variable_to_factor_message(1, 7);
    CHECK(m7.eta[0] == -1);
    CHECK(m7.lambda(0, 0) == 5);
    const auto rebuilt = m7 + *g.variable(1).inbox_entry(7);
    CHECK(rebuilt.eta[0] == g.variable(1).belief.eta[0]);
    CHECK(rebuilt.lambda(0, 0) == g.variable(1).belief.lambda(0, 0));
    CHECK_THROWS_AS(g.variable_to_factor_message(1, 99), std::invalid_argument);
}

TEST_CASE("relinearize moves the lin point to the belief mean")
{
    FactorGraph g;
    g.add_variable(1, lie::ManifoldPoint::scalar(0));
    g.attach_remote_factor(1, 7);

    g.deliver_message(1, 7, info(0, 2), lie::ManifoldPoint::scalar(0));
    g.update_belief(1);
    g.relinearize(1);
    CHECK(g.variable(1).lin_point[0] == 0.0);

    g.deliver_message(1, 7, info(6, 2), lie::ManifoldPoint::scalar(0));
    g.update_belief(1);
    g.relinearize(1);
    CHECK(g.variable(1).lin_point[0] == doctest::Approx(3.0));
    CHECK(std::abs(g.variable(1).belief.mean().value()[0]) < 1e-15);
    CHECK(std::abs(g.variable(1).inbox_entry(7)->eta[0]) < 1e-15);

    SUBCASE("SE2 belief offset is rebased to zero")
    {
        FactorGraph h;
        h.add_variable(2, lie::ManifoldPoint::se2(1, 2, 0.3));
        h.attach_remote_factor(2, 9);
        GaussianInfo m = GaussianInfo::zero(3);
        m.lambda = Mat::Identity(3, 3) * 4.0;
        m.eta << 0.4, -0.8, 0.2;
        h.deliver_message(2, 9, m, lie::ManifoldPoint::se2(1, 2, 0.3));
        h.update_belief(2);
        h.relinearize(2);
        CHECK(h.variable(2).belief.mean().value().norm() < 1e-12);
    }

    SUBCASE("non-invertible belief is skipped")
    {
        FactorGraph h;
        h.add_variable(3, lie::ManifoldPoint::scalar(1));
        h.update_belief(3);
        h.relinearize(3);
        CHECK(h.variable(3).lin_point[0] == 1.0);
        CHECK(h.diagnostics().skipped_relinearizations == 1);
    }
}

TEST_CASE("numeric Jacobians")
{
    const auto id = unary_identity(1);
    const std::vector<lie::ManifoldPoint> x{lie::ManifoldPoint::scalar(0.7)};
    CHECK(numeric_jacobian(*id, x)(0, 0) == doctest::Approx(1.0).epsilon(1e-9));

    // Right-minus difference on an R^2 pair is [I, -I].
    const auto diff = difference(2);
    lie::Vec a(2), b(2);
    a << 1, 2;
    b << -3, 0.5;
    const std::vector<lie::ManifoldPoint> pair{lie::ManifoldPoint::rn(a), lie::ManifoldPoint::rn(b)};
    const auto j = numeric_jacobian(*diff, pair);
    Eigen::MatrixXd expect(2, 4);
    expect << 1, 0, -1, 0, 0, 1, 0, -1;
    CHECK((Eigen::MatrixXd(j) - expect).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("damping blends with the previous message")
{
    FactorGraph g;
    g.add_variable(1, lie::ManifoldPoint::scalar(0));
    g.add_factor(make_factor(10, {1}, {lie::ManifoldKind::rn(1)}, vec1(2.0), vec1(1.0), unary_identity(1), 0.25));
    g.iterate(false);
    // First message has no predecessor so it is sent undamped.
    CHECK(g.variable(1).inbox_entry(10)->eta[0] == doctest::Approx(2.0));
    g.factor(10).z = vec1(6.0);
    g.iterate(false);
    CHECK(g.variable(1).inbox_entry(10)->eta[0] == doctest::Approx(0.75 * 6.0 + 0.25 * 2.0));
    CHECK_THROWS_AS(make_factor(11, {1}, {lie::ManifoldKind::rn(1)}, vec1(0), vec1(1), unary_identity(1), 1.0),
                    std::invalid_argument);
}

TEST_CASE("invalid factor construction")
{
    CHECK_THROWS_AS(make_factor(1, {1}, {lie::ManifoldKind::rn(1)}, vec1(0), vec1(0.0), unary_identity(1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_factor(1, {1}, {lie::ManifoldKind::rn(1)}, vec1(0), vec1(-1.0), unary_identity(1)),
                    std::invalid_argument);
    lie::Vec z2 = lie::Vec::Zero(2);
    CHECK_THROWS_AS(make_factor(1, {1}, {lie::ManifoldKind::rn(1)}, z2, vec1(1.0), unary_identity(1)),
                    std::invalid_argument);
}

TEST_CASE("singular conditioning block returns the previous message")
{
    FactorGraph g;
    g.add_variable(1, lie::ManifoldPoint::scalar(0));
    g.add_factor(make_factor(10, {1, 2}, {lie::ManifoldKind::rn(1), lie::ManifoldKind::rn(1)}, vec1(0), vec1(1.0),
                             difference(1)));
    // Remote variable 2 sends a negative-definite message: no jitter can fix that.
    g.set_remote_message(2, 10, info(0.0, -50.0), lie::ManifoldPoint::scalar(0));
    const auto msg = g.factor_to_variable_message(g.factor(10), 0);
    REQUIRE(msg.has_value());
    CHECK(msg->is_zero());
    CHECK(g.diagnostics().singular_messages == 1);
}

TEST_CASE("a factor waits until its remote variable has been heard from")
{
    FactorGraph g;
    g.add_variable(1, lie::ManifoldPoint::scalar(0));
    g.add_factor(make_factor(10, {1, 2}, {lie::ManifoldKind::rn(1), lie::ManifoldKind::rn(1)}, vec1(0), vec1(1.0),
                             difference(1)));
    CHECK_FALSE(g.factor_to_variable_message(g.factor(10), 0).has_value());
    g.set_remote_message(2, 10, info(3.0, 1.0), lie::ManifoldPoint::scalar(0));
    const auto msg = g.factor_to_variable_message(g.factor(10), 0).value();
    // Marginal of N(x2; 3, 1) through x1 - x2 = 0 with unit noise: mean 3, variance 2.
    CHECK(msg.lambda(0, 0) == doctest::Approx(0.5));
    CHECK(msg.eta[0] == doctest::Approx(1.5));
}

TEST_CASE("beliefs stay symmetric PSD on random loopy graphs")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        testing::LinearProblem p;
        const int n = 12;
        p.dims.assign(n, 2);
        for (std::size_t i = 0; i < std::size_t(n); ++i)
            p.factors.push_back({{i}, {Eigen::MatrixXd::Identity(2, 2)}, testing::random_vector(2, -5, 5, rng),
                                 testing::random_vector(2, 0.5, 3, rng)});
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (int e = 0; e < 20; ++e) {
            std::size_t a = pick(rng), b = pick(rng);
            if (a == b)
                continue;
            p.factors.push_back({{a, b}, {Eigen::MatrixXd::Identity(2, 2), -Eigen::MatrixXd::Identity(2, 2)},
                                 testing::random_vector(2, -1, 1, rng), testing::random_vector(2, 0.5, 2, rng)});
        }
        auto g = testing::build_graph(p);
        for (int sweep = 0; sweep < 100; ++sweep) {
            g.iterate();
            for (const auto& v : g.variables()) {
                const Eigen::MatrixXd l = v.belief.lambda;
                CHECK((l - l.transpose()).cwiseAbs().maxCoeff() < 1e-9);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
                CHECK(es.eigenvalues().minCoeff() > -1e-9);
            }
        }
    }
}

TEST_CASE("removing a variable drops its hosted factors and remote links")
{
    FactorGraph g;
    g.add_variable(1, lie::ManifoldPoint::scalar(0));
    g.add_variable(2, lie::ManifoldPoint::scalar(0));
    g.add_factor(make_factor(10, {1, 2}, {lie::ManifoldKind::rn(1), lie::ManifoldKind::rn(1)}, vec1(0), vec1(1.0),
                             difference(1)));
    g.add_factor(make_factor(11, {2, 3}, {lie::ManifoldKind::rn(1), lie::ManifoldKind::rn(1)}, vec1(0), vec1(1.0),
                             difference(1)));
    REQUIRE(g.remote(3) != nullptr);
    g.remove_variable(2);
    CHECK_FALSE(g.has_factor(10));
    CHECK_FALSE(g.has_factor(11));
    CHECK(g.remote(3) == nullptr);
    CHECK(g.variable(1).inbox.empty());
}
