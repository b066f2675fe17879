#include "swarmgbp/lie.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swarmgbp::lie {

namespace {

constexpr double kPi = std::numbers::pi;

void require_same(const ManifoldPoint& a, const ManifoldPoint& b, const char* op)
{
    if (a.kind() != b.kind())
        throw std::invalid_argument(std::string(op) + ": kind mismatch (" + a.kind().name() + " vs " +
                                    b.kind().name() + ")");
}

Eigen::Matrix2d rotation(double theta)
{
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

} // namespace

ManifoldKind ManifoldKind::rn(int n)
{
    if (n < 1 || n > kMaxTangent)
        throw std::invalid_argument("R^n dimension out of range: " + std::to_string(n));
    return ManifoldKind(Group::Rn, n);
}

std::string ManifoldKind::name() const
{
    switch (group_) {
    case Group::Rn: return "R" + std::to_string(dim_);
    case Group::SO2: return "SO2";
    case Group::SE2: return "SE2";
    }
    return "?";
}

double wrap_angle(double theta)
{
    double r = std::remainder(theta, 2.0 * kPi);
    if (r <= -kPi)
        r += 2.0 * kPi;
    return r;
}

ManifoldPoint::ManifoldPoint(ManifoldKind kind, const Vec& data) : kind_(kind), data_(data)
{
    if (data_.size() != kind.dim())
        throw std::invalid_argument("point storage does not match kind " + kind.name());
    if (kind.group() == Group::SO2)
        data_[0] = wrap_angle(data_[0]);
    else if (kind.group() == Group::SE2)
        data_[2] = wrap_angle(data_[2]);
}

ManifoldPoint ManifoldPoint::identity(ManifoldKind kind)
{
    return ManifoldPoint(kind, Vec::Zero(kind.dim()));
}

ManifoldPoint ManifoldPoint::rn(const Vec& v)
{
    return ManifoldPoint(ManifoldKind::rn(static_cast<int>(v.size())), v);
}

ManifoldPoint ManifoldPoint::scalar(double v)
{
    Vec d(1);
    d << v;
    return ManifoldPoint(ManifoldKind::rn(1), d);
}

ManifoldPoint ManifoldPoint::so2(double theta)
{
    Vec d(1);
    d << theta;
    return ManifoldPoint(ManifoldKind::so2(), d);
}

ManifoldPoint ManifoldPoint::se2(double x, double y, double theta)
{
    Vec d(3);
    d << x, y, theta;
    return ManifoldPoint(ManifoldKind::se2(), d);
}

double ManifoldPoint::angle() const
{
    switch (kind_.group()) {
    case Group::SO2: return data_[0];
    case Group::SE2: return data_[2];
    default: throw std::invalid_argument("angle() on " + kind_.name());
    }
}

Eigen::Vector2d ManifoldPoint::translation() const
{
    if (kind_.group() != Group::SE2)
        throw std::invalid_argument("translation() on " + kind_.name());
    return {data_[0], data_[1]};
}

TangentVector::TangentVector(ManifoldKind k, const Vec& v) : kind(k), value(v)
{
    if (v.size() != k.dim())
        throw std::invalid_argument("tangent vector dimension does not match kind " + k.name());
}

TangentVector TangentVector::zero(ManifoldKind k)
{
    return TangentVector(k, Vec::Zero(k.dim()));
}

ManifoldPoint compose(const ManifoldPoint& a, const ManifoldPoint& b)
{
    require_same(a, b, "compose");
    switch (a.kind().group()) {
    case Group::Rn: return ManifoldPoint(a.kind(), a.data() + b.data());
    case Group::SO2: return ManifoldPoint::so2(a[0] + b[0]);
    case Group::SE2: {
        const Eigen::Vector2d t = rotation(a[2]) * b.translation() + a.translation();
        return ManifoldPoint::se2(t.x(), t.y(), a[2] + b[2]);
    }
    }
    throw std::logic_error("unreachable");
}

ManifoldPoint inverse(const ManifoldPoint& a)
{
    switch (a.kind().group()) {
    case Group::Rn: return ManifoldPoint(a.kind(), -a.data());
    case Group::SO2: return ManifoldPoint::so2(-a[0]);
    case Group::SE2: {
        const Eigen::Vector2d t = -(rotation(a[2]).transpose() * a.translation());
        return ManifoldPoint::se2(t.x(), t.y(), -a[2]);
    }
    }
    throw std::logic_error("unreachable");
}

void se2_v_coefficients(double theta, double& a, double& b)
{
    if (std::abs(theta) < 1e-4) {
        const double t2 = theta * theta;
        a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
        b = theta / 2.0 - theta * t2 / 24.0;
    } else {
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / theta;
    }
}

ManifoldPoint exp(const TangentVector& v)
{
    switch (v.kind.group()) {
    case Group::Rn: return ManifoldPoint(v.kind, v.value);
    case Group::SO2: return ManifoldPoint::so2(v.value[0]);
    case Group::SE2: {
        double a, b;
        const double theta = v.value[2];
        se2_v_coefficients(theta, a, b);
        const double x = a * v.value[0] - b * v.value[1];
        const double y = b * v.value[0] + a * v.value[1];
        return ManifoldPoint::se2(x, y, theta);
    }
    }
    throw std::logic_error("unreachable");
}

TangentVector log(const ManifoldPoint& p)
{
    switch (p.kind().group()) {
    case Group::Rn: return TangentVector(p.kind(), p.data());
    case Group::SO2: return TangentVector(p.kind(), p.data());
    case Group::SE2: {
        double a, b;
        const double theta = p[2];
        se2_v_coefficients(theta, a, b);
        const double den = a * a + b * b;
        Vec out(3);
        out << (a * p[0] + b * p[1]) / den, (-b * p[0] + a * p[1]) / den, theta;
        return TangentVector(p.kind(), out);
    }
    }
    throw std::logic_error("unreachable");
}

TangentVector right_minus(const ManifoldPoint& a, const ManifoldPoint& b)
{
    require_same(a, b, "right_minus");
    switch (a.kind().group()) {
    case Group::Rn: return TangentVector(a.kind(), a.data() - b.data());
    case Group::SO2: {
        Vec d(1);
        d << wrap_angle(a[0] - b[0]);
        return TangentVector(a.kind(), d);
    }
    case Group::SE2: return log(compose(inverse(b), a));
    }
    throw std::logic_error("unreachable");
}

Mat right_jacobian(const TangentVector& v)
{
    const int d = v.kind.dim();
    if (v.kind.group() != Group::SE2)
        return Mat::Identity(d, d);
    const double r1 = v.value[0], r2 = v.value[1], th = v.value[2];
    double a, b, c1, c2;
    se2_v_coefficients(th, a, b);
    if (std::abs(th) < 1e-4) {
        const double t2 = th * th;
        c1 = -r2 / 2.0 + r1 * th / 6.0 + r2 * t2 / 24.0 - r1 * th * t2 / 120.0;
        c2 = r1 / 2.0 + r2 * th / 6.0 - r1 * t2 / 24.0 - r2 * th * t2 / 120.0;
    } else {
        const double s = std::sin(th), c = std::cos(th), t2 = th * th;
        c1 = (th * r1 - r2 + r2 * c - r1 * s) / t2;
        c2 = (r1 + th * r2 - r1 * c - r2 * s) / t2;
    }
    Mat j(3, 3);
    j << a, b, c1, -b, a, c2, 0, 0, 1;
    return j;
}

void right_minus_jacobians(const ManifoldPoint& a, const ManifoldPoint& b, Mat& d_a, Mat& d_b)
{
    require_same(a, b, "right_minus_jacobians");
    const int d = a.kind().dim();
    if (a.kind().group() != Group::SE2) {
        d_a = Mat::Identity(d, d);
        d_b = -Mat::Identity(d, d);
        return;
    }
    const TangentVector tau = right_minus(a, b);
    const Eigen::Matrix3d jr = right_jacobian(tau);
    const Eigen::Matrix3d jl = right_jacobian(TangentVector(tau.kind, -tau.value));
    d_a = jr.inverse();
    d_b = -jl.inverse();
}

ManifoldPoint right_plus(const ManifoldPoint& a, const Vec& v)
{
    return compose(a, exp(TangentVector(a.kind(), v)));
}

Eigen::Vector2d act(const ManifoldPoint& pose, const Eigen::Vector2d& p)
{
    if (pose.kind().group() != Group::SE2)
        throw std::invalid_argument("act: pose must be SE2, got " + pose.kind().name());
    return rotation(pose[2]) * p + pose.translation();
}

} // namespace swarmgbp::lie
