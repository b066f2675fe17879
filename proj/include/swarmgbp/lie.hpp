#pragma once

// Lie-group arithmetic for the groups consensus variables live on:
// R^n, SO(2) and SE(2). Points carry their group tag at runtime so the
// belief-propagation engine can stay agnostic of the concrete group.

#include <Eigen/Core>

#include <cstdint>
#include <string>

namespace swarmgbp::lie {

/// Largest tangent dimension any supported group may have. SE(3) would
/// also fit here.
inline constexpr int kMaxTangent = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxTangent, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxTangent, kMaxTangent>;

enum class Group : std::uint8_t { Rn, SO2, SE2 };

class ManifoldKind {
public:
    static ManifoldKind rn(int n);
    static ManifoldKind so2() { return ManifoldKind(Group::SO2, 1); }
    static ManifoldKind se2() { return ManifoldKind(Group::SE2, 3); }

    Group group() const { return group_; }
    /// Tangent dimension: n for R^n, 1 for SO(2), 3 for SE(2).
    int dim() const { return dim_; }

    std::string name() const;

    friend bool operator==(ManifoldKind a, ManifoldKind b) { return a.group_ == b.group_ && a.dim_ == b.dim_; }
    friend bool operator!=(ManifoldKind a, ManifoldKind b) { return !(a == b); }

private:
    ManifoldKind(Group g, int d) : group_(g), dim_(d) {}
    Group group_;
    int dim_;
};

/// Wrap to the principal value (-pi, pi].
double wrap_angle(double theta);

/// A group element. SO(2) stores [theta], SE(2) stores [x, y, theta];
/// angles are always kept wrapped.
class ManifoldPoint {
public:
    ManifoldPoint(ManifoldKind kind, const Vec& data);

    static ManifoldPoint identity(ManifoldKind kind);
    static ManifoldPoint rn(const Vec& v);
    static ManifoldPoint scalar(double v);
    static ManifoldPoint so2(double theta);
    static ManifoldPoint se2(double x, double y, double theta);

    ManifoldKind kind() const { return kind_; }
    const Vec& data() const { return data_; }
    double operator[](int i) const { return data_[i]; }

    /// SE(2)/SO(2) heading.
    double angle() const;
    /// SE(2) translation.
    Eigen::Vector2d translation() const;

private:
    ManifoldKind kind_;
    Vec data_;
};

struct TangentVector {
    ManifoldKind kind;
    Vec value;

    TangentVector(ManifoldKind k, const Vec& v);
    static TangentVector zero(ManifoldKind k);
    double norm() const { return value.norm(); }
};

ManifoldPoint compose(const ManifoldPoint& a, const ManifoldPoint& b);
ManifoldPoint inverse(const ManifoldPoint& a);
ManifoldPoint exp(const TangentVector& v);
TangentVector log(const ManifoldPoint& a);

/// a (-) b = Log(b^-1 * a), a tangent vector at b.
TangentVector right_minus(const ManifoldPoint& a, const ManifoldPoint& b);
/// a (+) v = a * Exp(v).
ManifoldPoint right_plus(const ManifoldPoint& a, const Vec& v);

/// Group action of an SE(2) pose on a planar point: R(theta) p + t.
Eigen::Vector2d act(const ManifoldPoint& pose, const Eigen::Vector2d& p);

/// Right Jacobian of Exp at tangent vector v.
Mat right_jacobian(const TangentVector& v);

/// Jacobians of a (-) b with respect to right-plus perturbations of a and b.
void right_minus_jacobians(const ManifoldPoint& a, const ManifoldPoint& b, Mat& d_a, Mat& d_b);

/// Closed-form V(theta) coefficients sin(t)/t and (1-cos(t))/t, Taylor-expanded near zero.
void se2_v_coefficients(double theta, double& a, double& b);

} // namespace swarmgbp::lie
