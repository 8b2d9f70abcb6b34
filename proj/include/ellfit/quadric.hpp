#pragma once

// Ellipsoids as algebraic coefficient vectors and as center/rotation/semiaxes.
//
// Coefficient layout pairs with the design row
//   d(x) = [x1^2, x2^2, x3^2, 2x1x2, 2x1x3, 2x2x3, 2x1, 2x2, 2x3, -1]
// so that F(x) = d(x)^T q. The homogeneous matrix form uses Q[3][3] = -q10,
// which makes x_h^T Q x_h == d(x)^T q hold identically.

#include <Eigen/Dense>

#include <span>

namespace ellfit {

using Point3 = Eigen::Vector3d;
using Vector10 = Eigen::Matrix<double, 10, 1>;
using QuadricMatrix = Eigen::Matrix4d;

/// Homogeneous design row of a point.
Vector10 design_row(const Point3& p);

/// Unit-norm, sign-normalized coefficient vector of a quadric.
///
/// Sign normalization makes the trace of the 3x3 block positive; when that
/// trace is exactly zero the first nonzero entry is made positive instead.
class QuadricCoefficients {
public:
    /// Normalizes `raw`; throws Error(InvalidArgument) for zero or non-finite input.
    explicit QuadricCoefficients(const Vector10& raw);

    /// Unit sphere x1^2 + x2^2 + x3^2 - 1 = 0.
    static QuadricCoefficients unit_sphere();

    const Vector10& vector() const noexcept { return q_; }
    double operator[](int i) const noexcept { return q_[i]; }

    /// F(p) = d(p)^T q.
    double evaluate(const Point3& p) const;

    friend bool operator==(const QuadricCoefficients&, const QuadricCoefficients&) = default;

private:
    Vector10 q_;
};

QuadricMatrix coeffs_to_matrix(const QuadricCoefficients& q);

/// Reads q back out of a symmetric 4x4 matrix (inverse of coeffs_to_matrix) and normalizes.
QuadricCoefficients matrix_to_coeffs(const QuadricMatrix& Q);

/// Euclidean placement of an ellipsoid: a scene point p maps to the
/// ellipsoid-aligned frame as u = rotation * p + translation, where the
/// surface is sum_i (u_i / semiaxes_i)^2 = 1.
struct EllipsoidGeometry {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    Eigen::Vector3d semiaxes = Eigen::Vector3d::Ones();
    Eigen::Vector3d center = Eigen::Vector3d::Zero();

    /// Builds the geometry from a center; translation = -rotation * center.
    /// Throws Error(InvalidArgument) if rotation is not proper orthogonal or
    /// a semiaxis is not strictly positive and finite.
    static EllipsoidGeometry from_center(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& center,
                                         const Eigen::Vector3d& semiaxes);

    /// Coordinates of p in the ellipsoid-aligned frame.
    Eigen::Vector3d to_local(const Point3& p) const { return rotation * p + translation; }
    Point3 to_scene(const Eigen::Vector3d& u) const { return rotation.transpose() * (u - translation); }
};

/// Eigen-decomposition based recovery of the geometry.
///
/// Eigenvalues of the 3x3 block are sorted ascending, so semiaxes come out in
/// descending order. Throws Error(Degenerate) when an eigenvalue is below
/// 1e-12 of the largest in magnitude and Error(NotAnEllipsoid) when no real
/// bounded surface exists.
EllipsoidGeometry decompose(const QuadricCoefficients& q);

QuadricCoefficients geometry_to_coeffs(const EllipsoidGeometry& g);

/// True iff q describes a real, bounded, non-degenerate ellipsoid.
bool validate_ellipsoid(const QuadricCoefficients& q) noexcept;

/// Coefficients plus a cached decomposition. Always a valid ellipsoid.
class EllipsoidModel {
public:
    /// Throws Error(NotAnEllipsoid) / Error(Degenerate) as decompose().
    explicit EllipsoidModel(const QuadricCoefficients& coeffs);
    explicit EllipsoidModel(const EllipsoidGeometry& geometry);

    const QuadricCoefficients& coeffs() const noexcept { return coeffs_; }
    const EllipsoidGeometry& geometry() const noexcept { return geometry_; }

    const Eigen::Matrix3d& quadratic_block() const noexcept { return block_; }
    const Eigen::Vector3d& linear_part() const noexcept { return linear_; }
    /// Q[3][3] == -q10.
    double constant_term() const noexcept { return constant_; }

    /// F(p) evaluated through the cached matrix blocks.
    double evaluate(const Point3& p) const { return p.dot(block_ * p) + 2.0 * linear_.dot(p) + constant_; }

    /// Model with the same center/rotation and semiaxes multiplied by `scale`.
    EllipsoidModel scaled(double scale) const;

private:
    QuadricCoefficients coeffs_;
    EllipsoidGeometry geometry_;
    Eigen::Matrix3d block_;
    Eigen::Vector3d linear_;
    double constant_;
};

/// Rotation taking scene axes to the given unit quaternion's frame.
Eigen::Matrix3d rotation_from_quaternion(double w, double x, double y, double z);

}  // namespace ellfit
