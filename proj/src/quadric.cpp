#include "ellfit/quadric.hpp"

#include "ellfit/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <cmath>

namespace ellfit {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NotAnEllipsoid: return "NotAnEllipsoid";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::InsufficientSupport: return "InsufficientSupport";
        case ErrorCode::GradientVanishes: return "GradientVanishes";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::NoModelFound: return "NoModelFound";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Vector10 design_row(const Point3& p) {
    const double x = p.x(), y = p.y(), z = p.z();
    Vector10 d;
    d << x * x, y * y, z * z, 2.0 * x * y, 2.0 * x * z, 2.0 * y * z, 2.0 * x, 2.0 * y, 2.0 * z, -1.0;
    return d;
}

QuadricCoefficients::QuadricCoefficients(const Vector10& raw) {
    if (!raw.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "quadric coefficients must be finite");
    }
    const double norm = raw.norm();
    if (!(norm > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "quadric coefficients must not be all zero");
    }
    q_ = raw / norm;

    const double trace = q_[0] + q_[1] + q_[2];
    bool flip = trace < 0.0;
    if (trace == 0.0) {
        for (int i = 0; i < 10; ++i) {
            if (q_[i] != 0.0) {
                flip = q_[i] < 0.0;
                break;
            }
        }
    }
    if (flip) {
        q_ = -q_;
    }
}

QuadricCoefficients QuadricCoefficients::unit_sphere() {
    Vector10 raw = Vector10::Zero();
    raw << 1, 1, 1, 0, 0, 0, 0, 0, 0, 1;
    return QuadricCoefficients(raw);
}

double QuadricCoefficients::evaluate(const Point3& p) const { return design_row(p).dot(q_); }

QuadricMatrix coeffs_to_matrix(const QuadricCoefficients& coeffs) {
    const Vector10& q = coeffs.vector();
    QuadricMatrix Q;
    Q << q[0], q[3], q[4], q[6],
         q[3], q[1], q[5], q[7],
         q[4], q[5], q[2], q[8],
         q[6], q[7], q[8], -q[9];
    return Q;
}

QuadricCoefficients matrix_to_coeffs(const QuadricMatrix& Q) {
    const QuadricMatrix S = 0.5 * (Q + Q.transpose());
    Vector10 q;
    q << S(0, 0), S(1, 1), S(2, 2), S(0, 1), S(0, 2), S(1, 2), S(0, 3), S(1, 3), S(2, 3), -S(3, 3);
    return QuadricCoefficients(q);
}

EllipsoidGeometry EllipsoidGeometry::from_center(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& center,
                                                 const Eigen::Vector3d& semiaxes) {
    if (!rotation.allFinite() || !center.allFinite() || !semiaxes.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "ellipsoid geometry must be finite");
    }
    const double orth = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (orth > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "rotation must be orthogonal with determinant +1");
    }
    if ((semiaxes.array() <= 0.0).any()) {
        throw Error(ErrorCode::InvalidArgument, "semiaxes must be strictly positive");
    }
    EllipsoidGeometry g;
    g.rotation = rotation;
    g.semiaxes = semiaxes;
    g.translation = -rotation * center;
    g.center = center;
    return g;
}

EllipsoidGeometry decompose(const QuadricCoefficients& coeffs) {
    const QuadricMatrix Q = coeffs_to_matrix(coeffs);
    const Eigen::Matrix3d block = Q.topLeftCorner<3, 3>();
    const Eigen::Vector3d linear = Q.topRightCorner<3, 1>();
    const double q10 = coeffs[9];

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> evd(block);
    if (evd.info() != Eigen::Success) {
        throw Error(ErrorCode::Degenerate, "eigendecomposition of the quadratic block failed");
    }
    const Eigen::Vector3d lambda = evd.eigenvalues();
    Eigen::Matrix3d U = evd.eigenvectors();

    const double largest = lambda.cwiseAbs().maxCoeff();
    if (!(largest > 0.0) || lambda.cwiseAbs().minCoeff() < 1e-12 * largest) {
        throw Error(ErrorCode::Degenerate, "quadratic block is (near) singular");
    }
    if ((lambda.array() <= 0.0).any()) {
        throw Error(ErrorCode::NotAnEllipsoid, "quadratic block is not positive definite");
    }
    if (U.determinant() < 0.0) {
        U.col(2) = -U.col(2);
    }

    // Scale l shared by Q1 and the canonical form: q7..9^T U L^-1 U^T q7..9 - Q[3][3].
    const Eigen::Vector3d projected = U.transpose() * linear;
    const Eigen::Vector3d translation = projected.cwiseQuotient(lambda);
    const double scale = projected.dot(translation) + q10;
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw Error(ErrorCode::NotAnEllipsoid, "quadric has no real points");
    }

    EllipsoidGeometry g;
    g.rotation = U.transpose();
    g.translation = translation;
    g.semiaxes = (scale / lambda.array()).sqrt().matrix();
    g.center = -g.rotation.transpose() * g.translation;
    if (!g.semiaxes.allFinite() || !g.center.allFinite()) {
        throw Error(ErrorCode::Degenerate, "recovered geometry is not finite");
    }
    return g;
}

QuadricCoefficients geometry_to_coeffs(const EllipsoidGeometry& g) {
    const Eigen::Matrix3d psi = g.semiaxes.array().square().inverse().matrix().asDiagonal();
    const Eigen::Matrix3d& R = g.rotation;
    const Eigen::Vector3d& T = g.translation;
    QuadricMatrix Q;
    Q.topLeftCorner<3, 3>() = R.transpose() * psi * R;
    Q.topRightCorner<3, 1>() = R.transpose() * psi * T;
    Q.bottomLeftCorner<1, 3>() = (R.transpose() * psi * T).transpose();
    Q(3, 3) = T.dot(psi * T) - 1.0;
    return matrix_to_coeffs(Q);
}

bool validate_ellipsoid(const QuadricCoefficients& q) noexcept {
    try {
        (void)decompose(q);
        return true;
    } catch (const Error&) {
        return false;
    }
}

EllipsoidModel::EllipsoidModel(const QuadricCoefficients& coeffs)
    : coeffs_(coeffs), geometry_(decompose(coeffs)) {
    const QuadricMatrix Q = coeffs_to_matrix(coeffs_);
    block_ = Q.topLeftCorner<3, 3>();
    linear_ = Q.topRightCorner<3, 1>();
    constant_ = Q(3, 3);
}

EllipsoidModel::EllipsoidModel(const EllipsoidGeometry& geometry) : EllipsoidModel(geometry_to_coeffs(geometry)) {}

EllipsoidModel EllipsoidModel::scaled(double scale) const {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw Error(ErrorCode::InvalidArgument, "scale must be positive and finite");
    }
    EllipsoidGeometry g = geometry_;
    g.semiaxes *= scale;
    return EllipsoidModel(g);
}

Eigen::Matrix3d rotation_from_quaternion(double w, double x, double y, double z) {
    const Eigen::Quaterniond quat(w, x, y, z);
    if (!(quat.norm() > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "quaternion must be nonzero");
    }
    return quat.normalized().toRotationMatrix();
}

}  // namespace ellfit
