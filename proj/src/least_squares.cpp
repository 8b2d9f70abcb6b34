#include "ellfit/least_squares.hpp"

#include "ellfit/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace ellfit {

namespace {

using Matrix10 = Eigen::Matrix<double, 10, 10>;

constexpr std::size_t kMinPoints = 9;
constexpr double kRankGap = 1e-10;

// Similarity x' = scale * (x - offset), as a homogeneous 4x4 matrix.
struct Conditioning {
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
    double scale = 1.0;

    Eigen::Matrix4d matrix() const {
        Eigen::Matrix4d N = Eigen::Matrix4d::Identity();
        N.topLeftCorner<3, 3>() *= scale;
        N.topRightCorner<3, 1>() = -scale * offset;
        return N;
    }
};

Conditioning condition(std::span<const Point3> points, std::span<const double> sq_weights) {
    double total = 0.0;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < points.size(); ++i) {
        mean += sq_weights[i] * points[i];
        total += sq_weights[i];
    }
    mean /= total;

    double spread = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        spread += sq_weights[i] * (points[i] - mean).squaredNorm();
    }
    const double rms = std::sqrt(spread / total);

    Conditioning c;
    c.offset = mean;
    c.scale = rms > 0.0 ? std::sqrt(3.0) / rms : 1.0;
    return c;
}

QuadricCoefficients solve_weighted(std::span<const Point3> points, std::span<const double> sq_weights) {
    const Conditioning cond = condition(points, sq_weights);

    Matrix10 normal = Matrix10::Zero();
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (sq_weights[i] == 0.0) {
            continue;
        }
        const Vector10 d = design_row(cond.scale * (points[i] - cond.offset));
        normal.selfadjointView<Eigen::Lower>().rankUpdate(d, sq_weights[i]);
    }
    normal = normal.selfadjointView<Eigen::Lower>();

    Eigen::SelfAdjointEigenSolver<Matrix10> evd(normal);
    if (evd.info() != Eigen::Success) {
        throw Error(ErrorCode::RankDeficient, "eigendecomposition of the normal matrix failed");
    }
    const auto& ev = evd.eigenvalues();
    if (!(ev[9] > 0.0) || ev[1] - ev[0] <= kRankGap * ev[9]) {
        throw Error(ErrorCode::RankDeficient, "smallest eigenvalue of the normal matrix is not simple");
    }

    const QuadricCoefficients conditioned(evd.eigenvectors().col(0));
    const Eigen::Matrix4d N = cond.matrix();
    return matrix_to_coeffs(N.transpose() * coeffs_to_matrix(conditioned) * N);
}

}  // namespace

QuadricCoefficients lls_fit(std::span<const Point3> points) {
    if (points.size() < kMinPoints) {
        throw Error(ErrorCode::TooFewPoints, "LLS fitting needs at least 9 points");
    }
    const std::vector<double> ones(points.size(), 1.0);
    return solve_weighted(points, ones);
}

QuadricCoefficients wls_fit(std::span<const Point3> points, std::span<const double> weights) {
    if (weights.size() != points.size()) {
        throw Error(ErrorCode::InvalidArgument, "weight count must equal point count");
    }
    std::vector<double> sq_weights(weights.size());
    std::size_t support = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
            throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
        }
        sq_weights[i] = weights[i] * weights[i];
        if (weights[i] > kMinSupportWeight) {
            ++support;
        }
    }
    if (support < kMinPoints) {
        throw Error(ErrorCode::InsufficientSupport, "fewer than 9 points carry weight");
    }
    return solve_weighted(points, sq_weights);
}

WeightVector metric_weights(std::span<const Point3> points, const EllipsoidModel& m, double epsilon,
                            const MetricKind& metric) {
    if (!(epsilon > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "weight threshold must be positive");
    }
    WeightVector w(points.size());
    const double inv = 1.0 / (2.0 * epsilon * epsilon);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = metric_or_infinity(metric, points[i], m);
        w[i] = std::isfinite(d) ? std::exp(-d * d * inv) : 0.0;
    }
    return w;
}

WeightVector cas_weights(std::span<const Point3> points, const EllipsoidModel& m, double epsilon_lo, double lambda) {
    return metric_weights(points, m, epsilon_lo, MetricKind::cas(lambda));
}

}  // namespace ellfit
