#pragma once

#include "ellfit/distance.hpp"
#include "ellfit/quadric.hpp"

#include <span>
#include <vector>

namespace ellfit {

/// Per-point weights in [0, 1].
using WeightVector = std::vector<double>;

/// Weights below this count as absent when checking WLS support.
inline constexpr double kMinSupportWeight = 1e-6;

/// Minimizes sum (d_i^T q)^2 subject to ||q|| = 1 over at least 9 points.
///
/// Points are centered and isotropically scaled to RMS radius sqrt(3) before
/// the 10x10 normal matrix is formed; the solution is mapped back to scene
/// coordinates. Throws Error(TooFewPoints) below 9 points and
/// Error(RankDeficient) when the two smallest eigenvalues of the normal
/// matrix coincide to 1e-10 of the largest.
///
/// No ellipsoid constraint is imposed; callers validate.
QuadricCoefficients lls_fit(std::span<const Point3> points);

/// Minimizes sum (w_i d_i^T q)^2 subject to ||q|| = 1. Weights enter the
/// normal matrix squared. Throws Error(InsufficientSupport) when fewer than 9
/// weights exceed kMinSupportWeight.
QuadricCoefficients wls_fit(std::span<const Point3> points, std::span<const double> weights);

/// w_i = exp(-d_i^2 / (2 eps^2)) under `metric`; 0 where the metric is undefined.
WeightVector metric_weights(std::span<const Point3> points, const EllipsoidModel& m, double epsilon,
                            const MetricKind& metric);

/// metric_weights with the CAS distance.
WeightVector cas_weights(std::span<const Point3> points, const EllipsoidModel& m, double epsilon_lo,
                         double lambda = 0.5);

}  // namespace ellfit
