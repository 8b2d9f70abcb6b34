#pragma once

// Point-to-ellipsoid distances: algebraic, Sampson, orthogonal, axial, and
// convex combinations of two of them.

#include "ellfit/quadric.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace ellfit {

/// Scale s of the family member (same center, axes, shape) passing through p.
/// s == 0 at the center, s == 1 on the model surface.
struct ScalingFactor {
    double value = 0.0;
};

enum class MetricTag {
    Algebraic,
    Sampson,
    Orthogonal,
    Axial,
    CAS,                    // lambda * axial + (1 - lambda) * sampson
    SampsonPlusOrthogonal,  // lambda * sampson + (1 - lambda) * orthogonal
    AxialPlusOrthogonal,    // lambda * axial + (1 - lambda) * orthogonal
};

/// Distance selection; lambda is only meaningful for the combined tags.
class MetricKind {
public:
    constexpr MetricKind() = default;

    static constexpr MetricKind algebraic() { return MetricKind(MetricTag::Algebraic, 0.5); }
    static constexpr MetricKind sampson() { return MetricKind(MetricTag::Sampson, 0.5); }
    static constexpr MetricKind orthogonal() { return MetricKind(MetricTag::Orthogonal, 0.5); }
    static constexpr MetricKind axial() { return MetricKind(MetricTag::Axial, 0.5); }
    static MetricKind cas(double lambda = 0.5) { return MetricKind(MetricTag::CAS, checked(lambda)); }
    static MetricKind sampson_plus_orthogonal(double lambda = 0.5) {
        return MetricKind(MetricTag::SampsonPlusOrthogonal, checked(lambda));
    }
    static MetricKind axial_plus_orthogonal(double lambda = 0.5) {
        return MetricKind(MetricTag::AxialPlusOrthogonal, checked(lambda));
    }

    constexpr MetricTag tag() const noexcept { return tag_; }
    constexpr double lambda() const noexcept { return lambda_; }
    constexpr bool is_combination() const noexcept {
        return tag_ == MetricTag::CAS || tag_ == MetricTag::SampsonPlusOrthogonal ||
               tag_ == MetricTag::AxialPlusOrthogonal;
    }

    /// Same tag with a different control ratio (no-op for single metrics).
    MetricKind with_lambda(double lambda) const;

    friend constexpr bool operator==(const MetricKind&, const MetricKind&) = default;

private:
    constexpr MetricKind(MetricTag tag, double lambda) : tag_(tag), lambda_(lambda) {}
    static double checked(double lambda);

    MetricTag tag_ = MetricTag::CAS;
    double lambda_ = 0.5;
};

/// Lowercase names: algebraic, sampson, orthogonal, axial, cas,
/// sampson+orthogonal, axial+orthogonal.
std::string_view metric_name(MetricTag tag);
/// Parses a metric name; Error(InvalidArgument) on unknown names.
MetricKind parse_metric(std::string_view name, double lambda = 0.5);

/// |d(p)^T q| with q unit-norm and sign-normalized.
double algebraic_distance(const Point3& p, const EllipsoidModel& m);

ScalingFactor scaling_factor(const Point3& p, const EllipsoidModel& m);

/// |s - 1| * ||r||_2 / 3.
double axial_distance(const Point3& p, const EllipsoidModel& m);

/// |F| / ||grad F|| with the spatial gradient; Error(GradientVanishes) at the center.
double sampson_distance(const Point3& p, const EllipsoidModel& m);

/// Sampson distance or nullopt where the gradient vanishes.
std::optional<double> try_sampson_distance(const Point3& p, const EllipsoidModel& m);

/// Nearest-foot-point distance to the surface; Error(ConvergenceFailure) if
/// the root solve stalls.
double orthogonal_distance(const Point3& p, const EllipsoidModel& m);

/// Orthogonal distance plus the foot point on the surface (scene frame).
struct FootPoint {
    double distance = 0.0;
    Point3 point = Point3::Zero();
};
FootPoint closest_point(const Point3& p, const EllipsoidModel& m);

/// lambda * axial + (1 - lambda) * sampson.
double cas_distance(const Point3& p, const EllipsoidModel& m, double lambda = 0.5);

/// Dispatches on kind; propagates component errors.
double evaluate_metric(const MetricKind& kind, const Point3& p, const EllipsoidModel& m);

/// As evaluate_metric, but +infinity where the Sampson gradient vanishes.
/// Used by scoring and weighting, where that point's energy becomes 0.
double metric_or_infinity(const MetricKind& kind, const Point3& p, const EllipsoidModel& m);

}  // namespace ellfit
