#include "ellfit/distance.hpp"

#include "ellfit/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace ellfit {

namespace {

constexpr int kMaxRootIterations = 200;
constexpr double kRootTolerance = 1e-12;

// Largest root of g(s) = sum_i (num_i / (s + ratio_i))^2 - 1 inside [lo, hi],
// where g(lo) >= 0 >= g(hi). g is convex and decreasing there, so Newton steps
// taken from the left never overshoot; bisection covers anything that leaves
// the bracket.
template <std::size_t N>
double largest_root(const std::array<double, N>& num, const std::array<double, N>& ratio, double lo, double hi) {
    auto eval = [&](double s, double& slope) {
        double g = -1.0;
        slope = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double t = num[i] / (s + ratio[i]);
            g += t * t;
            slope -= 2.0 * t * t / (s + ratio[i]);
        }
        return g;
    };

    double s = lo;
    for (int iter = 0; iter < kMaxRootIterations; ++iter) {
        double slope = 0.0;
        const double g = eval(s, slope);
        if (std::abs(g) < kRootTolerance) {
            return s;
        }
        if (g > 0.0) {
            lo = s;
        } else {
            hi = s;
        }
        double next = (slope < 0.0) ? s - g / slope : lo;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == s || next == lo || next == hi) {
            // Bracket collapsed to adjacent doubles.
            return s;
        }
        s = next;
    }
    throw Error(ErrorCode::ConvergenceFailure, "foot-point root solve did not converge in 200 iterations");
}

// Closest point on the ellipse (x/e0)^2 + (x/e1)^2 = 1 with e0 >= e1 > 0 and
// y in the first quadrant.
std::array<double, 2> foot_ellipse(double e0, double e1, double y0, double y1) {
    if (y1 > 0.0) {
        if (y0 > 0.0) {
            const double z0 = y0 / e0, z1 = y1 / e1;
            const double g = z0 * z0 + z1 * z1 - 1.0;
            if (g == 0.0) {
                return {y0, y1};
            }
            const double r0 = (e0 / e1) * (e0 / e1);
            const double lo = z1 - 1.0;
            const double hi = g < 0.0 ? 0.0 : std::hypot(r0 * z0, z1) - 1.0;
            const double s = largest_root<2>({r0 * z0, z1}, {r0, 1.0}, lo, hi);
            return {r0 * y0 / (s + r0), y1 / (s + 1.0)};
        }
        return {0.0, e1};
    }
    const double numer = e0 * y0;
    const double denom = e0 * e0 - e1 * e1;
    if (numer < denom) {
        const double xde = numer / denom;
        return {e0 * xde, e1 * std::sqrt(std::max(0.0, 1.0 - xde * xde))};
    }
    return {e0, 0.0};
}

// Closest point on the ellipsoid with e0 >= e1 >= e2 > 0 and y in the first octant.
std::array<double, 3> foot_ellipsoid(const std::array<double, 3>& e, const std::array<double, 3>& y) {
    if (y[2] > 0.0) {
        if (y[1] > 0.0) {
            if (y[0] > 0.0) {
                const double z0 = y[0] / e[0], z1 = y[1] / e[1], z2 = y[2] / e[2];
                const double g = z0 * z0 + z1 * z1 + z2 * z2 - 1.0;
                if (g == 0.0) {
                    return y;
                }
                const double r0 = (e[0] / e[2]) * (e[0] / e[2]);
                const double r1 = (e[1] / e[2]) * (e[1] / e[2]);
                const double lo = z2 - 1.0;
                const double hi = g < 0.0 ? 0.0 : std::hypot(r0 * z0, r1 * z1, z2) - 1.0;
                const double s = largest_root<3>({r0 * z0, r1 * z1, z2}, {r0, r1, 1.0}, lo, hi);
                return {r0 * y[0] / (s + r0), r1 * y[1] / (s + r1), y[2] / (s + 1.0)};
            }
            const auto f = foot_ellipse(e[1], e[2], y[1], y[2]);
            return {0.0, f[0], f[1]};
        }
        if (y[0] > 0.0) {
            const auto f = foot_ellipse(e[0], e[2], y[0], y[2]);
            return {f[0], 0.0, f[1]};
        }
        return {0.0, 0.0, e[2]};
    }

    // y2 == 0: the foot may leave the x0-x1 plane when y is deep inside.
    const double denom0 = e[0] * e[0] - e[2] * e[2];
    const double denom1 = e[1] * e[1] - e[2] * e[2];
    const double numer0 = e[0] * y[0];
    const double numer1 = e[1] * y[1];
    if (numer0 < denom0 && numer1 < denom1) {
        const double xde0 = numer0 / denom0;
        const double xde1 = numer1 / denom1;
        const double discr = 1.0 - xde0 * xde0 - xde1 * xde1;
        if (discr > 0.0) {
            return {e[0] * xde0, e[1] * xde1, e[2] * std::sqrt(discr)};
        }
    }
    const auto f = foot_ellipse(e[0], e[1], y[0], y[1]);
    return {f[0], f[1], 0.0};
}

double combine(double lambda, double first, double second) { return lambda * first + (1.0 - lambda) * second; }

}  // namespace

double MetricKind::checked(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "control ratio lambda must lie in [0, 1]");
    }
    return lambda;
}

MetricKind MetricKind::with_lambda(double lambda) const {
    if (!is_combination()) {
        return *this;
    }
    return MetricKind(tag_, checked(lambda));
}

std::string_view metric_name(MetricTag tag) {
    switch (tag) {
        case MetricTag::Algebraic: return "algebraic";
        case MetricTag::Sampson: return "sampson";
        case MetricTag::Orthogonal: return "orthogonal";
        case MetricTag::Axial: return "axial";
        case MetricTag::CAS: return "cas";
        case MetricTag::SampsonPlusOrthogonal: return "sampson+orthogonal";
        case MetricTag::AxialPlusOrthogonal: return "axial+orthogonal";
    }
    return "unknown";
}

MetricKind parse_metric(std::string_view name, double lambda) {
    if (name == "algebraic") return MetricKind::algebraic();
    if (name == "sampson") return MetricKind::sampson();
    if (name == "orthogonal") return MetricKind::orthogonal();
    if (name == "axial") return MetricKind::axial();
    if (name == "cas") return MetricKind::cas(lambda);
    if (name == "sampson+orthogonal") return MetricKind::sampson_plus_orthogonal(lambda);
    if (name == "axial+orthogonal") return MetricKind::axial_plus_orthogonal(lambda);
    throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

double algebraic_distance(const Point3& p, const EllipsoidModel& m) { return std::abs(m.coeffs().evaluate(p)); }

ScalingFactor scaling_factor(const Point3& p, const EllipsoidModel& m) {
    const auto& g = m.geometry();
    const Eigen::Vector3d u = g.to_local(p).cwiseQuotient(g.semiaxes);
    return ScalingFactor{u.norm()};
}

double axial_distance(const Point3& p, const EllipsoidModel& m) {
    const double s = scaling_factor(p, m).value;
    return std::abs(s - 1.0) * m.geometry().semiaxes.norm() / 3.0;
}

std::optional<double> try_sampson_distance(const Point3& p, const EllipsoidModel& m) {
    const Eigen::Vector3d half_grad = m.quadratic_block() * p + m.linear_part();
    const double grad_norm = 2.0 * half_grad.norm();
    // q is unit-norm, so the threshold is absolute.
    if (!(grad_norm >= 1e-12)) {
        return std::nullopt;
    }
    const double f = p.dot(half_grad) + m.linear_part().dot(p) + m.constant_term();
    return std::abs(f) / grad_norm;
}

double sampson_distance(const Point3& p, const EllipsoidModel& m) {
    if (auto d = try_sampson_distance(p, m)) {
        return *d;
    }
    throw Error(ErrorCode::GradientVanishes, "Sampson gradient vanishes at the model center");
}

FootPoint closest_point(const Point3& p, const EllipsoidModel& m) {
    const auto& g = m.geometry();
    const Eigen::Vector3d u = g.to_local(p);

    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g.semiaxes[a] > g.semiaxes[b]; });

    std::array<double, 3> e{}, y{};
    for (int k = 0; k < 3; ++k) {
        e[k] = g.semiaxes[order[k]];
        y[k] = std::abs(u[order[k]]);
    }
    const auto x = foot_ellipsoid(e, y);

    Eigen::Vector3d foot_local;
    for (int k = 0; k < 3; ++k) {
        foot_local[order[k]] = std::copysign(x[k], u[order[k]]);
    }
    return FootPoint{(foot_local - u).norm(), g.to_scene(foot_local)};
}

double orthogonal_distance(const Point3& p, const EllipsoidModel& m) { return closest_point(p, m).distance; }

double cas_distance(const Point3& p, const EllipsoidModel& m, double lambda) {
    return combine(lambda, axial_distance(p, m), sampson_distance(p, m));
}

double evaluate_metric(const MetricKind& kind, const Point3& p, const EllipsoidModel& m) {
    switch (kind.tag()) {
        case MetricTag::Algebraic: return algebraic_distance(p, m);
        case MetricTag::Sampson: return sampson_distance(p, m);
        case MetricTag::Orthogonal: return orthogonal_distance(p, m);
        case MetricTag::Axial: return axial_distance(p, m);
        case MetricTag::CAS: return cas_distance(p, m, kind.lambda());
        case MetricTag::SampsonPlusOrthogonal:
            return combine(kind.lambda(), sampson_distance(p, m), orthogonal_distance(p, m));
        case MetricTag::AxialPlusOrthogonal:
            return combine(kind.lambda(), axial_distance(p, m), orthogonal_distance(p, m));
    }
    throw Error(ErrorCode::InvalidArgument, "unknown metric tag");
}

double metric_or_infinity(const MetricKind& kind, const Point3& p, const EllipsoidModel& m) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind.tag()) {
        case MetricTag::Sampson: return try_sampson_distance(p, m).value_or(inf);
        case MetricTag::CAS: {
            const auto sampson = try_sampson_distance(p, m);
            return sampson ? combine(kind.lambda(), axial_distance(p, m), *sampson) : inf;
        }
        case MetricTag::SampsonPlusOrthogonal: {
            const auto sampson = try_sampson_distance(p, m);
            return sampson ? combine(kind.lambda(), *sampson, orthogonal_distance(p, m)) : inf;
        }
        default: return evaluate_metric(kind, p, m);
    }
}

}  // namespace ellfit
