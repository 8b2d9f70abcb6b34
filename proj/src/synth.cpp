#include "ellfit/synth.hpp"

#include "ellfit/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

namespace ellfit {

namespace {

constexpr double kMinSemiaxis = 1.0;
constexpr double kMaxSemiaxis = 5.0;
constexpr double kCenterRange = 10.0;
constexpr double kOutlierBoxInflation = 2.0;

Eigen::Vector3d random_direction(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        const Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
        const double n = v.norm();
        if (n > 1e-12) {
            return v / n;
        }
    }
}

// Half extents of the axis-aligned bounding box of an ellipsoid.
Eigen::Vector3d half_extents(const EllipsoidGeometry& g) {
    Eigen::Vector3d h;
    for (int j = 0; j < 3; ++j) {
        h[j] = g.rotation.col(j).cwiseProduct(g.semiaxes).norm();
    }
    return h;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view dataset_kind_name(DatasetKind kind) {
    return kind == DatasetKind::GaussianNoise ? "gaussian" : "outlier";
}

DatasetKind parse_dataset_kind(std::string_view name) {
    if (name == "gaussian" || name == "gaussian-noise" || name == "noise") return DatasetKind::GaussianNoise;
    if (name == "outlier" || name == "outliers") return DatasetKind::Outlier;
    throw Error(ErrorCode::InvalidArgument, "unknown dataset kind '" + std::string(name) + "'");
}

DatasetSpec DatasetSpec::gaussian(double sigma_rel, std::uint64_t seed) {
    DatasetSpec spec;
    spec.kind = DatasetKind::GaussianNoise;
    spec.sigma_rel = sigma_rel;
    spec.seed = seed;
    return spec;
}

DatasetSpec DatasetSpec::outlier(double fraction, std::uint64_t seed) {
    DatasetSpec spec;
    spec.kind = DatasetKind::Outlier;
    spec.sigma_rel = 0.25;
    spec.outlier_fraction = fraction;
    spec.seed = seed;
    return spec;
}

void DatasetSpec::validate() const {
    if (point_count < 9) throw Error(ErrorCode::InvalidArgument, "point_count must be at least 9");
    if (!(outlier_fraction >= 0.0 && outlier_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "outlier_fraction must lie in [0, 1]");
    }
    if (!(sigma_rel >= 0.0) || !std::isfinite(sigma_rel)) {
        throw Error(ErrorCode::InvalidArgument, "sigma_rel must be finite and nonnegative");
    }
}

std::size_t DatasetSpec::outlier_count() const {
    if (kind != DatasetKind::Outlier) {
        return 0;
    }
    return static_cast<std::size_t>(std::llround(outlier_fraction * static_cast<double>(point_count)));
}

Eigen::Matrix3d random_rotation(Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u1 = unit(rng), u2 = unit(rng), u3 = unit(rng);
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const double t2 = 2.0 * std::numbers::pi * u2, t3 = 2.0 * std::numbers::pi * u3;
    return rotation_from_quaternion(b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3));
}

EllipsoidModel random_ellipsoid(Rng& rng) {
    std::uniform_real_distribution<double> axis(kMinSemiaxis, kMaxSemiaxis);
    std::uniform_real_distribution<double> coord(-kCenterRange, kCenterRange);
    const Eigen::Vector3d semiaxes(axis(rng), axis(rng), axis(rng));
    const Eigen::Matrix3d rotation = random_rotation(rng);
    const Eigen::Vector3d center(coord(rng), coord(rng), coord(rng));
    return EllipsoidModel(EllipsoidGeometry::from_center(rotation, center, semiaxes));
}

std::vector<Point3> sample_surface(const EllipsoidModel& m, std::size_t count, Rng& rng) {
    const auto& g = m.geometry();
    std::vector<Point3> points;
    points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        points.push_back(g.to_scene(random_direction(rng).cwiseProduct(g.semiaxes)));
    }
    return points;
}

Instance make_instance(const DatasetSpec& spec, Rng& rng) {
    spec.validate();
    EllipsoidModel truth = random_ellipsoid(rng);
    const auto& g = truth.geometry();

    const std::size_t outliers = spec.outlier_count();
    const std::size_t inliers = spec.point_count - outliers;
    const double sigma = spec.sigma_rel * g.semiaxes.mean();

    Instance inst{truth, sample_surface(truth, inliers, rng), {}, sigma};
    if (sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, sigma);
        for (Point3& p : inst.points) {
            p += Point3(noise(rng), noise(rng), noise(rng));
        }
    }
    inst.ground_labels.assign(inliers, PointLabel::Inlier);

    const Eigen::Vector3d half = kOutlierBoxInflation * half_extents(g);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::size_t i = 0; i < outliers; ++i) {
        const Eigen::Vector3d offset(unit(rng), unit(rng), unit(rng));
        inst.points.push_back(g.center + offset.cwiseProduct(half));
        inst.ground_labels.push_back(PointLabel::Outlier);
    }
    return inst;
}

Instance make_instance(const DatasetSpec& spec, std::size_t index) {
    Rng rng = make_rng(spec.seed, index);
    return make_instance(spec, rng);
}

std::vector<Point3> downsample(std::span<const Point3> points, std::size_t target_count, Rng& rng) {
    if (target_count == 0) {
        throw Error(ErrorCode::InvalidArgument, "downsample target must be at least 1");
    }
    if (points.size() <= target_count) {
        return {points.begin(), points.end()};
    }
    const auto indices = sample_minimal(points.size(), target_count, rng);
    std::vector<Point3> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        out.push_back(points[i]);
    }
    return out;
}

std::vector<Point3> parse_points(std::string_view text) {
    std::vector<Point3> points;
    std::size_t line_no = 0;
    bool seen_data = false;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }

        std::string cleaned(line);
        std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
        std::replace(cleaned.begin(), cleaned.end(), '\t', ' ');
        std::replace(cleaned.begin(), cleaned.end(), ';', ' ');

        if (!seen_data) {
            std::string lowered = cleaned;
            std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            std::istringstream header(lowered);
            std::string a, b, c, extra;
            if ((header >> a >> b >> c) && !(header >> extra) && a == "x" && b == "y" && c == "z") {
                seen_data = true;
                continue;
            }
        }

        std::istringstream fields(cleaned);
        std::string token;
        std::vector<double> values;
        while (fields >> token) {
            double v = 0.0;
            const auto* first = token.data();
            const auto* last = token.data() + token.size();
            if (*first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": invalid number '" + token + "'");
            }
            values.push_back(v);
        }
        if (values.size() != 3) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 3 coordinates, got " +
                                                   std::to_string(values.size()));
        }
        points.emplace_back(values[0], values[1], values[2]);
        seen_data = true;
    }
    return points;
}

std::vector<Point3> load_points(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw Error(ErrorCode::IoError, "failed reading '" + path.string() + "'");
    }
    return parse_points(buffer.str());
}

void save_points(std::span<const Point3> points, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    }
    out << "x,y,z\n" << std::setprecision(17);
    for (const Point3& p : points) {
        out << p.x() << ',' << p.y() << ',' << p.z() << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
    }
}

}  // namespace ellfit
