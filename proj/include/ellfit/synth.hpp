#pragma once

// Random ellipsoids, surface sampling, noisy/outlier datasets and plain-text
// point-cloud files.

#include "ellfit/consensus.hpp"
#include "ellfit/quadric.hpp"
#include "ellfit/random.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace ellfit {

enum class DatasetKind { GaussianNoise, Outlier };

std::string_view dataset_kind_name(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

struct DatasetSpec {
    DatasetKind kind = DatasetKind::GaussianNoise;
    std::size_t point_count = 500;
    /// Noise std as a fraction of the mean semiaxis.
    double sigma_rel = 0.1;
    double outlier_fraction = 0.0;
    std::size_t instance_count = 10;
    std::uint64_t seed = 0;

    static DatasetSpec gaussian(double sigma_rel, std::uint64_t seed = 0);
    /// Outlier datasets carry sigma_rel = 0.25 noise on the surface points.
    static DatasetSpec outlier(double fraction, std::uint64_t seed = 0);

    void validate() const;
    /// round(outlier_fraction * point_count); zero for GaussianNoise.
    std::size_t outlier_count() const;
};

struct Instance {
    EllipsoidModel truth;
    std::vector<Point3> points;
    std::vector<PointLabel> ground_labels;
    double sigma = 0.0;  ///< absolute noise std used
};

/// Semiaxes uniform in [1, 5], rotation uniform on SO(3), center uniform in [-10, 10]^3.
EllipsoidModel random_ellipsoid(Rng& rng);

/// Uniformly distributed rotation (unit quaternion from three uniforms).
Eigen::Matrix3d random_rotation(Rng& rng);

/// Surface points from uniform directions on the unit sphere mapped through the semiaxes.
std::vector<Point3> sample_surface(const EllipsoidModel& m, std::size_t count, Rng& rng);

/// Builds one instance. Surface points come first, planted outliers last.
Instance make_instance(const DatasetSpec& spec, Rng& rng);

/// Instance `index` of `spec`, drawn from its own substream of spec.seed.
Instance make_instance(const DatasetSpec& spec, std::size_t index);

/// Uniform subset without replacement (input order kept); identity when small enough.
std::vector<Point3> downsample(std::span<const Point3> points, std::size_t target_count, Rng& rng);

/// One point per line, comma and/or whitespace separated; optional `x,y,z`
/// header; `#` starts a comment. Error(ParseError) names the line,
/// Error(IoError) on unreadable files.
std::vector<Point3> load_points(const std::filesystem::path& path);
std::vector<Point3> parse_points(std::string_view text);

/// Writes `x,y,z` with 17 significant digits.
void save_points(std::span<const Point3> points, const std::filesystem::path& path);

}  // namespace ellfit
