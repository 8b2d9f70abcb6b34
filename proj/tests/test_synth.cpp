#include "ellfit/distance.hpp"
#include "ellfit/error.hpp"
#include "ellfit/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

namespace ellfit {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ellfit_test_synth_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no ellfit::Error thrown";
    return ErrorCode::InvalidArgument;
}

TEST(RandomEllipsoid, ManyDrawsAreValidAndInRange) {
    Rng rng(1);
    double min_ratio = 1e9, max_ratio = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const EllipsoidModel m = random_ellipsoid(rng);
        ASSERT_TRUE(validate_ellipsoid(m.coeffs()));
        const auto& g = m.geometry();
        // Semiaxes are recovered through an eigendecomposition, hence the slack.
        EXPECT_GE(g.semiaxes.minCoeff(), 1.0 - 1e-9);
        EXPECT_LE(g.semiaxes.maxCoeff(), 5.0 + 1e-9);
        EXPECT_LE(g.center.cwiseAbs().maxCoeff(), 10.0 + 1e-9);
        const double ratio = g.semiaxes.maxCoeff() / g.semiaxes.minCoeff();
        min_ratio = std::min(min_ratio, ratio);
        max_ratio = std::max(max_ratio, ratio);
    }
    EXPECT_LT(min_ratio, 1.05);
    EXPECT_GT(max_ratio, 4.0);
}

TEST(RandomEllipsoid, DeterministicForSeed) {
    Rng a(42), b(42);
    EXPECT_EQ(random_ellipsoid(a).coeffs(), random_ellipsoid(b).coeffs());
}

TEST(RandomRotation, ProperOrthogonalAndUnbiased) {
    Rng rng(2);
    Eigen::Vector3d mean_axis = Eigen::Vector3d::Zero();
    constexpr int kDraws = 20000;
    for (int i = 0; i < kDraws; ++i) {
        const Eigen::Matrix3d R = random_rotation(rng);
        ASSERT_TRUE((R * R.transpose()).isIdentity(1e-12));
        ASSERT_NEAR(R.determinant(), 1.0, 1e-12);
        mean_axis += R.col(0);
    }
    // Each component of a uniform unit vector has variance 1/3.
    mean_axis /= kDraws;
    EXPECT_LT(mean_axis.cwiseAbs().maxCoeff(), 5.0 * std::sqrt(1.0 / 3.0 / kDraws));
}

TEST(SampleSurface, PointsLieOnSurface) {
    Rng rng(3);
    EXPECT_TRUE(sample_surface(random_ellipsoid(rng), 0, rng).empty());
    for (int trial = 0; trial < 20; ++trial) {
        const EllipsoidModel m = random_ellipsoid(rng);
        for (const auto& p : sample_surface(m, 200, rng)) {
            ASSERT_NEAR(scaling_factor(p, m).value, 1.0, 1e-9);
            ASSERT_LT(std::abs(design_row(p).dot(m.coeffs().vector())), 1e-10);
        }
    }
}

TEST(SampleSurface, UnitSphereMeanIsZero) {
    Rng rng(4);
    const EllipsoidModel sphere(QuadricCoefficients::unit_sphere());
    constexpr int kCount = 100000;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : sample_surface(sphere, kCount, rng)) mean += p;
    mean /= kCount;
    EXPECT_LT(mean.cwiseAbs().maxCoeff(), 5.0 * std::sqrt(1.0 / 3.0 / kCount));
}

TEST(MakeInstance, NoiseStatistics) {
    // Same RNG stream with and without noise yields identical surface points
    // up to the noise draws, so compare against the noise-free instance
    // through the truth model: residuals are scene-frame Gaussian offsets.
    DatasetSpec spec = DatasetSpec::gaussian(0.2, 5);
    spec.point_count = 100000;
    const Instance inst = make_instance(spec, 0);
    ASSERT_EQ(inst.points.size(), 100000u);
    EXPECT_NEAR(inst.sigma, 0.2 * inst.truth.geometry().semiaxes.mean(), 1e-12);

    Rng surface_rng = make_rng(spec.seed, 0);
    const EllipsoidModel truth = random_ellipsoid(surface_rng);
    const auto clean = sample_surface(truth, spec.point_count, surface_rng);
    ASSERT_EQ(truth.coeffs(), inst.truth.coeffs());

    Eigen::Vector3d sum = Eigen::Vector3d::Zero(), sq = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const Eigen::Vector3d d = inst.points[i] - clean[i];
        sum += d;
        sq += d.cwiseProduct(d);
    }
    const double n = static_cast<double>(clean.size());
    for (int j = 0; j < 3; ++j) {
        const double mean = sum[j] / n;
        const double sd = std::sqrt(sq[j] / n - mean * mean);
        EXPECT_NEAR(sd / inst.sigma, 1.0, 0.02) << "axis " << j;
        EXPECT_LT(std::abs(mean), 5.0 * inst.sigma / std::sqrt(n));
    }
    for (auto l : inst.ground_labels) ASSERT_EQ(l, PointLabel::Inlier);
}

TEST(MakeInstance, ZeroNoiseIsOnSurface) {
    const Instance inst = make_instance(DatasetSpec::gaussian(0.0, 6), 0);
    for (const auto& p : inst.points) ASSERT_LT(axial_distance(p, inst.truth), 1e-9);
}

TEST(MakeInstance, OutlierCountIsExact) {
    for (double f : {0.0, 0.1, 0.2, 0.3, 0.4, 0.123, 1.0}) {
        const DatasetSpec spec = DatasetSpec::outlier(f, 7);
        const Instance inst = make_instance(spec, 0);
        const auto planted = std::count(inst.ground_labels.begin(), inst.ground_labels.end(), PointLabel::Outlier);
        EXPECT_EQ(static_cast<std::size_t>(planted), static_cast<std::size_t>(std::llround(f * 500))) << f;
        EXPECT_EQ(inst.points.size(), 500u);
        // Surface points first, planted outliers last.
        const std::size_t inliers = 500 - static_cast<std::size_t>(planted);
        for (std::size_t i = 0; i < inst.points.size(); ++i) {
            ASSERT_EQ(inst.ground_labels[i], i < inliers ? PointLabel::Inlier : PointLabel::Outlier);
        }
    }
    EXPECT_EQ(DatasetSpec::outlier(0.4).outlier_count(), 200u);
}

TEST(MakeInstance, OutliersStayInInflatedBox) {
    const Instance inst = make_instance(DatasetSpec::outlier(0.4, 8), 0);
    const auto& g = inst.truth.geometry();
    Eigen::Vector3d half;
    for (int j = 0; j < 3; ++j) half[j] = g.rotation.col(j).cwiseProduct(g.semiaxes).norm();
    for (std::size_t i = 0; i < inst.points.size(); ++i) {
        if (inst.ground_labels[i] != PointLabel::Outlier) continue;
        const Eigen::Vector3d off = (inst.points[i] - g.center).cwiseAbs();
        EXPECT_TRUE((off.array() <= 2.0 * half.array() + 1e-9).all());
    }
}

TEST(MakeInstance, ZeroFractionMatchesGaussianDataset) {
    DatasetSpec outlier = DatasetSpec::outlier(0.0, 9);
    DatasetSpec gaussian = DatasetSpec::gaussian(0.25, 9);
    const Instance a = make_instance(outlier, 3);
    const Instance b = make_instance(gaussian, 3);
    EXPECT_EQ(a.truth.coeffs(), b.truth.coeffs());
    EXPECT_EQ(a.points, b.points);
    EXPECT_EQ(a.ground_labels, b.ground_labels);
}

TEST(MakeInstance, DeterministicAndIndependentInstances) {
    const DatasetSpec spec = DatasetSpec::outlier(0.2, 10);
    const Instance a = make_instance(spec, 4), b = make_instance(spec, 4), c = make_instance(spec, 5);
    EXPECT_EQ(a.points, b.points);
    EXPECT_NE(a.points, c.points);
}

TEST(DatasetSpec, Validation) {
    DatasetSpec spec;
    spec.point_count = 8;
    EXPECT_EQ(code_of([&] { spec.validate(); }), ErrorCode::InvalidArgument);
    spec = DatasetSpec::outlier(1.5);
    EXPECT_EQ(code_of([&] { spec.validate(); }), ErrorCode::InvalidArgument);
    spec = DatasetSpec::gaussian(-0.1);
    EXPECT_EQ(code_of([&] { spec.validate(); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(parse_dataset_kind("outlier"), DatasetKind::Outlier);
    EXPECT_EQ(parse_dataset_kind(dataset_kind_name(DatasetKind::GaussianNoise)), DatasetKind::GaussianNoise);
    EXPECT_EQ(code_of([] { parse_dataset_kind("uniform"); }), ErrorCode::InvalidArgument);
}

TEST(Downsample, SubsetIdentityAndDeterminism) {
    Rng rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Point3> pts;
    for (int i = 0; i < 1000; ++i) pts.emplace_back(i, u(rng), u(rng));

    Rng a(5), b(5);
    const auto sub = downsample(pts, 500, a);
    ASSERT_EQ(sub.size(), 500u);
    std::set<double> seen;
    double last = -1.0;
    for (const auto& p : sub) {
        EXPECT_TRUE(seen.insert(p.x()).second);
        EXPECT_GT(p.x(), last);  // input order kept
        last = p.x();
        EXPECT_EQ(p, pts[static_cast<std::size_t>(p.x())]);
    }
    EXPECT_EQ(sub, downsample(pts, 500, b));

    const std::vector<Point3> small(pts.begin(), pts.begin() + 10);
    EXPECT_EQ(downsample(small, 50, rng), small);
    EXPECT_EQ(code_of([&] { downsample(small, 0, rng); }), ErrorCode::InvalidArgument);
}

TEST(PointFiles, ParseFormats) {
    const auto pts = parse_points("x,y,z\n1,2,3\n  4 5 6  \n# comment\n\n7;8\t9 # trailing\n-1e-3,+2.5,3E2\n");
    ASSERT_EQ(pts.size(), 4u);
    EXPECT_EQ(pts[0], Point3(1, 2, 3));
    EXPECT_EQ(pts[1], Point3(4, 5, 6));
    EXPECT_EQ(pts[2], Point3(7, 8, 9));
    EXPECT_EQ(pts[3], Point3(-1e-3, 2.5, 300));
    EXPECT_EQ(parse_points("X Y Z\r\n1 1 1\r\n").size(), 1u);
    EXPECT_TRUE(parse_points("").empty());
}

TEST(PointFiles, MalformedRowNamesTheLine) {
    const auto message = [](std::string_view text) {
        try {
            parse_points(text);
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ParseError);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("1,2,3\n4,5\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("x,y,z\n1,2,3\n\n1,two,3\n").find("line 4"), std::string::npos);
    EXPECT_NE(message("1,2,3,4\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("1,2,nan\n").find("line 1"), std::string::npos);
    // A header is only recognized before the first data row.
    EXPECT_NE(message("1,2,3\nx,y,z\n").find("line 2"), std::string::npos);
}

TEST(PointFiles, SaveLoadRoundTrip) {
    const fs::path dir = scratch_dir("roundtrip");
    const Instance inst = make_instance(DatasetSpec::outlier(0.3, 12), 0);
    save_points(inst.points, dir / "pts.csv");
    const auto back = load_points(dir / "pts.csv");
    ASSERT_EQ(back.size(), inst.points.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_LE((back[i] - inst.points[i]).cwiseAbs().maxCoeff(),
                  1e-15 * std::max(1.0, inst.points[i].cwiseAbs().maxCoeff()));
    }
    std::ifstream in(dir / "pts.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "x,y,z");
    fs::remove_all(dir);
}

TEST(PointFiles, MissingFileIsIoError) {
    EXPECT_EQ(code_of([] { load_points("/nonexistent/dir/points.csv"); }), ErrorCode::IoError);
    EXPECT_EQ(code_of([] { save_points(std::vector<Point3>{}, "/nonexistent/dir/out.csv"); }), ErrorCode::IoError);
}

}  // namespace
}  // namespace ellfit
