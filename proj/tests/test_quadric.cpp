#include "ellfit/error.hpp"
#include "ellfit/model_io.hpp"
#include "ellfit/quadric.hpp"
#include "ellfit/synth.hpp"
#include "testing/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ellfit {
namespace {

using testing::random_geometry;
using testing::sorted;

Vector10 raw(std::initializer_list<double> v) {
    Vector10 q;
    std::copy(v.begin(), v.end(), q.data());
    return q;
}

TEST(QuadricCoefficients, NormalizesToUnitNormWithPositiveTrace) {
    const QuadricCoefficients q(raw({-2, -2, -2, 0, 0, 0, 0, 0, 0, -2}));
    EXPECT_NEAR(q.vector().norm(), 1.0, 1e-15);
    EXPECT_GT(q[0] + q[1] + q[2], 0.0);
    EXPECT_EQ(q, QuadricCoefficients::unit_sphere());
}

TEST(QuadricCoefficients, RejectsZeroAndNonFinite) {
    EXPECT_THROW(QuadricCoefficients(Vector10::Zero()), Error);
    Vector10 bad = Vector10::Ones();
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(QuadricCoefficients{bad}, Error);
}

TEST(CoeffsToMatrix, UnitSphereIsScaledDiagonal) {
    const QuadricMatrix Q = coeffs_to_matrix(QuadricCoefficients::unit_sphere());
    const Eigen::Vector4d diag(0.5, 0.5, 0.5, -0.5);
    EXPECT_TRUE(Q.isApprox(QuadricMatrix(diag.asDiagonal()), 1e-15));
}

TEST(CoeffsToMatrix, AxisAlignedHasDiagonalBlock) {
    const QuadricCoefficients q(raw({1, 1, 1, 0, 0, 0, 0, 0, 0, 1}) / 2.0);
    const Eigen::Matrix3d block = coeffs_to_matrix(q).topLeftCorner<3, 3>();
    EXPECT_TRUE(block.isDiagonal());
}

TEST(CoeffsToMatrix, HomogeneousFormMatchesPolynomial) {
    Rng rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vector10 v;
        for (int i = 0; i < 10; ++i) v[i] = u(rng);
        const QuadricCoefficients q(v);
        const QuadricMatrix Q = coeffs_to_matrix(q);
        EXPECT_TRUE(Q.isApprox(Q.transpose(), 1e-15));
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const Point3 p(u(rng), u(rng), u(rng));
            const Eigen::Vector4d xh(p.x(), p.y(), p.z(), 1.0);
            worst = std::max(worst, std::abs(xh.dot(Q * xh) - testing::polynomial_value(q.vector(), p)));
            worst = std::max(worst, std::abs(design_row(p).dot(q.vector()) - testing::polynomial_value(q.vector(), p)));
        }
        EXPECT_LT(worst, 1e-12);
    }
}

TEST(Decompose, UnitSphere) {
    const EllipsoidGeometry g = decompose(QuadricCoefficients::unit_sphere());
    EXPECT_TRUE(g.semiaxes.isApprox(Eigen::Vector3d::Ones(), 1e-12));
    EXPECT_LT(g.center.norm(), 1e-12);
    EXPECT_LT(g.translation.norm(), 1e-12);
    EXPECT_TRUE((g.rotation * g.rotation.transpose()).isIdentity(1e-12));
    EXPECT_NEAR(g.rotation.determinant(), 1.0, 1e-12);
}

TEST(Decompose, AxisAlignedSemiaxesRoundTrip) {
    const auto g0 = EllipsoidGeometry::from_center(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), {1, 2, 3});
    const EllipsoidGeometry g = decompose(geometry_to_coeffs(g0));
    EXPECT_TRUE(sorted(g.semiaxes).isApprox(Eigen::Vector3d(1, 2, 3), 1e-9));
    // Ascending eigenvalues give descending semiaxes.
    EXPECT_GE(g.semiaxes[0], g.semiaxes[1]);
    EXPECT_GE(g.semiaxes[1], g.semiaxes[2]);
}

TEST(Decompose, TranslatedSphere) {
    const Eigen::Vector3d c(1, -2, 0.5);
    const auto g0 = EllipsoidGeometry::from_center(Eigen::Matrix3d::Identity(), c, {2, 2, 2});
    const EllipsoidGeometry g = decompose(geometry_to_coeffs(g0));
    EXPECT_LT((g.center - c).norm(), 1e-9);
    EXPECT_TRUE(g.semiaxes.isApprox(Eigen::Vector3d(2, 2, 2), 1e-9));
    EXPECT_LT((g.center + g.rotation.transpose() * g.translation).norm(), 1e-12);
}

TEST(Decompose, RejectsHyperboloidAndEmptySurface) {
    try {
        decompose(QuadricCoefficients(raw({1, 1, -1, 0, 0, 0, 0, 0, 0, 1})));
        FAIL() << "hyperboloid accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotAnEllipsoid);
    }
    try {
        decompose(QuadricCoefficients(raw({1, 1, 1, 0, 0, 0, 0, 0, 0, -1})));
        FAIL() << "imaginary ellipsoid accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotAnEllipsoid);
    }
}

TEST(Decompose, NearSingularBlockIsDegenerate) {
    try {
        decompose(QuadricCoefficients(raw({1, 1, 1e-14, 0, 0, 0, 0, 0, 0, 1})));
        FAIL() << "degenerate block accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Degenerate);
    }
}

TEST(GeometryToCoeffs, UnitSphere) {
    const EllipsoidGeometry g;
    EXPECT_TRUE(geometry_to_coeffs(g).vector().isApprox(QuadricCoefficients::unit_sphere().vector(), 1e-15));
}

TEST(GeometryToCoeffs, AxisEndpointsLieOnSurface) {
    const auto g = EllipsoidGeometry::from_center(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), {1, 2, 3});
    const QuadricCoefficients q = geometry_to_coeffs(g);
    for (const Point3& p : {Point3(1, 0, 0), Point3(0, 2, 0), Point3(0, 0, 3)}) {
        EXPECT_LT(std::abs(design_row(p).dot(q.vector())), 1e-12);
    }
}

TEST(GeometryToCoeffs, RandomPlacementSurfaceSamples) {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const EllipsoidModel m(random_geometry(rng));
        const auto pts = sample_surface(m, 500, rng);
        for (const auto& p : pts) {
            ASSERT_LT(std::abs(design_row(p).dot(m.coeffs().vector())), 1e-10);
        }
    }
}

TEST(ValidateEllipsoid, Examples) {
    EXPECT_TRUE(validate_ellipsoid(QuadricCoefficients::unit_sphere()));
    EXPECT_FALSE(validate_ellipsoid(QuadricCoefficients(raw({1, 1, -1, 0, 0, 0, 0, 0, 0, 1}))));
    EXPECT_FALSE(validate_ellipsoid(QuadricCoefficients(raw({1, 1, 1, 0, 0, 0, 0, 0, 0, -1}))));
}

TEST(ValidateEllipsoid, SignInvariant) {
    Rng rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        Vector10 v;
        for (int i = 0; i < 10; ++i) v[i] = u(rng);
        EXPECT_EQ(validate_ellipsoid(QuadricCoefficients(v)), validate_ellipsoid(QuadricCoefficients(-v)));
    }
}

TEST(EllipsoidGeometry, FromCenterRejectsBadInput) {
    Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
    reflection(2, 2) = -1.0;
    EXPECT_THROW(EllipsoidGeometry::from_center(reflection, Eigen::Vector3d::Zero(), {1, 1, 1}), Error);
    EXPECT_THROW(EllipsoidGeometry::from_center(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), {1, 0, 1}),
                 Error);
}

// Round trip over many random geometries: center within 1e-9 absolute,
// semiaxis multiset within 1e-9 relative, proper rotation.
TEST(QuadricProperty, GeometryRoundTrip) {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const EllipsoidGeometry g0 = random_geometry(rng);
        const EllipsoidGeometry g = decompose(geometry_to_coeffs(g0));
        ASSERT_LT((g.center - g0.center).cwiseAbs().maxCoeff(), 1e-9) << "trial " << trial;
        const Eigen::Vector3d rel = (sorted(g.semiaxes) - sorted(g0.semiaxes)).cwiseQuotient(sorted(g0.semiaxes));
        ASSERT_LT(rel.cwiseAbs().maxCoeff(), 1e-9) << "trial " << trial;
        ASSERT_NEAR(g.rotation.determinant(), 1.0, 1e-9);
        ASSERT_TRUE((g.rotation * g.rotation.transpose()).isIdentity(1e-9));
    }
}

TEST(EllipsoidModel, CachedEvaluationMatchesPolynomial) {
    Rng rng(3);
    const EllipsoidModel m(random_geometry(rng));
    std::uniform_real_distribution<double> u(-15.0, 15.0);
    for (int k = 0; k < 100; ++k) {
        const Point3 p(u(rng), u(rng), u(rng));
        EXPECT_NEAR(m.evaluate(p), testing::polynomial_value(m.coeffs().vector(), p), 1e-11);
    }
}

TEST(ModelJson, RoundTripPreservesModel) {
    Rng rng(8);
    const EllipsoidModel m(random_geometry(rng));
    const auto doc = nlohmann::json::parse(model_to_json(m).dump());
    const EllipsoidModel back = model_from_json(doc);
    EXPECT_TRUE(back.coeffs().vector().isApprox(m.coeffs().vector(), 1e-15));
    EXPECT_EQ(doc.at("q").size(), 10u);
    EXPECT_EQ(doc.at("rotation").size(), 9u);
    const auto axes = doc.at("semiaxes").get<std::vector<double>>();
    EXPECT_GE(axes[0], axes[1]);
    EXPECT_GE(axes[1], axes[2]);
    const auto c = doc.at("center").get<std::vector<double>>();
    EXPECT_NEAR(c[0], m.geometry().center.x(), 1e-15 * std::max(1.0, std::abs(c[0])));
}

TEST(ModelJson, MalformedDocumentIsParseError) {
    try {
        model_from_json(nlohmann::json{{"q", {1, 2, 3}}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
    }
}

}  // namespace
}  // namespace ellfit
