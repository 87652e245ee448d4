#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "crossproj/crossproj.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace crossproj;

namespace {

Camera simple_camera(int w = 100, int h = 100) { return Camera(Intrinsics{100, 100, 50, 50, w, h}, Pose{}); }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(ComposeM, IdentityPoseUnitIntrinsics) {
    const Mat34 m = compose_m(Intrinsics{1, 1, 0, 0, 1, 1}, Pose{});
    Mat34 expected = Mat34::Zero();
    expected.leftCols<3>() = Mat3::Identity();
    EXPECT_EQ(m, expected);
}

TEST(ComposeM, IdentityPoseRowZero) {
    const Mat34 m = compose_m(Intrinsics{100, 100, 50, 50, 100, 100}, Pose{});
    EXPECT_EQ(m.row(0), Eigen::RowVector4d(100, 0, 50, 0));
}

TEST(ComposeM, PureTranslationMatchesHomogeneousOracle) {
    Pose pose;
    pose.translation = Vec3(0, 0, -1);
    const Mat34 m = compose_m(Intrinsics{1, 1, 0, 0, 1, 1}, pose);
    EXPECT_DOUBLE_EQ(m(2, 3), 1.0);
    oracle::Mat4 c2w{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, -1}, {0, 0, 0, 1}}};
    const auto p = oracle::projection_matrix(oracle::k_matrix(1, 1, 0, 0), c2w);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) EXPECT_NEAR(m(r, c), p[r][c], 1e-12);
}

TEST(ComposeM, RejectsNonOrthonormalRotation) {
    Pose pose;
    pose.rotation(0, 0) = 1.1;
    EXPECT_THROW(compose_m(Intrinsics{}, pose), ValidationError);
    pose.rotation = Mat3::Identity();
    pose.rotation(2, 2) = -1.0;  // reflection, det = -1
    EXPECT_THROW(compose_m(Intrinsics{}, pose), ValidationError);
}

TEST(ComposeM, RandomCamerasMatchOracle) {
    gen::Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const auto c = gen::random_camera(rng);
        const auto p = oracle::projection_matrix(c.k, c.pose);
        for (int r = 0; r < 3; ++r)
            for (int k = 0; k < 4; ++k) EXPECT_LE(rel_err(c.camera.m()(r, k), p[r][k]), 1e-9);
    }
}

TEST(Intrinsics, Validation) {
    EXPECT_THROW(Camera(Intrinsics{0, 1, 0, 0, 10, 10}, Pose{}), ValidationError);
    EXPECT_THROW(Camera(Intrinsics{1, -1, 0, 0, 10, 10}, Pose{}), ValidationError);
    EXPECT_THROW(Camera(Intrinsics{1, 1, 10, 0, 10, 10}, Pose{}), ValidationError);
    EXPECT_THROW(Camera(Intrinsics{1, 1, 0, -0.1, 10, 10}, Pose{}), ValidationError);
    EXPECT_THROW(Camera(Intrinsics{1, 1, 0, 0, 0, 10}, Pose{}), ValidationError);
    EXPECT_NO_THROW(Camera(Intrinsics{1, 1, 9.99, 9.99, 10, 10}, Pose{}));
}

TEST(Pose, FromMatrixChecksLastRow) {
    Mat4 m = Mat4::Identity();
    m(3, 0) = 0.5;
    EXPECT_THROW(Pose::from_matrix(m), ValidationError);
}

TEST(Project, PrincipalAxis) {
    const Projection p = simple_camera().project(Vec3(0, 0, 1));
    EXPECT_DOUBLE_EQ(p.u, 50);
    EXPECT_DOUBLE_EQ(p.v, 50);
    EXPECT_DOUBLE_EQ(p.depth, 1);
}

TEST(Project, OffAxisMatchesOracle) {
    const Projection p = simple_camera().project(Vec3(1, 0, 2));
    EXPECT_DOUBLE_EQ(p.u, 100);
    EXPECT_DOUBLE_EQ(p.v, 50);
    EXPECT_DOUBLE_EQ(p.depth, 2);
    oracle::Mat4 id{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
    const auto o = oracle::homogeneous_project(oracle::k_matrix(100, 100, 50, 50), id, {1, 0, 2});
    EXPECT_DOUBLE_EQ(o.u, 100);
    EXPECT_DOUBLE_EQ(o.v, 50);
}

TEST(Project, BehindCameraIsFlagged) {
    const Projection p = simple_camera().project(Vec3(0, 0, -1));
    EXPECT_FALSE(p.in_front());
    const Projection z = simple_camera().project(Vec3(1, 1, 0));
    EXPECT_FALSE(z.in_front());
    EXPECT_TRUE(std::isnan(z.u));
}

TEST(Unproject, Examples) {
    const Camera cam = simple_camera(101, 101);
    EXPECT_TRUE(cam.unproject(50, 50, 1.0).isApprox(Vec3(0, 0, 1)));
    EXPECT_LT((cam.unproject(100, 50, 2.0) - Vec3(1, 0, 2)).norm(), 1e-12);
    EXPECT_THROW(cam.unproject(50, 50, 0.0), ValidationError);
    EXPECT_THROW(cam.unproject(50, 50, -1.0), ValidationError);
    EXPECT_THROW(cam.unproject(101, 50, 1.0), RangeError);
    EXPECT_THROW(cam.unproject(-1, 50, 1.0), RangeError);
}

TEST(InFrustum, Examples) {
    const Camera cam = simple_camera();
    EXPECT_TRUE(cam.in_frustum(Vec3(0, 0, 1)));
    EXPECT_FALSE(cam.in_frustum(Vec3(-0.53, 0, 1)));  // u = -3
    // Behind the camera the divide wraps the point back into range.
    EXPECT_FALSE(cam.in_frustum(Vec3(0, 0, -1)));
    EXPECT_FALSE(cam.in_frustum(Vec3(-0.1, -0.1, -1)));
}

TEST(InFrustum, InclusiveBoundsAfterRounding) {
    const Camera cam = simple_camera();
    EXPECT_TRUE(cam.in_frustum(cam.unproject_unchecked(-0.49, 10, 1)));
    EXPECT_FALSE(cam.in_frustum(cam.unproject_unchecked(-0.51, 10, 1)));
    EXPECT_TRUE(cam.in_frustum(cam.unproject_unchecked(99.49, 10, 1)));
    EXPECT_FALSE(cam.in_frustum(cam.unproject_unchecked(99.5, 10, 1)));
}

TEST(NearestPixel, HalvesRoundUpAndSaturate) {
    EXPECT_EQ(nearest_pixel(0.5), 1);
    EXPECT_EQ(nearest_pixel(-0.5), 0);
    EXPECT_EQ(nearest_pixel(-0.51), -1);
    EXPECT_EQ(nearest_pixel(1e300), std::numeric_limits<std::int32_t>::max());
    EXPECT_EQ(nearest_pixel(-1e300), std::numeric_limits<std::int32_t>::min());
    EXPECT_EQ(nearest_pixel(std::numeric_limits<double>::quiet_NaN()), std::numeric_limits<std::int32_t>::min());
}

TEST(GeometryProperty, RoundTripExactCoordinates) {
    gen::Rng rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto c = gen::random_camera(rng);
        const Vec3 p = gen::point_in_frustum(rng, c.camera);
        const Projection pr = c.camera.project(p);
        ASSERT_TRUE(pr.in_front());
        EXPECT_LT((c.camera.unproject_unchecked(pr.u, pr.v, pr.depth) - p).norm(), 1e-6);
    }
}

TEST(GeometryProperty, RoundTripIntegerPixels) {
    gen::Rng rng(12);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto c = gen::random_camera(rng);
        const int u = rng.integer(0, c.camera.width() - 1);
        const int v = rng.integer(0, c.camera.height() - 1);
        const double d = rng.uniform(0.1, 10);
        const Projection p = c.camera.project(c.camera.unproject(u, v, d));
        EXPECT_LE(std::abs(p.u - u), 0.5);
        EXPECT_LE(std::abs(p.v - v), 0.5);
        EXPECT_LE(std::abs(p.depth - d), 1e-6);
    }
}

TEST(GeometryProperty, ScaledMatrixLeavesPixelsUnchanged) {
    gen::Rng rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto c = gen::random_camera(rng);
        const Vec3 p = gen::point_in_frustum(rng, c.camera);
        const double s = rng.uniform(0.01, 100);
        const Mat34 m = s * c.camera.m();
        const Vec3 h = m.leftCols<3>() * p + m.col(3);
        const Projection pr = c.camera.project(p);
        EXPECT_LE(rel_err(h.x() / h.z(), pr.u), 1e-9);
        EXPECT_LE(rel_err(h.y() / h.z(), pr.v), 1e-9);
    }
}

TEST(GeometryProperty, NothingBehindCameraIsInFrustum) {
    gen::Rng rng(14);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto c = gen::random_camera(rng);
        const Vec3 front = gen::point_in_frustum(rng, c.camera);
        // Mirror the point through the camera center.
        const Vec3 behind = 2.0 * c.camera.center() - front;
        EXPECT_FALSE(c.camera.in_frustum(behind));
        EXPECT_TRUE(c.camera.in_frustum(front));
    }
}

TEST(LookAt, ProducesValidPoseFacingTarget) {
    const Pose pose = look_at(Vec3(3, 1, 2), Vec3(0, 0, 0));
    EXPECT_NO_THROW(pose.validate());
    const Camera cam(Intrinsics{100, 100, 50, 50, 101, 101}, pose);
    const Projection p = cam.project(Vec3(0, 0, 0));
    EXPECT_NEAR(p.u, 50, 1e-9);
    EXPECT_NEAR(p.v, 50, 1e-9);
    EXPECT_NEAR(p.depth, Vec3(3, 1, 2).norm(), 1e-9);
}
