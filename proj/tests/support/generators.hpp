#pragma once

// Seeded random generators for property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "crossproj/crossproj.hpp"
#include "support/oracles.hpp"

namespace gen {

using crossproj::Camera;
using crossproj::Intrinsics;
using crossproj::Pose;
using crossproj::Vec3;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    bool coin() { return integer(0, 1) == 1; }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

struct CameraCase {
    Camera camera;
    oracle::Mat3 k;
    oracle::Mat4 pose;
};

inline CameraCase random_camera(Rng& rng) {
    const int w = rng.integer(16, 800);
    const int h = rng.integer(16, 600);
    const double fx = rng.uniform(50, 1200);
    const double fy = fx * rng.uniform(0.8, 1.25);
    const double cx = rng.uniform(0, w - 1);
    const double cy = rng.uniform(0, h - 1);
    const oracle::Vec3 t{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const oracle::Mat4 m =
        oracle::pose_from_euler(rng.uniform(-3.1, 3.1), rng.uniform(-1.5, 1.5), rng.uniform(-3.1, 3.1), t);
    crossproj::Mat4 em;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) em(r, c) = m[r][c];
    Camera cam(Intrinsics{fx, fy, cx, cy, w, h}, Pose::from_matrix(em));
    return {cam, oracle::k_matrix(fx, fy, cx, cy), m};
}

/// A world point in front of `camera` that projects inside its image, with
/// camera-space depth in [zmin, zmax].
inline Vec3 point_in_frustum(Rng& rng, const Camera& camera, double zmin = 0.1, double zmax = 10.0) {
    const double u = rng.uniform(-0.49, camera.width() - 0.51);
    const double v = rng.uniform(-0.49, camera.height() - 0.51);
    return camera.unproject_unchecked(u, v, rng.uniform(zmin, zmax));
}

inline oracle::Vec3 to_array(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

inline crossproj::PointCloud random_cloud(Rng& rng, std::size_t n, double extent, bool labels) {
    crossproj::PointCloud cloud;
    for (std::size_t i = 0; i < n; ++i) {
        cloud.positions.emplace_back(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                                     rng.uniform(-extent, extent));
        cloud.colors.emplace_back(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1));
        if (labels) cloud.labels.push_back(static_cast<crossproj::Label>(rng.integer(0, 5)));
    }
    return cloud;
}

inline crossproj::FeatureSet3D random_features(Rng& rng, std::size_t n, std::size_t c) {
    crossproj::FeatureSet3D f(n, c);
    for (auto& x : f.data()) x = static_cast<float>(rng.uniform(-1, 1));
    return f;
}

inline crossproj::FeatureMap2D random_map(Rng& rng, int w, int h, std::size_t c) {
    crossproj::FeatureMap2D f(w, h, c);
    for (auto& x : f.data()) x = static_cast<float>(rng.uniform(-1, 1));
    return f;
}

}  // namespace gen
