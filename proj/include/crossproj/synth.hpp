#pragma once

// Axis-aligned box scenes with closed-form ray casting. They provide exact
// depth for visibility tests and sampled surface clouds for voxelization.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "crossproj/error.hpp"
#include "crossproj/features.hpp"
#include "crossproj/geometry.hpp"
#include "crossproj/linker.hpp"
#include "crossproj/parallel.hpp"
#include "crossproj/voxelgrid.hpp"

namespace crossproj {

struct Box {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();
    Vec3 color = Vec3::Zero();
    Label label = 0;

    double surface_area() const {
        const Vec3 e = max - min;
        return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.x() * e.z());
    }
};

struct BoxScene {
    std::vector<Box> boxes;
    Vec3 room_min = Vec3::Constant(-std::numeric_limits<double>::infinity());
    Vec3 room_max = Vec3::Constant(std::numeric_limits<double>::infinity());
    double density = 20000.0;  // points per square meter

    void validate() const {
        if (!(density > 0.0) || !std::isfinite(density)) throw ValidationError("box scene: density must be positive");
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            const Box& b = boxes[i];
            if (!b.min.allFinite() || !b.max.allFinite() || (b.max - b.min).minCoeff() < 0.0) {
                std::ostringstream msg;
                msg << "box scene: box " << i << " has non-finite or inverted corners";
                throw ValidationError(msg.str());
            }
            if ((b.min - room_min).minCoeff() < 0.0 || (room_max - b.max).minCoeff() < 0.0) {
                std::ostringstream msg;
                msg << "box scene: box " << i << " leaves the room bounds";
                throw ValidationError(msg.str());
            }
            if (!(b.color.minCoeff() >= 0.0 && b.color.maxCoeff() <= 1.0)) {
                std::ostringstream msg;
                msg << "box scene: box " << i << " color outside [0, 1]";
                throw ValidationError(msg.str());
            }
        }
    }

    /// Axis-aligned bounds of all boxes; zero extent for an empty scene.
    std::pair<Vec3, Vec3> bounds() const {
        if (boxes.empty()) return {Vec3::Zero(), Vec3::Zero()};
        Vec3 lo = boxes.front().min;
        Vec3 hi = boxes.front().max;
        for (const Box& b : boxes) {
            lo = lo.cwiseMin(b.min);
            hi = hi.cwiseMax(b.max);
        }
        return {lo, hi};
    }
};

/// Ray parameter of the first surface hit of `origin + t * dir` (t > 0) on a
/// closed box, using the slab method. A ray starting inside the box reports
/// the exit point.
inline std::optional<double> ray_box_hit(const Vec3& origin, const Vec3& dir, const Box& box) noexcept {
    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        if (dir[k] == 0.0) {
            if (origin[k] < box.min[k] || origin[k] > box.max[k]) return std::nullopt;
            continue;
        }
        double t1 = (box.min[k] - origin[k]) / dir[k];
        double t2 = (box.max[k] - origin[k]) / dir[k];
        if (t1 > t2) std::swap(t1, t2);
        t_near = std::max(t_near, t1);
        t_far = std::min(t_far, t2);
    }
    if (t_near > t_far || t_far <= 0.0) return std::nullopt;
    return t_near > 0.0 ? t_near : t_far;
}

/// Uniform surface samples over every box face, about `density` points per
/// square meter (count per face = round(area * density)). Reproducible for a
/// given seed.
inline PointCloud sample_cloud(const BoxScene& scene, std::uint64_t seed) {
    scene.validate();
    double total_area = 0.0;
    for (const Box& b : scene.boxes) total_area += b.surface_area();
    if (!(total_area > 0.0)) throw ValidationError("sample_cloud: scene has zero surface area");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PointCloud cloud;
    for (const Box& b : scene.boxes) {
        const Vec3 e = b.max - b.min;
        for (int axis = 0; axis < 3; ++axis) {
            const int a1 = (axis + 1) % 3;
            const int a2 = (axis + 2) % 3;
            const double area = e[a1] * e[a2];
            const auto count = static_cast<std::size_t>(std::llround(area * scene.density));
            for (int side = 0; side < 2; ++side) {
                for (std::size_t k = 0; k < count; ++k) {
                    Vec3 p;
                    p[axis] = side == 0 ? b.min[axis] : b.max[axis];
                    p[a1] = b.min[a1] + unit(rng) * e[a1];
                    p[a2] = b.min[a2] + unit(rng) * e[a2];
                    cloud.positions.push_back(p);
                    cloud.colors.push_back(b.color);
                    cloud.labels.push_back(b.label);
                }
            }
        }
    }
    return cloud;
}

/// Depth, color and label images from casting one ray through each pixel
/// center. Pixels that hit nothing have depth 0, color 0 and kVoidLabel.
struct AnalyticRender {
    DepthMap depth;
    FeatureMap2D color;
    LabelImage labels;
};

inline AnalyticRender analytic_render(const BoxScene& scene, const Camera& camera) {
    const int w = camera.width();
    const int h = camera.height();
    AnalyticRender out{DepthMap(w, h), FeatureMap2D(w, h, 3), LabelImage(w, h)};
    const Vec3 origin = camera.center();
    parallel_for(
        static_cast<std::size_t>(h),
        [&](std::size_t row) {
            const int v = static_cast<int>(row);
            for (int u = 0; u < w; ++u) {
                // Camera-space z of the direction is 1, so t is the depth.
                const Vec3 dir = camera.ray_direction(u, v);
                double best = std::numeric_limits<double>::infinity();
                const Box* hit = nullptr;
                for (const Box& b : scene.boxes) {
                    const auto t = ray_box_hit(origin, dir, b);
                    if (t && *t < best) {
                        best = *t;
                        hit = &b;
                    }
                }
                if (hit == nullptr) continue;
                out.depth.at(u, v) = best;
                auto c = out.color.at(u, v);
                for (int k = 0; k < 3; ++k) c[k] = static_cast<float>(hit->color[k]);
                out.labels.at(u, v) = hit->label;
            }
        },
        1);
    return out;
}

inline DepthMap analytic_depth(const BoxScene& scene, const Camera& camera) {
    return analytic_render(scene, camera).depth;
}

/// `count` cameras on a ring around the scene, all looking at its center.
inline std::vector<Camera> orbit_cameras(const BoxScene& scene, std::size_t count, const Intrinsics& intrinsics) {
    const auto [lo, hi] = scene.bounds();
    const Vec3 center = 0.5 * (lo + hi);
    const double extent = std::max((hi - lo).norm(), 1.0);
    std::vector<Camera> cameras;
    cameras.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double angle = 2.0 * 3.14159265358979323846 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(count, 1));
        const Vec3 eye = center + Vec3(std::cos(angle) * extent, std::sin(angle) * extent, 0.4 * extent);
        cameras.emplace_back(intrinsics, look_at(eye, center));
    }
    return cameras;
}

/// Throughput workload: `n` random voxels filling a cube in front of an
/// identity-pose camera, random voxel and image features, and the z-buffer
/// depth of the grid.
struct BenchScene {
    SparseVoxelGrid grid;
    Camera camera;
    DepthMap depth;
    FeatureMap2D image;
};

inline BenchScene make_bench_scene(std::size_t n, int width, int height, std::size_t channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto side = static_cast<std::int64_t>(
        std::ceil(std::cbrt(2.0 * static_cast<double>(std::max<std::size_t>(n, 1)))));
    std::vector<std::int64_t> cells(static_cast<std::size_t>(side * side * side));
    std::iota(cells.begin(), cells.end(), std::int64_t{0});
    std::vector<std::int64_t> chosen;
    chosen.reserve(n);
    std::sample(cells.begin(), cells.end(), std::back_inserter(chosen), static_cast<std::ptrdiff_t>(n), rng);
    std::vector<VoxelCoord> coords(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t k = chosen[i];
        coords[i] = {static_cast<std::int32_t>(k % side), static_cast<std::int32_t>((k / side) % side),
                     static_cast<std::int32_t>(k / (side * side))};
    }
    std::sort(coords.begin(), coords.end(), canonical_less);

    std::uniform_real_distribution<float> unit(0.0f, 1.0f);
    std::vector<float> features(n * channels);
    for (auto& x : features) x = unit(rng);
    // The cube spans [-1, 1] x [-1, 1] x [2, 4]; its front face fills the image.
    const double voxel = 2.0 / static_cast<double>(side);
    SparseVoxelGrid grid(Vec3(-1.0, -1.0, 2.0), voxel, std::move(coords), FeatureSet3D(n, channels, std::move(features)));
    const double f = static_cast<double>(std::min(width, height));
    Camera camera(Intrinsics{f, f, (width - 1) / 2.0, (height - 1) / 2.0, width, height}, Pose{});
    DepthMap depth = render_depth(grid, camera);
    FeatureMap2D image(width, height, channels);
    for (auto& x : image.data()) x = unit(rng);
    return BenchScene{std::move(grid), std::move(camera), std::move(depth), std::move(image)};
}

}  // namespace crossproj
