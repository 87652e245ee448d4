#pragma once

// Reference computations for tests. Nothing here calls the library's
// projection, grouping or visibility code; each oracle recomputes its answer
// from first principles with plain arrays.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

namespace oracle {

using Vec3 = std::array<double, 3>;
using Mat4 = std::array<std::array<double, 4>, 4>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// General 4x4 inverse by Gauss-Jordan elimination with partial pivoting.
inline Mat4 invert4(Mat4 a) {
    Mat4 inv{};
    for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double p = a[col][col];
        for (int c = 0; c < 4; ++c) {
            a[col][c] /= p;
            inv[col][c] /= p;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (int c = 0; c < 4; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

/// 3x4 projection [K | 0] * inverse(camera_to_world), by explicit products.
inline std::array<std::array<double, 4>, 3> projection_matrix(const Mat3& k, const Mat4& camera_to_world) {
    const Mat4 w2c = invert4(camera_to_world);
    std::array<std::array<double, 4>, 3> p{};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j) s += k[r][j] * w2c[j][c];
            p[r][c] = s;
        }
    }
    return p;
}

struct Projected {
    double u, v, w;
};

inline Projected homogeneous_project(const Mat3& k, const Mat4& camera_to_world, const Vec3& x) {
    const auto p = projection_matrix(k, camera_to_world);
    const double h[4] = {x[0], x[1], x[2], 1.0};
    double out[3] = {0, 0, 0};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) out[r] += p[r][c] * h[c];
    }
    return {out[0] / out[2], out[1] / out[2], out[2]};
}

inline Mat3 k_matrix(double fx, double fy, double cx, double cy) {
    return Mat3{{{fx, 0, cx}, {0, fy, cy}, {0, 0, 1}}};
}

/// Camera-to-world matrix from yaw / pitch / roll (radians) and a position.
inline Mat4 pose_from_euler(double yaw, double pitch, double roll, const Vec3& t) {
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cr = std::cos(roll), sr = std::sin(roll);
    const Mat3 rz{{{cy, -sy, 0}, {sy, cy, 0}, {0, 0, 1}}};
    const Mat3 ry{{{cp, 0, sp}, {0, 1, 0}, {-sp, 0, cp}}};
    const Mat3 rx{{{1, 0, 0}, {0, cr, -sr}, {0, sr, cr}}};
    auto mul = [](const Mat3& a, const Mat3& b) {
        Mat3 c{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
        return c;
    };
    const Mat3 r = mul(mul(rz, ry), rx);
    Mat4 m{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) m[i][j] = r[i][j];
        m[i][3] = t[i];
    }
    m[3] = {0, 0, 0, 1};
    return m;
}

/// Nearest integer with halves rounding up.
inline long long round_half_up(double x) { return static_cast<long long>(std::floor(x + 0.5)); }

// ---------------------------------------------------------------------------
// Grouping

using Key = std::tuple<long long, long long, long long>;

/// Brute-force voxel grouping: std::map keyed on (z, y, x) of the floored
/// coordinates, members listed in input order.
inline std::map<Key, std::vector<std::size_t>> group_points(const std::vector<Vec3>& points, double size,
                                                            const Vec3& origin) {
    std::map<Key, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < points.size(); ++i) {
        long long idx[3];
        for (int k = 0; k < 3; ++k) idx[k] = static_cast<long long>(std::floor((points[i][k] - origin[k]) / size));
        groups[{idx[2], idx[1], idx[0]}].push_back(i);
    }
    return groups;
}

// ---------------------------------------------------------------------------
// Boxes

struct Aabb {
    Vec3 lo, hi;
};

/// Smallest t in (t_min, t_max) where origin + t * dir enters the box.
inline std::optional<double> segment_entry(const Vec3& origin, const Vec3& dir, const Aabb& box, double t_min,
                                           double t_max) {
    double lo = t_min, hi = t_max;
    for (int k = 0; k < 3; ++k) {
        if (dir[k] == 0.0) {
            if (origin[k] < box.lo[k] || origin[k] > box.hi[k]) return std::nullopt;
            continue;
        }
        double a = (box.lo[k] - origin[k]) / dir[k];
        double b = (box.hi[k] - origin[k]) / dir[k];
        if (a > b) std::swap(a, b);
        lo = std::max(lo, a);
        hi = std::min(hi, b);
        if (lo > hi) return std::nullopt;
    }
    return lo;
}

/// Exhaustive nearest hit over all boxes for a ray, brute force.
inline std::optional<double> nearest_hit(const Vec3& origin, const Vec3& dir, const std::vector<Aabb>& boxes) {
    std::optional<double> best;
    for (const auto& b : boxes) {
        double lo = -INFINITY, hi = INFINITY;
        bool miss = false;
        for (int k = 0; k < 3 && !miss; ++k) {
            if (dir[k] == 0.0) {
                miss = origin[k] < b.lo[k] || origin[k] > b.hi[k];
                continue;
            }
            double a = (b.lo[k] - origin[k]) / dir[k];
            double c = (b.hi[k] - origin[k]) / dir[k];
            if (a > c) std::swap(a, c);
            lo = std::max(lo, a);
            hi = std::min(hi, c);
        }
        if (miss || lo > hi || hi <= 0) continue;
        const double t = lo > 0 ? lo : hi;
        if (!best || t < *best) best = t;
    }
    return best;
}

}  // namespace oracle
