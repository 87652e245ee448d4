#pragma once

// Pinhole camera model: intrinsics, camera-to-world pose, forward projection
// into pixel space and inverse projection of depth samples.

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "crossproj/error.hpp"

namespace crossproj {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat4 = Eigen::Matrix4d;

/// Pinhole intrinsics. Pixel (u, v) has its center at integer coordinates.
struct Intrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    void validate() const {
        if (!(width > 0 && height > 0)) {
            throw ValidationError("intrinsics: image size must be positive");
        }
        if (!(fx > 0.0 && fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
            throw ValidationError("intrinsics: focal lengths must be positive and finite");
        }
        if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
            std::ostringstream msg;
            msg << "intrinsics: principal point (" << cx << ", " << cy
                << ") outside image " << width << "x" << height;
            throw ValidationError(msg.str());
        }
    }

    Mat3 matrix() const {
        Mat3 k;
        k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
        return k;
    }
};

/// Camera-to-world rigid transform.
struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static constexpr double kOrthonormalTolerance = 1e-6;

    static Pose from_matrix(const Mat4& camera_to_world) {
        const Eigen::RowVector4d last = camera_to_world.row(3);
        if ((last - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > kOrthonormalTolerance) {
            throw ValidationError("pose: last row of a rigid transform must be 0 0 0 1");
        }
        Pose pose;
        pose.rotation = camera_to_world.topLeftCorner<3, 3>();
        pose.translation = camera_to_world.topRightCorner<3, 1>();
        return pose;
    }

    Mat4 matrix() const {
        Mat4 t = Mat4::Identity();
        t.topLeftCorner<3, 3>() = rotation;
        t.topRightCorner<3, 1>() = translation;
        return t;
    }

    void validate() const {
        if (!rotation.allFinite() || !translation.allFinite()) {
            throw ValidationError("pose: non-finite entries");
        }
        const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
        const double det = rotation.determinant();
        if (ortho > kOrthonormalTolerance || std::abs(det - 1.0) > kOrthonormalTolerance) {
            std::ostringstream msg;
            msg << "pose: rotation is not orthonormal with determinant +1 (|R^T R - I|max = " << ortho
                << ", det = " << det << ")";
            throw ValidationError(msg.str());
        }
    }
};

/// K * [R | t] with [R | t] the world-to-camera transform, i.e. the inverse of
/// the stored camera-to-world pose.
inline Mat34 compose_m(const Intrinsics& intrinsics, const Pose& pose) {
    pose.validate();
    const Mat3 r_wc = pose.rotation.transpose();
    Mat34 extrinsic;
    extrinsic.leftCols<3>() = r_wc;
    extrinsic.col(3) = -r_wc * pose.translation;
    return intrinsics.matrix() * extrinsic;
}

/// Result of a forward projection. `depth` is the camera-space z (the
/// homogeneous w). Points with depth <= 0 are flagged rather than rejected;
/// their u, v are NaN when depth is exactly zero.
struct Projection {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;

    bool in_front() const noexcept { return depth > 0.0; }
};

/// Nearest-integer rounding used for every pixel lookup (halves round up).
/// Saturates for values outside the int32 range; NaN maps to INT32_MIN.
inline std::int32_t nearest_pixel(double x) noexcept {
    constexpr double lo = static_cast<double>(std::numeric_limits<std::int32_t>::min());
    constexpr double hi = static_cast<double>(std::numeric_limits<std::int32_t>::max());
    if (!(x == x)) return std::numeric_limits<std::int32_t>::min();
    const double r = std::floor(x + 0.5);
    if (r <= lo) return std::numeric_limits<std::int32_t>::min();
    if (r >= hi) return std::numeric_limits<std::int32_t>::max();
    return static_cast<std::int32_t>(r);
}

/// Immutable pinhole camera. Thread-safe for concurrent reads.
class Camera {
public:
    Camera(const Intrinsics& intrinsics, const Pose& pose) : intrinsics_(intrinsics), pose_(pose) {
        intrinsics_.validate();
        m_ = compose_m(intrinsics_, pose_);
    }

    const Intrinsics& intrinsics() const noexcept { return intrinsics_; }
    const Pose& pose() const noexcept { return pose_; }
    const Mat34& m() const noexcept { return m_; }
    int width() const noexcept { return intrinsics_.width; }
    int height() const noexcept { return intrinsics_.height; }
    Vec3 center() const { return pose_.translation; }

    Projection project(const Vec3& point) const noexcept {
        const Vec3 h = m_.leftCols<3>() * point + m_.col(3);
        Projection p;
        p.depth = h.z();
        if (h.z() != 0.0) {
            p.u = h.x() / h.z();
            p.v = h.y() / h.z();
        } else {
            p.u = std::numeric_limits<double>::quiet_NaN();
            p.v = std::numeric_limits<double>::quiet_NaN();
        }
        return p;
    }

    /// World point seen at pixel (u, v) with camera-space z equal to `depth`.
    Vec3 unproject(int u, int v, double depth) const {
        if (!(depth > 0.0) || !std::isfinite(depth)) {
            throw ValidationError("unproject: depth must be positive and finite");
        }
        if (u < 0 || v < 0 || u >= width() || v >= height()) {
            std::ostringstream msg;
            msg << "unproject: pixel (" << u << ", " << v << ") outside " << width() << "x" << height();
            throw RangeError(msg.str());
        }
        return unproject_unchecked(static_cast<double>(u), static_cast<double>(v), depth);
    }

    /// Continuous-coordinate inverse of project(); no bounds or sign checks.
    Vec3 unproject_unchecked(double u, double v, double depth) const noexcept {
        const Vec3 cam((u - intrinsics_.cx) / intrinsics_.fx * depth,
                       (v - intrinsics_.cy) / intrinsics_.fy * depth, depth);
        return pose_.rotation * cam + pose_.translation;
    }

    /// World-space direction of the ray through (u, v), scaled so that its
    /// camera-space z component is 1. A ray parameter t then equals depth.
    Vec3 ray_direction(double u, double v) const noexcept {
        const Vec3 cam((u - intrinsics_.cx) / intrinsics_.fx, (v - intrinsics_.cy) / intrinsics_.fy, 1.0);
        return pose_.rotation * cam;
    }

    bool contains_pixel(std::int32_t u, std::int32_t v) const noexcept {
        return u >= 0 && v >= 0 && u < width() && v < height();
    }

    /// In front of the camera and inside the inclusive [0, size-1] pixel
    /// bounds after rounding to the nearest pixel center.
    bool in_frustum(const Vec3& point) const noexcept {
        const Projection p = project(point);
        if (!p.in_front()) return false;
        return contains_pixel(nearest_pixel(p.u), nearest_pixel(p.v));
    }

private:
    Intrinsics intrinsics_;
    Pose pose_;
    Mat34 m_;
};

/// Camera at `eye` looking at `target`, image y axis roughly along -`up`.
inline Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3(0, 0, 1)) {
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = forward.cross(up);
    if (right.norm() < 1e-9) right = forward.cross(Vec3(0, 1, 0));
    right.normalize();
    const Vec3 down = forward.cross(right);
    Pose pose;
    pose.rotation.col(0) = right;
    pose.rotation.col(1) = down;
    pose.rotation.col(2) = forward;
    pose.translation = eye;
    return pose;
}

}  // namespace crossproj
