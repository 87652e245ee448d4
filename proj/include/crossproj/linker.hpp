#pragma once

// Voxel-to-pixel link construction with depth-tested occlusion handling, the
// point-splat z-buffer it is checked against, and link remapping between
// pyramid levels.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "crossproj/error.hpp"
#include "crossproj/geometry.hpp"
#include "crossproj/parallel.hpp"
#include "crossproj/voxelgrid.hpp"

namespace crossproj {

/// Per-pixel camera-space z in meters; 0 marks an invalid sample.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    DepthMap() = default;
    DepthMap(int w, int h) : width(w), height(h) {
        if (w <= 0 || h <= 0) throw ValidationError("depth map: dimensions must be positive");
        values.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0);
    }

    double at(int u, int v) const noexcept {
        return values[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)];
    }
    double& at(int u, int v) noexcept {
        return values[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)];
    }

    void validate() const {
        if (width <= 0 || height <= 0) throw ValidationError("depth map: dimensions must be positive");
        if (values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw ValidationError("depth map: value count does not match dimensions");
        }
        for (double d : values) {
            if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("depth map: values must be finite and >= 0");
        }
    }

    friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

struct LinkRow {
    std::int32_t u = 0;
    std::int32_t v = 0;
    std::uint8_t mask = 0;

    friend bool operator==(const LinkRow&, const LinkRow&) = default;
};

/// One (u, v, mask) row per voxel, in voxel order. (u, v) index a
/// width x height pixel space; mask = 1 rows are always inside it.
struct LinkMatrix {
    int width = 0;
    int height = 0;
    std::vector<LinkRow> rows;

    std::size_t size() const noexcept { return rows.size(); }

    std::size_t visible_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(rows.begin(), rows.end(), [](const LinkRow& r) { return r.mask != 0; }));
    }

    std::vector<std::uint8_t> mask() const {
        std::vector<std::uint8_t> m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) m[i] = rows[i].mask;
        return m;
    }

    void validate() const {
        if (width <= 0 || height <= 0) throw ValidationError("link matrix: dimensions must be positive");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const LinkRow& r = rows[i];
            if (r.mask > 1) throw ValidationError("link matrix: mask must be 0 or 1");
            if (r.mask == 1 && (r.u < 0 || r.v < 0 || r.u >= width || r.v >= height)) {
                std::ostringstream msg;
                msg << "link matrix: visible row " << i << " at (" << r.u << ", " << r.v << ") outside " << width
                    << "x" << height;
                throw ValidationError(msg.str());
            }
        }
    }

    friend bool operator==(const LinkMatrix&, const LinkMatrix&) = default;
};

/// Depth-matching tolerance. Unset means "auto": the grid's voxel size.
struct LinkConfig {
    std::optional<double> delta;

    double resolve(const SparseVoxelGrid& grid) const {
        if (!delta) return grid.voxel_size();
        if (!(*delta > 0.0) || !std::isfinite(*delta)) {
            throw ValidationError("link config: delta must be positive");
        }
        return *delta;
    }
};

/// How a voxel relates to one view.
enum class Visibility : std::uint8_t {
    kVisible,        // in frustum and matches the depth map
    kOccluded,       // in frustum, but the depth map sees a different surface
    kOutOfFrustum,   // behind the camera or outside the image
    kNoDepth,        // in frustum, but the depth sample is invalid (0)
};

struct LinkStats {
    std::size_t visible = 0;
    std::size_t occluded = 0;
    std::size_t out_of_frustum = 0;
    std::size_t no_depth = 0;
};

namespace detail {

inline std::int32_t clamp_pixel(double x, int size) noexcept {
    const std::int32_t r = nearest_pixel(x);
    if (r == std::numeric_limits<std::int32_t>::min() && !(x == x)) return 0;
    return std::clamp<std::int32_t>(r, 0, size - 1);
}

inline void check_depth_matches(const Camera& camera, const DepthMap& depth, const char* op) {
    if (depth.width != camera.width() || depth.height != camera.height()) {
        std::ostringstream msg;
        msg << op << ": depth map " << depth.width << "x" << depth.height << " does not match camera "
            << camera.width() << "x" << camera.height();
        throw ValidationError(msg.str());
    }
    if (depth.values.size() != static_cast<std::size_t>(depth.width) * static_cast<std::size_t>(depth.height)) {
        throw ValidationError(std::string(op) + ": depth map value count does not match dimensions");
    }
}

inline Visibility evaluate_link(const Vec3& center, const Camera& camera, const DepthMap& depth, double delta,
                                LinkRow& row) noexcept {
    const Projection p = camera.project(center);
    row.u = clamp_pixel(p.u, camera.width());
    row.v = clamp_pixel(p.v, camera.height());
    row.mask = 0;
    if (!p.in_front()) return Visibility::kOutOfFrustum;
    const std::int32_t u = nearest_pixel(p.u);
    const std::int32_t v = nearest_pixel(p.v);
    if (!camera.contains_pixel(u, v)) return Visibility::kOutOfFrustum;
    const double d = depth.at(u, v);
    if (!(d > 0.0)) return Visibility::kNoDepth;
    if (std::abs(d - p.depth) <= delta) {
        row.mask = 1;
        return Visibility::kVisible;
    }
    return Visibility::kOccluded;
}

}  // namespace detail

/// Links every voxel center to its nearest pixel under `camera`. A row is
/// visible (mask = 1) iff the center is in front of the camera, lands inside
/// the image, the depth sample there is valid, and that sample is within
/// delta of the center's camera-space z. Invisible rows keep the projected
/// pixel clamped to the image.
inline LinkMatrix build_link(const SparseVoxelGrid& grid, const Camera& camera, const DepthMap& depth,
                             const LinkConfig& config = {}, LinkStats* stats = nullptr) {
    detail::check_depth_matches(camera, depth, "build_link");
    const double delta = config.resolve(grid);
    LinkMatrix link;
    link.width = camera.width();
    link.height = camera.height();
    link.rows.resize(grid.size());
    std::vector<Visibility> kinds(stats ? grid.size() : 0);
    parallel_for(grid.size(), [&](std::size_t i) {
        const Visibility k = detail::evaluate_link(grid.center_unchecked(i), camera, depth, delta, link.rows[i]);
        if (stats) kinds[i] = k;
    });
    if (stats) {
        *stats = LinkStats{};
        for (Visibility k : kinds) {
            switch (k) {
                case Visibility::kVisible: ++stats->visible; break;
                case Visibility::kOccluded: ++stats->occluded; break;
                case Visibility::kOutOfFrustum: ++stats->out_of_frustum; break;
                case Visibility::kNoDepth: ++stats->no_depth; break;
            }
        }
    }
    return link;
}

/// Classic point-splat z-buffer over voxel centers: each pixel keeps the
/// smallest positive z of the centers that round onto it; untouched pixels
/// stay 0. Concurrent writes resolve through an atomic min, so the result
/// does not depend on scheduling.
inline DepthMap render_depth(const SparseVoxelGrid& grid, const Camera& camera) {
    const int w = camera.width();
    const int h = camera.height();
    const std::size_t pixels = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    constexpr std::uint64_t kEmpty = std::bit_cast<std::uint64_t>(std::numeric_limits<double>::infinity());
    std::vector<std::uint64_t> zbuf(pixels, kEmpty);

    parallel_for(grid.size(), [&](std::size_t i) {
        const Projection p = camera.project(grid.center_unchecked(i));
        if (!p.in_front()) return;
        const std::int32_t u = nearest_pixel(p.u);
        const std::int32_t v = nearest_pixel(p.v);
        if (!camera.contains_pixel(u, v)) return;
        // Positive doubles order the same as their bit patterns.
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(p.depth);
        std::atomic_ref<std::uint64_t> slot(zbuf[static_cast<std::size_t>(v) * static_cast<std::size_t>(w) +
                                                 static_cast<std::size_t>(u)]);
        std::uint64_t cur = slot.load(std::memory_order_relaxed);
        while (bits < cur && !slot.compare_exchange_weak(cur, bits, std::memory_order_relaxed)) {
        }
    });

    DepthMap depth(w, h);
    for (std::size_t k = 0; k < pixels; ++k) {
        depth.values[k] = zbuf[k] == kEmpty ? 0.0 : std::bit_cast<double>(zbuf[k]);
    }
    return depth;
}

/// Rescales link coordinates to a level downsampled by `ratio`:
/// u' = min(floor(u / ratio), new_width - 1), likewise v. Masks are kept.
inline LinkMatrix remap_link(const LinkMatrix& link, std::int32_t ratio, int new_width, int new_height) {
    if (ratio < 1) throw ValidationError("remap_link: ratio must be at least 1");
    if (new_width <= 0 || new_height <= 0) throw ValidationError("remap_link: new dimensions must be positive");
    LinkMatrix out;
    out.width = new_width;
    out.height = new_height;
    out.rows.resize(link.rows.size());
    parallel_for(link.rows.size(), [&](std::size_t i) {
        const LinkRow& r = link.rows[i];
        LinkRow& o = out.rows[i];
        o.u = std::clamp<std::int32_t>(detail::floor_div(r.u, ratio), 0, new_width - 1);
        o.v = std::clamp<std::int32_t>(detail::floor_div(r.v, ratio), 0, new_height - 1);
        o.mask = r.mask;
    });
    return out;
}

/// Pixel dimension of a level downsampled by `ratio` (ceiling division).
inline int downsampled_size(int size, std::int32_t ratio) {
    if (ratio < 1) throw ValidationError("downsampled_size: ratio must be at least 1");
    return (size + ratio - 1) / ratio;
}

}  // namespace crossproj
