#pragma once

// Feature and label movement along a link matrix: voxel -> pixel scatter,
// pixel -> voxel gather, multi-view fusion and channel concatenation.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <type_traits>
#include <variant>
#include <vector>

#include "crossproj/error.hpp"
#include "crossproj/features.hpp"
#include "crossproj/geometry.hpp"
#include "crossproj/linker.hpp"
#include "crossproj/parallel.hpp"
#include "crossproj/voxelgrid.hpp"

namespace crossproj {

inline constexpr std::uint32_t kNoVoxel = std::numeric_limits<std::uint32_t>::max();

/// |d(u, v) - z'| for each visible voxel, evaluated at the voxel's pixel in
/// the camera's own (input) resolution. Rows that are not visible, or whose
/// depth sample is unusable, get +inf.
inline std::vector<double> link_residuals(const SparseVoxelGrid& grid, const Camera& camera, const DepthMap& depth,
                                          const LinkMatrix& link) {
    detail::check_depth_matches(camera, depth, "link_residuals");
    if (link.size() != grid.size()) throw ValidationError("link_residuals: link rows differ from voxel count");
    std::vector<double> residual(grid.size(), std::numeric_limits<double>::infinity());
    parallel_for(grid.size(), [&](std::size_t i) {
        if (link.rows[i].mask == 0) return;
        const Projection p = camera.project(grid.center_unchecked(i));
        if (!p.in_front()) return;
        const std::int32_t u = nearest_pixel(p.u);
        const std::int32_t v = nearest_pixel(p.v);
        if (!camera.contains_pixel(u, v)) return;
        const double d = depth.at(u, v);
        if (d > 0.0) residual[i] = std::abs(d - p.depth);
    });
    return residual;
}

/// For every pixel of the link's pixel space, the visible voxel that owns it:
/// smallest residual first, then smallest voxel index. kNoVoxel where no
/// visible voxel lands. Two atomic-min passes keep the result independent of
/// scheduling.
inline std::vector<std::uint32_t> resolve_pixel_owners(const LinkMatrix& link, std::span<const double> residuals) {
    if (residuals.size() != link.size()) throw ValidationError("resolve_pixel_owners: residual count mismatch");
    if (link.size() >= kNoVoxel) throw ValidationError("resolve_pixel_owners: too many voxels");
    if (link.width <= 0 || link.height <= 0) throw ValidationError("resolve_pixel_owners: empty pixel space");
    const std::size_t pixels = static_cast<std::size_t>(link.width) * static_cast<std::size_t>(link.height);
    auto pixel_of = [&](const LinkRow& r) -> std::size_t {
        return static_cast<std::size_t>(r.v) * static_cast<std::size_t>(link.width) + static_cast<std::size_t>(r.u);
    };
    auto in_range = [&](const LinkRow& r) {
        return r.mask != 0 && r.u >= 0 && r.v >= 0 && r.u < link.width && r.v < link.height;
    };

    // NaN residuals are treated as +inf; +inf has the largest non-NaN pattern.
    auto residual_bits = [&](std::size_t i) {
        const double r = residuals[i];
        return std::bit_cast<std::uint64_t>(r == r ? std::abs(r) : std::numeric_limits<double>::infinity());
    };

    constexpr std::uint64_t kUnset = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::uint64_t> best(pixels, kUnset);
    parallel_for(link.size(), [&](std::size_t i) {
        const LinkRow& r = link.rows[i];
        if (!in_range(r)) return;
        const std::uint64_t bits = residual_bits(i);
        std::atomic_ref<std::uint64_t> slot(best[pixel_of(r)]);
        std::uint64_t cur = slot.load(std::memory_order_relaxed);
        while (bits < cur && !slot.compare_exchange_weak(cur, bits, std::memory_order_relaxed)) {
        }
    });

    std::vector<std::uint32_t> owner(pixels, kNoVoxel);
    parallel_for(link.size(), [&](std::size_t i) {
        const LinkRow& r = link.rows[i];
        if (!in_range(r)) return;
        const std::size_t px = pixel_of(r);
        if (residual_bits(i) != best[px]) return;
        const auto idx = static_cast<std::uint32_t>(i);
        std::atomic_ref<std::uint32_t> slot(owner[px]);
        std::uint32_t cur = slot.load(std::memory_order_relaxed);
        while (idx < cur && !slot.compare_exchange_weak(cur, idx, std::memory_order_relaxed)) {
        }
    });
    return owner;
}

/// Writes voxel features into a link.width x link.height image at linked
/// pixels; pixels without a visible voxel are zero. Collisions go to the
/// voxel whose center best matches the depth sample, then the smaller index.
inline FeatureMap2D scatter_3d_to_2d(const FeatureSet3D& features, const LinkMatrix& link, const DepthMap& depth,
                                     const SparseVoxelGrid& grid, const Camera& camera) {
    if (features.n() != link.size() || grid.size() != link.size()) {
        std::ostringstream msg;
        msg << "scatter_3d_to_2d: " << features.n() << " feature rows, " << link.size() << " link rows, "
            << grid.size() << " voxels";
        throw ValidationError(msg.str());
    }
    const std::vector<double> residuals = link_residuals(grid, camera, depth, link);
    const std::vector<std::uint32_t> owner = resolve_pixel_owners(link, residuals);

    const std::size_t c = features.channels();
    FeatureMap2D out(link.width, link.height, c);
    auto dst = out.data();
    const auto src = features.data();
    parallel_for(owner.size(), [&](std::size_t px) {
        const std::uint32_t i = owner[px];
        if (i == kNoVoxel) return;
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(i * c), c,
                    dst.begin() + static_cast<std::ptrdiff_t>(px * c));
    });
    return out;
}

/// Reads image features at each voxel's linked pixel; invisible voxels get
/// the zero vector.
inline FeatureSet3D gather_2d_to_3d(const FeatureMap2D& features, const LinkMatrix& link) {
    if (features.width() != link.width || features.height() != link.height) {
        std::ostringstream msg;
        msg << "gather_2d_to_3d: feature map " << features.width() << "x" << features.height()
            << " does not match link pixel space " << link.width << "x" << link.height;
        throw ValidationError(msg.str());
    }
    const std::size_t c = features.channels();
    FeatureSet3D out(link.size(), c);
    auto dst = out.data();
    const auto src = features.data();
    parallel_for(link.size(), [&](std::size_t i) {
        const LinkRow& r = link.rows[i];
        if (r.mask == 0) return;
        if (r.u < 0 || r.v < 0 || r.u >= link.width || r.v >= link.height) {
            return;  // rejected by LinkMatrix::validate; never read out of bounds
        }
        const std::size_t px = features.pixel_index(r.u, r.v);
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(px * c), c,
                    dst.begin() + static_cast<std::ptrdiff_t>(i * c));
    });
    return out;
}

// ---------------------------------------------------------------------------
// View fusion

/// Per-view, per-voxel scalar weights, broadcast over channels.
struct FusionWeights {
    std::vector<std::vector<double>> per_view;  // R x N

    static constexpr double kSumTolerance = 1e-6;

    void validate(std::span<const std::vector<std::uint8_t>> validity) const {
        if (per_view.size() != validity.size()) {
            throw ValidationError("fusion weights: view count differs from validity masks");
        }
        const std::size_t n = validity.empty() ? 0 : validity.front().size();
        for (const auto& w : per_view) {
            if (w.size() != n) throw ValidationError("fusion weights: row count differs from voxel count");
        }
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            bool any_valid = false;
            for (std::size_t r = 0; r < per_view.size(); ++r) {
                const double w = per_view[r][i];
                if (!(w >= 0.0) || !std::isfinite(w)) {
                    std::ostringstream msg;
                    msg << "fusion weights: negative or non-finite weight at view " << r << ", voxel " << i;
                    throw ValidationError(msg.str());
                }
                if (validity[r][i] != 0) {
                    any_valid = true;
                    sum += w;
                } else if (w != 0.0) {
                    std::ostringstream msg;
                    msg << "fusion weights: nonzero weight for invalid view " << r << " at voxel " << i;
                    throw ValidationError(msg.str());
                }
            }
            if (any_valid && std::abs(sum - 1.0) > kSumTolerance) {
                std::ostringstream msg;
                msg << "fusion weights: weights of voxel " << i << " sum to " << sum << ", expected 1";
                throw ValidationError(msg.str());
            }
        }
    }
};

struct UniformFusion {};
struct MaxFusion {};
using FusionPolicy = std::variant<UniformFusion, MaxFusion, FusionWeights>;

/// Combines back-projected features of R views into one row per voxel.
/// Explicit weights give the weighted sum; uniform averages the valid views;
/// max takes the channelwise maximum over valid views. A voxel valid in no
/// view fuses to zero.
inline FeatureSet3D fuse_views(std::span<const FeatureSet3D> per_view,
                               std::span<const std::vector<std::uint8_t>> validity, const FusionPolicy& policy) {
    if (per_view.empty()) throw ValidationError("fuse_views: need at least one view");
    if (validity.size() != per_view.size()) throw ValidationError("fuse_views: one validity mask per view required");
    const std::size_t n = per_view.front().n();
    const std::size_t c = per_view.front().channels();
    for (std::size_t r = 0; r < per_view.size(); ++r) {
        if (per_view[r].n() != n || per_view[r].channels() != c) {
            std::ostringstream msg;
            msg << "fuse_views: view " << r << " has shape " << per_view[r].n() << "x" << per_view[r].channels()
                << ", expected " << n << "x" << c;
            throw ValidationError(msg.str());
        }
        if (validity[r].size() != n) throw ValidationError("fuse_views: validity mask length differs from N");
    }
    if (const auto* w = std::get_if<FusionWeights>(&policy)) w->validate(validity);

    const std::size_t views = per_view.size();
    FeatureSet3D out(n, c);
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            parallel_for(n, [&](std::size_t i) {
                auto dst = out.row(i);
                if constexpr (std::is_same_v<P, MaxFusion>) {
                    bool any = false;
                    for (std::size_t r = 0; r < views; ++r) {
                        if (validity[r][i] == 0) continue;
                        const auto src = per_view[r].row(i);
                        for (std::size_t k = 0; k < c; ++k) dst[k] = any ? std::max(dst[k], src[k]) : src[k];
                        any = true;
                    }
                } else {
                    std::size_t count = 0;
                    for (std::size_t r = 0; r < views; ++r) count += validity[r][i] != 0 ? 1 : 0;
                    if (count == 0) return;
                    const double scale = std::is_same_v<P, UniformFusion> ? 1.0 / static_cast<double>(count) : 1.0;
                    for (std::size_t k = 0; k < c; ++k) {
                        double sum = 0.0;
                        for (std::size_t r = 0; r < views; ++r) {
                            if (validity[r][i] == 0) continue;
                            double weight = 1.0;
                            if constexpr (std::is_same_v<P, FusionWeights>) weight = p.per_view[r][i];
                            sum += weight * static_cast<double>(per_view[r].row(i)[k]);
                        }
                        dst[k] = static_cast<float>(sum * scale);
                    }
                }
            });
        },
        policy);
    return out;
}

// ---------------------------------------------------------------------------
// Labels

/// Label specialization of scatter_3d_to_2d; empty pixels are kVoidLabel.
inline LabelImage paint_labels_3d_to_2d(std::span<const Label> labels, const LinkMatrix& link, const DepthMap& depth,
                                        const SparseVoxelGrid& grid, const Camera& camera) {
    if (labels.size() != link.size() || grid.size() != link.size()) {
        throw ValidationError("paint_labels_3d_to_2d: label, link and voxel counts differ");
    }
    const std::vector<double> residuals = link_residuals(grid, camera, depth, link);
    const std::vector<std::uint32_t> owner = resolve_pixel_owners(link, residuals);
    LabelImage out(link.width, link.height);
    for (std::size_t px = 0; px < owner.size(); ++px) {
        if (owner[px] != kNoVoxel) out.values[px] = labels[owner[px]];
    }
    return out;
}

/// Label specialization of gather_2d_to_3d; invisible voxels get kVoidLabel.
inline std::vector<Label> paint_labels_2d_to_3d(const LabelImage& image, const LinkMatrix& link) {
    if (image.width != link.width || image.height != link.height) {
        throw ValidationError("paint_labels_2d_to_3d: label image does not match link pixel space");
    }
    std::vector<Label> out(link.size(), kVoidLabel);
    for (std::size_t i = 0; i < link.size(); ++i) {
        const LinkRow& r = link.rows[i];
        if (r.mask == 0 || r.u < 0 || r.v < 0 || r.u >= link.width || r.v >= link.height) continue;
        out[i] = image.at(r.u, r.v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Concatenation

/// Channelwise concatenation, a's channels first.
inline FeatureSet3D concat_features(const FeatureSet3D& a, const FeatureSet3D& b) {
    if (a.n() != b.n()) throw ValidationError("concat_features: row counts differ");
    const std::size_t ca = a.channels();
    const std::size_t cb = b.channels();
    FeatureSet3D out(a.n(), ca + cb);
    for (std::size_t i = 0; i < a.n(); ++i) {
        auto dst = out.row(i);
        std::copy(a.row(i).begin(), a.row(i).end(), dst.begin());
        std::copy(b.row(i).begin(), b.row(i).end(), dst.begin() + static_cast<std::ptrdiff_t>(ca));
    }
    return out;
}

inline FeatureMap2D concat_features(const FeatureMap2D& a, const FeatureMap2D& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw ValidationError("concat_features: spatial shapes differ");
    }
    const std::size_t ca = a.channels();
    const std::size_t cb = b.channels();
    FeatureMap2D out(a.width(), a.height(), ca + cb);
    for (int v = 0; v < a.height(); ++v) {
        for (int u = 0; u < a.width(); ++u) {
            auto dst = out.at(u, v);
            std::copy(a.at(u, v).begin(), a.at(u, v).end(), dst.begin());
            std::copy(b.at(u, v).begin(), b.at(u, v).end(), dst.begin() + static_cast<std::ptrdiff_t>(ca));
        }
    }
    return out;
}

}  // namespace crossproj
