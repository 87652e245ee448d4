#pragma once

// Sparse voxel grids: voxelization of point clouds, voxel-center queries and
// stride coarsening for pyramid levels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include "crossproj/error.hpp"
#include "crossproj/features.hpp"
#include "crossproj/geometry.hpp"

namespace crossproj {

using VoxelCoord = std::array<std::int32_t, 3>;

/// Canonical voxel order: lexicographic on (z, y, x).
inline bool canonical_less(const VoxelCoord& a, const VoxelCoord& b) noexcept {
    if (a[2] != b[2]) return a[2] < b[2];
    if (a[1] != b[1]) return a[1] < b[1];
    return a[0] < b[0];
}

struct PointCloud {
    std::vector<Vec3> positions;
    std::vector<Vec3> colors;   // RGB in [0, 1]
    std::vector<Label> labels;  // empty, or one per point

    std::size_t size() const noexcept { return positions.size(); }
    bool has_labels() const noexcept { return !labels.empty(); }

    void validate() const {
        if (colors.size() != positions.size()) {
            throw ValidationError("point cloud: colors and positions differ in length");
        }
        if (!labels.empty() && labels.size() != positions.size()) {
            throw ValidationError("point cloud: labels and positions differ in length");
        }
        for (std::size_t i = 0; i < positions.size(); ++i) {
            if (!positions[i].allFinite()) {
                std::ostringstream msg;
                msg << "point cloud: non-finite coordinate at point " << i;
                throw ValidationError(msg.str());
            }
            const Vec3& c = colors[i];
            if (!(c.minCoeff() >= 0.0 && c.maxCoeff() <= 1.0)) {
                std::ostringstream msg;
                msg << "point cloud: color outside [0, 1] at point " << i;
                throw ValidationError(msg.str());
            }
        }
    }
};

class SparseVoxelGrid {
public:
    SparseVoxelGrid() = default;

    SparseVoxelGrid(Vec3 origin, double voxel_size, std::vector<VoxelCoord> coords, FeatureSet3D features,
                    std::vector<Label> labels = {})
        : origin_(origin),
          voxel_size_(voxel_size),
          coords_(std::move(coords)),
          features_(std::move(features)),
          labels_(std::move(labels)) {
        validate();
    }

    const Vec3& origin() const noexcept { return origin_; }
    double voxel_size() const noexcept { return voxel_size_; }
    std::size_t size() const noexcept { return coords_.size(); }
    bool empty() const noexcept { return coords_.empty(); }
    std::size_t channels() const noexcept { return features_.channels(); }
    const std::vector<VoxelCoord>& coords() const noexcept { return coords_; }
    const FeatureSet3D& features() const noexcept { return features_; }
    const std::vector<Label>& labels() const noexcept { return labels_; }
    bool has_labels() const noexcept { return !labels_.empty(); }

    /// World position of the center of voxel `i`.
    Vec3 voxel_center(std::size_t i) const {
        if (i >= coords_.size()) {
            std::ostringstream msg;
            msg << "voxel index " << i << " out of range for grid of " << coords_.size();
            throw RangeError(msg.str());
        }
        return center_unchecked(i);
    }

    Vec3 center_unchecked(std::size_t i) const noexcept {
        const VoxelCoord& c = coords_[i];
        return origin_ + voxel_size_ * Vec3(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5);
    }

    /// Same geometry, new per-voxel payload.
    SparseVoxelGrid with_features(FeatureSet3D features) const {
        return SparseVoxelGrid(origin_, voxel_size_, coords_, std::move(features), labels_);
    }
    SparseVoxelGrid with_labels(std::vector<Label> labels) const {
        return SparseVoxelGrid(origin_, voxel_size_, coords_, features_, std::move(labels));
    }

    bool is_canonical() const noexcept {
        return std::is_sorted(coords_.begin(), coords_.end(), canonical_less);
    }

    friend bool operator==(const SparseVoxelGrid& a, const SparseVoxelGrid& b) {
        return a.origin_ == b.origin_ && a.voxel_size_ == b.voxel_size_ && a.coords_ == b.coords_ &&
               a.features_ == b.features_ && a.labels_ == b.labels_;
    }

private:
    void validate() const {
        if (!(voxel_size_ > 0.0) || !std::isfinite(voxel_size_)) {
            throw ValidationError("voxel grid: voxel size must be positive and finite");
        }
        if (!origin_.allFinite()) throw ValidationError("voxel grid: origin must be finite");
        if (features_.n() != coords_.size()) {
            std::ostringstream msg;
            msg << "voxel grid: " << features_.n() << " feature rows for " << coords_.size() << " voxels";
            throw ValidationError(msg.str());
        }
        if (!labels_.empty() && labels_.size() != coords_.size()) {
            throw ValidationError("voxel grid: label count differs from voxel count");
        }
        std::vector<VoxelCoord> sorted = coords_;
        std::sort(sorted.begin(), sorted.end(), canonical_less);
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw ValidationError("voxel grid: duplicate voxel coordinates");
        }
    }

    Vec3 origin_ = Vec3::Zero();
    double voxel_size_ = 1.0;
    std::vector<VoxelCoord> coords_;
    FeatureSet3D features_;
    std::vector<Label> labels_;
};

namespace detail {

inline std::int32_t floor_to_index(double x) {
    const double f = std::floor(x);
    if (!(f >= static_cast<double>(std::numeric_limits<std::int32_t>::min()) &&
          f <= static_cast<double>(std::numeric_limits<std::int32_t>::max()))) {
        throw ValidationError("voxelize: voxel index overflows 32-bit range");
    }
    return static_cast<std::int32_t>(f);
}

inline std::int32_t floor_div(std::int32_t a, std::int32_t b) noexcept {
    const std::int32_t q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

// Most frequent label in [first, last); ties go to the smallest id.
template <typename It>
Label majority_label(It first, It last) {
    std::vector<Label> sorted(first, last);
    std::sort(sorted.begin(), sorted.end());
    Label best = kVoidLabel;
    std::size_t best_count = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        if (j - i > best_count) {
            best_count = j - i;
            best = sorted[i];
        }
        i = j;
    }
    return best;
}

}  // namespace detail

/// Voxel index of `p`: floor((p - origin) / voxel_size) per axis.
inline VoxelCoord voxel_index_of(const Vec3& p, const Vec3& origin, double voxel_size) {
    const Vec3 q = (p - origin) / voxel_size;
    return {detail::floor_to_index(q.x()), detail::floor_to_index(q.y()), detail::floor_to_index(q.z())};
}

/// Bins points into voxels. Each voxel's feature is the mean color of its
/// points; its label (when the cloud has labels) is the majority label with
/// ties going to the smallest id. Rows come out in canonical order, and the
/// averaging order inside a voxel is fixed so results do not depend on input
/// point order.
inline SparseVoxelGrid voxelize(const PointCloud& cloud, double voxel_size, const Vec3& origin = Vec3::Zero()) {
    if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
        throw ValidationError("voxelize: voxel size must be positive and finite");
    }
    if (!origin.allFinite()) throw ValidationError("voxelize: origin must be finite");
    cloud.validate();

    const std::size_t p = cloud.size();
    std::vector<VoxelCoord> keys(p);
    for (std::size_t i = 0; i < p; ++i) keys[i] = voxel_index_of(cloud.positions[i], origin, voxel_size);

    auto point_less = [&](std::size_t a, std::size_t b) {
        if (keys[a] != keys[b]) return canonical_less(keys[a], keys[b]);
        for (int k = 0; k < 3; ++k) {
            if (cloud.positions[a][k] != cloud.positions[b][k]) return cloud.positions[a][k] < cloud.positions[b][k];
        }
        for (int k = 0; k < 3; ++k) {
            if (cloud.colors[a][k] != cloud.colors[b][k]) return cloud.colors[a][k] < cloud.colors[b][k];
        }
        if (cloud.has_labels()) return cloud.labels[a] < cloud.labels[b];
        return false;
    };
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), point_less);

    std::vector<VoxelCoord> coords;
    std::vector<float> features;
    std::vector<Label> labels;
    std::vector<Label> members;
    for (std::size_t i = 0; i < p;) {
        std::size_t j = i;
        Vec3 sum = Vec3::Zero();
        members.clear();
        while (j < p && keys[order[j]] == keys[order[i]]) {
            sum += cloud.colors[order[j]];
            if (cloud.has_labels()) members.push_back(cloud.labels[order[j]]);
            ++j;
        }
        const Vec3 mean = sum / static_cast<double>(j - i);
        coords.push_back(keys[order[i]]);
        for (int k = 0; k < 3; ++k) features.push_back(static_cast<float>(mean[k]));
        if (cloud.has_labels()) labels.push_back(detail::majority_label(members.begin(), members.end()));
        i = j;
    }
    const std::size_t n = coords.size();
    return SparseVoxelGrid(origin, voxel_size, std::move(coords), FeatureSet3D(n, 3, std::move(features)),
                           std::move(labels));
}

struct CoarsenResult {
    SparseVoxelGrid grid;
    std::vector<std::size_t> fine_to_coarse;
};

/// Merges stride^3 blocks of voxels: coarse coordinate = floor(fine / stride),
/// coarse feature = mean of member fine features, coarse label = majority.
inline CoarsenResult coarsen(const SparseVoxelGrid& grid, std::int32_t stride) {
    if (stride < 1) throw ValidationError("coarsen: stride must be at least 1");
    const std::size_t n = grid.size();
    const std::size_t c = grid.channels();

    std::vector<VoxelCoord> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        const VoxelCoord& f = grid.coords()[i];
        keys[i] = {detail::floor_div(f[0], stride), detail::floor_div(f[1], stride), detail::floor_div(f[2], stride)};
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return canonical_less(keys[a], keys[b]); });

    CoarsenResult result;
    result.fine_to_coarse.assign(n, 0);
    std::vector<VoxelCoord> coords;
    std::vector<float> features;
    std::vector<Label> labels;
    std::vector<double> sum(c);
    std::vector<Label> members;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        std::fill(sum.begin(), sum.end(), 0.0);
        members.clear();
        while (j < n && keys[order[j]] == keys[order[i]]) {
            const auto row = grid.features().row(order[j]);
            for (std::size_t k = 0; k < c; ++k) sum[k] += row[k];
            if (grid.has_labels()) members.push_back(grid.labels()[order[j]]);
            result.fine_to_coarse[order[j]] = coords.size();
            ++j;
        }
        coords.push_back(keys[order[i]]);
        for (std::size_t k = 0; k < c; ++k) features.push_back(static_cast<float>(sum[k] / static_cast<double>(j - i)));
        if (grid.has_labels()) labels.push_back(detail::majority_label(members.begin(), members.end()));
        i = j;
    }
    const std::size_t m = coords.size();
    result.grid = SparseVoxelGrid(grid.origin(), grid.voxel_size() * stride, std::move(coords),
                                  FeatureSet3D(m, c, std::move(features)), std::move(labels));
    return result;
}

}  // namespace crossproj
