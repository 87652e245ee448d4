#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <vector>

#include "crossproj/error.hpp"

namespace crossproj {

using Label = std::uint16_t;

/// Reserved label meaning "no semantic assignment".
inline constexpr Label kVoidLabel = 65535;

/// N x C voxel features, row-major.
class FeatureSet3D {
public:
    FeatureSet3D() = default;
    FeatureSet3D(std::size_t n, std::size_t channels) : n_(n), channels_(channels), data_(n * channels, 0.0f) {}
    FeatureSet3D(std::size_t n, std::size_t channels, std::vector<float> data)
        : n_(n), channels_(channels), data_(std::move(data)) {
        if (data_.size() != n_ * channels_) {
            std::ostringstream msg;
            msg << "feature set: " << data_.size() << " values for shape " << n_ << "x" << channels_;
            throw ValidationError(msg.str());
        }
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t channels() const noexcept { return channels_; }
    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }
    std::vector<float>& storage() noexcept { return data_; }

    std::span<const float> row(std::size_t i) const noexcept { return {data_.data() + i * channels_, channels_}; }
    std::span<float> row(std::size_t i) noexcept { return {data_.data() + i * channels_, channels_}; }

    bool all_finite() const noexcept {
        for (float x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    friend bool operator==(const FeatureSet3D&, const FeatureSet3D&) = default;

private:
    std::size_t n_ = 0;
    std::size_t channels_ = 0;
    std::vector<float> data_;
};

/// H x W x C image features, row-major with channels innermost.
class FeatureMap2D {
public:
    FeatureMap2D() = default;
    FeatureMap2D(int width, int height, std::size_t channels) : width_(width), height_(height), channels_(channels) {
        check_dims();
        data_.assign(pixel_count() * channels_, 0.0f);
    }
    FeatureMap2D(int width, int height, std::size_t channels, std::vector<float> data)
        : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
        check_dims();
        if (data_.size() != pixel_count() * channels_) {
            throw ValidationError("feature map: value count does not match H x W x C");
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    std::size_t pixel_index(int u, int v) const noexcept {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
    }
    std::span<const float> at(int u, int v) const noexcept {
        return {data_.data() + pixel_index(u, v) * channels_, channels_};
    }
    std::span<float> at(int u, int v) noexcept { return {data_.data() + pixel_index(u, v) * channels_, channels_}; }

    friend bool operator==(const FeatureMap2D&, const FeatureMap2D&) = default;

private:
    void check_dims() const {
        if (width_ <= 0 || height_ <= 0) throw ValidationError("feature map: dimensions must be positive");
    }

    int width_ = 0;
    int height_ = 0;
    std::size_t channels_ = 0;
    std::vector<float> data_;
};

/// H x W label raster; kVoidLabel marks unassigned pixels.
struct LabelImage {
    int width = 0;
    int height = 0;
    std::vector<Label> values;

    LabelImage() = default;
    LabelImage(int w, int h, Label fill = kVoidLabel)
        : width(w), height(h), values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
        if (w <= 0 || h <= 0) throw ValidationError("label image: dimensions must be positive");
    }

    Label at(int u, int v) const noexcept {
        return values[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)];
    }
    Label& at(int u, int v) noexcept {
        return values[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)];
    }

    friend bool operator==(const LabelImage&, const LabelImage&) = default;
};

}  // namespace crossproj
