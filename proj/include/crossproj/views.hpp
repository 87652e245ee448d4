#pragma once

// View bundles and the two view-selection policies: random sampling for
// training and central-view-per-group selection for evaluation.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crossproj/error.hpp"
#include "crossproj/geometry.hpp"
#include "crossproj/linker.hpp"

namespace crossproj {

/// Views used per scene when not told otherwise.
inline constexpr std::size_t kDefaultViewCount = 3;

struct View {
    std::int64_t frame_index = 0;
    std::string color_path;
    DepthMap depth;
    Camera camera;
};

/// Ordered views of one scene; frame indices strictly increase and every view
/// has the same image size.
class ViewBundle {
public:
    ViewBundle() = default;
    explicit ViewBundle(std::vector<View> views) : views_(std::move(views)) {
        for (std::size_t i = 0; i < views_.size(); ++i) {
            const View& v = views_[i];
            if (i > 0 && v.frame_index <= views_[i - 1].frame_index) {
                std::ostringstream msg;
                msg << "view bundle: frame indices must strictly increase (" << views_[i - 1].frame_index
                    << " then " << v.frame_index << ")";
                throw ValidationError(msg.str());
            }
            if (v.depth.width != v.camera.width() || v.depth.height != v.camera.height()) {
                throw ValidationError("view bundle: depth map and camera sizes differ");
            }
            if (i > 0 && (v.camera.width() != views_[0].camera.width() ||
                          v.camera.height() != views_[0].camera.height())) {
                throw ValidationError("view bundle: views differ in image size");
            }
        }
    }

    std::size_t size() const noexcept { return views_.size(); }
    const View& operator[](std::size_t i) const noexcept { return views_[i]; }
    const std::vector<View>& views() const noexcept { return views_; }

private:
    std::vector<View> views_;
};

namespace detail {

inline void check_view_count(std::size_t n, std::size_t available) {
    if (n > available) {
        std::ostringstream msg;
        msg << "view selection: requested " << n << " views from a bundle of " << available;
        throw ValidationError(msg.str());
    }
}

}  // namespace detail

/// n distinct positions out of `count`, drawn uniformly without replacement
/// from a generator seeded with `seed`. Returned in increasing order.
inline std::vector<std::size_t> sample_view_indices(std::size_t count, std::size_t n, std::uint64_t seed) {
    detail::check_view_count(n, count);
    std::vector<std::size_t> all(count);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> picked;
    picked.reserve(n);
    std::mt19937_64 rng(seed);
    std::sample(all.begin(), all.end(), std::back_inserter(picked), n, rng);
    return picked;
}

/// Splits `count` frames into n contiguous groups whose sizes differ by at
/// most one (earlier groups take the extra frames) and picks index
/// floor(len / 2) inside each group.
inline std::vector<std::size_t> central_view_indices(std::size_t count, std::size_t n) {
    detail::check_view_count(n, count);
    std::vector<std::size_t> picked;
    picked.reserve(n);
    if (n == 0) return picked;
    const std::size_t base = count / n;
    const std::size_t extra = count % n;
    std::size_t start = 0;
    for (std::size_t g = 0; g < n; ++g) {
        const std::size_t len = base + (g < extra ? 1 : 0);
        picked.push_back(start + len / 2);
        start += len;
    }
    return picked;
}

inline std::vector<View> select_views_train(const ViewBundle& bundle, std::size_t n, std::uint64_t seed) {
    std::vector<View> out;
    for (std::size_t i : sample_view_indices(bundle.size(), n, seed)) out.push_back(bundle[i]);
    return out;
}

inline std::vector<View> select_views_test(const ViewBundle& bundle, std::size_t n) {
    std::vector<View> out;
    for (std::size_t i : central_view_indices(bundle.size(), n)) out.push_back(bundle[i]);
    return out;
}

}  // namespace crossproj
