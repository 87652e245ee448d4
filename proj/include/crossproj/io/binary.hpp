#pragma once

// BPV (voxel grid), BPL (link matrix) and BPF (f32 tensor) containers.
// All fields are little-endian and packed. Readers check magic, version and
// the byte budget implied by the header before allocating anything.

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "crossproj/error.hpp"
#include "crossproj/features.hpp"
#include "crossproj/linker.hpp"
#include "crossproj/voxelgrid.hpp"

namespace crossproj::io {

inline constexpr std::uint32_t kFormatVersion = 1;

namespace detail {

/// Little-endian field writer over an ostream.
class LeWriter {
public:
    explicit LeWriter(std::ostream& out) : out_(out) {}

    void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
    void magic(const char (&m)[5]) { bytes(m, 4); }
    void u8(std::uint8_t x) { bytes(&x, 1); }
    void u16(std::uint16_t x) { put<2>(x); }
    void u32(std::uint32_t x) { put<4>(x); }
    void i32(std::int32_t x) { put<4>(static_cast<std::uint32_t>(x)); }
    void u64(std::uint64_t x) { put<8>(x); }
    void f32(float x) { put<4>(std::bit_cast<std::uint32_t>(x)); }
    void f64(double x) { put<8>(std::bit_cast<std::uint64_t>(x)); }

    void finish(const std::string& what) {
        out_.flush();
        if (!out_) throw IoError("failed writing " + what);
    }

private:
    template <std::size_t N, typename U>
    void put(U x) {
        std::array<unsigned char, N> b{};
        for (std::size_t i = 0; i < N; ++i) b[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xFFu);
        bytes(b.data(), N);
    }

    std::ostream& out_;
};

/// Little-endian field reader that tracks how many bytes the stream still
/// holds, so header-declared sizes can be checked before allocation.
class LeReader {
public:
    LeReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {
        const auto start = in_.tellg();
        if (start != std::istream::pos_type(-1)) {
            in_.seekg(0, std::ios::end);
            const auto end = in_.tellg();
            in_.seekg(start);
            if (end != std::istream::pos_type(-1) && end >= start) {
                remaining_ = static_cast<std::uint64_t>(end - start);
                sized_ = true;
            }
        }
        in_.clear();
    }

    std::uint64_t remaining() const noexcept { return remaining_; }

    void bytes(void* data, std::size_t n) {
        if (n > remaining_) fail("truncated");
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated");
        remaining_ -= n;
    }

    void expect_magic(const char (&m)[5]) {
        char got[4];
        bytes(got, 4);
        if (std::memcmp(got, m, 4) != 0) fail(std::string("bad magic, expected \"") + m + "\"");
    }
    void expect_version() {
        const std::uint32_t v = u32();
        if (v != kFormatVersion) fail("unsupported version " + std::to_string(v));
    }

    std::uint8_t u8() {
        std::uint8_t x;
        bytes(&x, 1);
        return x;
    }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get<2>()); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get<4>()); }
    std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get<4>())); }
    std::uint64_t u64() { return get<8>(); }
    float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get<4>())); }
    double f64() { return std::bit_cast<double>(get<8>()); }

    /// Throws unless `count` records of `record_bytes` each fit in the rest
    /// of the stream.
    void require(std::uint64_t count, std::uint64_t record_bytes, const char* section) {
        if (record_bytes != 0 && count > remaining_ / record_bytes) {
            fail(std::string(section) + " needs more bytes than the file holds");
        }
    }

    void expect_end() {
        const bool more = sized_ ? remaining_ != 0 : in_.peek() != std::char_traits<char>::eof();
        if (more) fail("trailing bytes after payload");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(what_ + ": " + msg); }

private:
    template <std::size_t N>
    std::uint64_t get() {
        std::array<unsigned char, N> b{};
        bytes(b.data(), N);
        std::uint64_t x = 0;
        for (std::size_t i = 0; i < N; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return x;
    }

    std::istream& in_;
    std::string what_;
    std::uint64_t remaining_ = std::numeric_limits<std::uint64_t>::max();
    bool sized_ = false;
};

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// BPV: voxel grid

inline void write_bpv(std::ostream& out, const SparseVoxelGrid& grid) {
    detail::LeWriter w(out);
    w.magic("BPV1");
    w.u32(kFormatVersion);
    w.f64(grid.voxel_size());
    for (int k = 0; k < 3; ++k) w.f64(grid.origin()[k]);
    w.u64(grid.size());
    w.u32(static_cast<std::uint32_t>(grid.channels()));
    w.u8(grid.has_labels() ? 1 : 0);
    for (const VoxelCoord& c : grid.coords()) {
        for (int k = 0; k < 3; ++k) w.i32(c[k]);
    }
    for (float x : grid.features().data()) w.f32(x);
    for (Label l : grid.labels()) w.u16(l);
    w.finish("BPV");
}

inline SparseVoxelGrid read_bpv(std::istream& in) {
    detail::LeReader r(in, "BPV");
    r.expect_magic("BPV1");
    r.expect_version();
    const double voxel_size = r.f64();
    Vec3 origin;
    for (int k = 0; k < 3; ++k) origin[k] = r.f64();
    const std::uint64_t n = r.u64();
    const std::uint32_t c = r.u32();
    const std::uint8_t has_labels = r.u8();
    if (has_labels > 1) r.fail("has_labels must be 0 or 1");
    // Per-voxel record size cannot overflow: c < 2^32.
    const std::uint64_t record = 12 + 4 * static_cast<std::uint64_t>(c) + (has_labels ? 2 : 0);
    r.require(n, record, "voxel payload");
    if (c > 0 && n > std::numeric_limits<std::size_t>::max() / c) r.fail("feature count overflows");

    std::vector<VoxelCoord> coords(n);
    for (auto& v : coords) {
        for (int k = 0; k < 3; ++k) v[k] = r.i32();
    }
    std::vector<float> features(n * c);
    for (auto& x : features) x = r.f32();
    std::vector<Label> labels(has_labels ? n : 0);
    for (auto& l : labels) l = r.u16();
    r.expect_end();
    return SparseVoxelGrid(origin, voxel_size, std::move(coords), FeatureSet3D(n, c, std::move(features)),
                           std::move(labels));
}

// ---------------------------------------------------------------------------
// BPL: link matrix

inline void write_bpl(std::ostream& out, const LinkMatrix& link) {
    detail::LeWriter w(out);
    w.magic("BPL1");
    w.u32(kFormatVersion);
    w.u64(link.size());
    w.u32(static_cast<std::uint32_t>(link.width));
    w.u32(static_cast<std::uint32_t>(link.height));
    for (const LinkRow& row : link.rows) {
        w.i32(row.u);
        w.i32(row.v);
        w.u8(row.mask);
    }
    w.finish("BPL");
}

inline LinkMatrix read_bpl(std::istream& in) {
    detail::LeReader r(in, "BPL");
    r.expect_magic("BPL1");
    r.expect_version();
    const std::uint64_t n = r.u64();
    const std::uint32_t width = r.u32();
    const std::uint32_t height = r.u32();
    constexpr auto kMaxDim = static_cast<std::uint32_t>(std::numeric_limits<std::int32_t>::max());
    if (width == 0 || height == 0 || width > kMaxDim || height > kMaxDim) r.fail("invalid pixel space dimensions");
    r.require(n, 9, "link rows");

    LinkMatrix link;
    link.width = static_cast<int>(width);
    link.height = static_cast<int>(height);
    link.rows.resize(n);
    for (auto& row : link.rows) {
        row.u = r.i32();
        row.v = r.i32();
        row.mask = r.u8();
        if (row.mask > 1) r.fail("mask must be 0 or 1");
    }
    r.expect_end();
    link.validate();
    return link;
}

// ---------------------------------------------------------------------------
// BPF: f32 tensor

struct Tensor {
    std::vector<std::uint64_t> dims;
    std::vector<float> data;

    std::uint64_t element_count() const {
        std::uint64_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline constexpr std::uint32_t kMaxTensorDims = 16;

inline void write_bpf(std::ostream& out, const Tensor& t) {
    if (t.dims.empty()) throw ValidationError("BPF: scalars (ndims = 0) are not supported");
    if (t.dims.size() > kMaxTensorDims) throw ValidationError("BPF: too many dimensions");
    if (t.element_count() != t.data.size()) throw ValidationError("BPF: data size does not match dims");
    detail::LeWriter w(out);
    w.magic("BPF1");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) w.u64(d);
    for (float x : t.data) w.f32(x);
    w.finish("BPF");
}

inline Tensor read_bpf(std::istream& in) {
    detail::LeReader r(in, "BPF");
    r.expect_magic("BPF1");
    r.expect_version();
    const std::uint32_t ndims = r.u32();
    if (ndims == 0) r.fail("ndims = 0 (scalars are not supported)");
    if (ndims > kMaxTensorDims) r.fail("ndims " + std::to_string(ndims) + " exceeds " + std::to_string(kMaxTensorDims));
    Tensor t;
    t.dims.resize(ndims);
    std::uint64_t count = 1;
    bool zero = false;
    for (auto& d : t.dims) {
        d = r.u64();
        if (d == 0) zero = true;
    }
    if (!zero) {
        for (auto d : t.dims) {
            if (count > std::numeric_limits<std::uint64_t>::max() / d) r.fail("element count overflows");
            count *= d;
        }
    } else {
        count = 0;
    }
    r.require(count, 4, "tensor data");
    t.data.resize(count);
    for (auto& x : t.data) x = r.f32();
    r.expect_end();
    return t;
}

/// Upper bound on the channel count accepted when viewing a tensor as features.
inline constexpr std::uint64_t kMaxChannels = std::uint64_t{1} << 20;

inline Tensor to_tensor(const FeatureSet3D& f) {
    return Tensor{{f.n(), f.channels()}, std::vector<float>(f.data().begin(), f.data().end())};
}

inline Tensor to_tensor(const FeatureMap2D& f) {
    return Tensor{{static_cast<std::uint64_t>(f.height()), static_cast<std::uint64_t>(f.width()), f.channels()},
                  std::vector<float>(f.data().begin(), f.data().end())};
}

/// [N, C] tensor as voxel features.
inline FeatureSet3D to_feature_set(Tensor t) {
    if (t.dims.size() != 2) throw ValidationError("BPF: voxel features need shape [N, C]");
    if (t.dims[1] > kMaxChannels) throw ValidationError("BPF: channel count out of range");
    return FeatureSet3D(t.dims[0], t.dims[1], std::move(t.data));
}

/// [H, W, C] tensor as an image feature map.
inline FeatureMap2D to_feature_map(Tensor t) {
    if (t.dims.size() != 3) throw ValidationError("BPF: image features need shape [H, W, C]");
    constexpr auto kMax = static_cast<std::uint64_t>(std::numeric_limits<int>::max());
    if (t.dims[0] == 0 || t.dims[1] == 0 || t.dims[0] > kMax || t.dims[1] > kMax || t.dims[2] > kMaxChannels) {
        throw ValidationError("BPF: image dimensions out of range");
    }
    return FeatureMap2D(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]), t.dims[2], std::move(t.data));
}

// Path overloads.

inline void write_bpv(const std::string& path, const SparseVoxelGrid& grid) {
    auto out = detail::open_out(path);
    write_bpv(out, grid);
}
inline SparseVoxelGrid read_bpv(const std::string& path) {
    auto in = detail::open_in(path);
    return read_bpv(in);
}
inline void write_bpl(const std::string& path, const LinkMatrix& link) {
    auto out = detail::open_out(path);
    write_bpl(out, link);
}
inline LinkMatrix read_bpl(const std::string& path) {
    auto in = detail::open_in(path);
    return read_bpl(in);
}
inline void write_bpf(const std::string& path, const Tensor& t) {
    auto out = detail::open_out(path);
    write_bpf(out, t);
}
inline Tensor read_bpf(const std::string& path) {
    auto in = detail::open_in(path);
    return read_bpf(in);
}

}  // namespace crossproj::io
