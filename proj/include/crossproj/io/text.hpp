#pragma once

// Small text formats: intrinsics (3x3), camera-to-world pose (4x4), scene
// manifests and box scene descriptions.

#include <array>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "crossproj/error.hpp"
#include "crossproj/geometry.hpp"
#include "crossproj/io/pgm.hpp"
#include "crossproj/io/tokens.hpp"
#include "crossproj/synth.hpp"
#include "crossproj/views.hpp"

namespace crossproj::io {

namespace detail {

template <std::size_t N>
std::array<double, N> read_reals(std::istream& in, const char* what) {
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::array<double, N> out{};
    std::size_t count = 0;
    std::size_t line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '\n') ++line;
        if (text[i] == ' ' || text[i] == '\t' || text[i] == '\r' || text[i] == '\n') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != '\r' && text[j] != '\n') ++j;
        const std::string_view tok(text.data() + i, j - i);
        const auto v = parse_number<double>(tok);
        if (!v || !std::isfinite(*v)) {
            throw ParseError(std::string(what) + ": invalid number '" + std::string(tok) + "'", line);
        }
        if (count == N) throw ParseError(std::string(what) + ": more than " + std::to_string(N) + " values", line);
        out[count++] = *v;
        i = j;
    }
    if (count != N) {
        throw ParseError(std::string(what) + ": expected " + std::to_string(N) + " values, found " + std::to_string(count),
                         line);
    }
    return out;
}

inline std::string format_real(double x) {
    std::array<char, 40> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ptr);
}

inline std::ifstream open_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    return in;
}

inline std::ofstream create_text(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Intrinsics: fx 0 cx / 0 fy cy / 0 0 1. The image size is not part of the
// file and is supplied by the caller (usually from the depth map).

inline Intrinsics read_intrinsics(std::istream& in, int width, int height) {
    const auto k = detail::read_reals<9>(in, "intrinsics");
    if (k[1] != 0.0 || k[3] != 0.0 || k[6] != 0.0 || k[7] != 0.0 || k[8] != 1.0) {
        throw ParseError("intrinsics: expected layout 'fx 0 cx / 0 fy cy / 0 0 1'");
    }
    Intrinsics intr{k[0], k[4], k[2], k[5], width, height};
    intr.validate();
    return intr;
}

inline void write_intrinsics(std::ostream& out, const Intrinsics& k) {
    using detail::format_real;
    out << format_real(k.fx) << " 0 " << format_real(k.cx) << "\n"
        << "0 " << format_real(k.fy) << " " << format_real(k.cy) << "\n"
        << "0 0 1\n";
    if (!out) throw IoError("failed writing intrinsics");
}

// ---------------------------------------------------------------------------
// Pose: 16 reals, row-major 4x4 camera-to-world.

inline Pose read_pose(std::istream& in) {
    const auto v = detail::read_reals<16>(in, "pose");
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) m(r, c) = v[static_cast<std::size_t>(4 * r + c)];
    }
    Pose pose = Pose::from_matrix(m);
    pose.validate();
    return pose;
}

inline void write_pose(std::ostream& out, const Pose& pose) {
    const Mat4 m = pose.matrix();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) out << detail::format_real(m(r, c)) << (c == 3 ? '\n' : ' ');
    }
    if (!out) throw IoError("failed writing pose");
}

// ---------------------------------------------------------------------------
// Manifest: "intrinsics <path>" header, then "<frame> <color> <depth> <pose>"
// per view. Relative paths are resolved against the manifest's directory.

struct ManifestEntry {
    std::int64_t frame_index = 0;
    std::string color_path;
    std::string depth_path;
    std::string pose_path;
};

struct Manifest {
    std::string intrinsics_path;
    std::vector<ManifestEntry> entries;
};

inline Manifest read_manifest(std::istream& in, const std::filesystem::path& base = {}) {
    auto resolve = [&](std::string_view p) {
        const std::filesystem::path path(p);
        return (path.is_absolute() || base.empty() ? path : base / path).string();
    };
    Manifest m;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tok = detail::split_ws(line);
        if (tok.empty() || tok[0].front() == '#') continue;
        if (!header) {
            if (tok.size() != 2 || tok[0] != "intrinsics") {
                throw ParseError("manifest: first line must be 'intrinsics <path>'", line_no);
            }
            m.intrinsics_path = resolve(tok[1]);
            header = true;
            continue;
        }
        if (tok.size() != 4) throw ParseError("manifest: expected '<frame> <color> <depth> <pose>'", line_no);
        const auto frame = detail::parse_number<std::int64_t>(tok[0]);
        if (!frame) throw ParseError("manifest: invalid frame index '" + std::string(tok[0]) + "'", line_no);
        if (!m.entries.empty() && *frame <= m.entries.back().frame_index) {
            throw ParseError("manifest: frame indices must strictly increase", line_no);
        }
        m.entries.push_back({*frame, resolve(tok[1]), resolve(tok[2]), resolve(tok[3])});
    }
    if (!header) throw ParseError("manifest: missing 'intrinsics <path>' header", line_no);
    return m;
}

inline void write_manifest(std::ostream& out, const Manifest& m) {
    out << "intrinsics " << m.intrinsics_path << "\n";
    for (const auto& e : m.entries) {
        out << e.frame_index << ' ' << e.color_path << ' ' << e.depth_path << ' ' << e.pose_path << "\n";
    }
    if (!out) throw IoError("failed writing manifest");
}

// ---------------------------------------------------------------------------
// Box scene: one "box xmin ymin zmin xmax ymax zmax r g b label" per line.
// Optional "room xmin ymin zmin xmax ymax zmax" and "density <points/m^2>"
// lines; '#' starts a comment line.

inline BoxScene read_scene(std::istream& in) {
    BoxScene scene;
    std::string line;
    std::size_t line_no = 0;
    auto reals = [&](const std::vector<std::string_view>& tok, std::size_t from, std::size_t count) {
        std::vector<double> out;
        for (std::size_t i = from; i < from + count; ++i) {
            const auto v = detail::parse_number<double>(tok[i]);
            if (!v || !std::isfinite(*v)) {
                throw ParseError("scene: invalid number '" + std::string(tok[i]) + "'", line_no);
            }
            out.push_back(*v);
        }
        return out;
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto tok = detail::split_ws(line);
        if (tok.empty() || tok[0].front() == '#') continue;
        if (tok[0] == "box") {
            if (tok.size() != 11) throw ParseError("scene: box needs 10 values", line_no);
            const auto v = reals(tok, 1, 9);
            const auto label = detail::parse_number<std::uint16_t>(tok[10]);
            if (!label) throw ParseError("scene: invalid label '" + std::string(tok[10]) + "'", line_no);
            Box b;
            b.min = Vec3(v[0], v[1], v[2]);
            b.max = Vec3(v[3], v[4], v[5]);
            b.color = Vec3(v[6], v[7], v[8]);
            b.label = *label;
            if ((b.max - b.min).minCoeff() < 0.0) throw ParseError("scene: box max corner below min corner", line_no);
            if (b.color.minCoeff() < 0.0 || b.color.maxCoeff() > 1.0) {
                throw ParseError("scene: box color outside [0, 1]", line_no);
            }
            scene.boxes.push_back(b);
        } else if (tok[0] == "room") {
            if (tok.size() != 7) throw ParseError("scene: room needs 6 values", line_no);
            const auto v = reals(tok, 1, 6);
            scene.room_min = Vec3(v[0], v[1], v[2]);
            scene.room_max = Vec3(v[3], v[4], v[5]);
        } else if (tok[0] == "density") {
            if (tok.size() != 2) throw ParseError("scene: density needs 1 value", line_no);
            scene.density = reals(tok, 1, 1)[0];
            if (!(scene.density > 0.0)) throw ParseError("scene: density must be positive", line_no);
        } else {
            throw ParseError("scene: unknown keyword '" + std::string(tok[0]) + "'", line_no);
        }
    }
    scene.validate();
    return scene;
}

inline void write_scene(std::ostream& out, const BoxScene& scene) {
    using detail::format_real;
    if (std::isfinite(scene.room_min.x())) {
        out << "room";
        for (int k = 0; k < 3; ++k) out << ' ' << format_real(scene.room_min[k]);
        for (int k = 0; k < 3; ++k) out << ' ' << format_real(scene.room_max[k]);
        out << "\n";
    }
    out << "density " << format_real(scene.density) << "\n";
    for (const Box& b : scene.boxes) {
        out << "box";
        for (int k = 0; k < 3; ++k) out << ' ' << format_real(b.min[k]);
        for (int k = 0; k < 3; ++k) out << ' ' << format_real(b.max[k]);
        for (int k = 0; k < 3; ++k) out << ' ' << format_real(b.color[k]);
        out << ' ' << b.label << "\n";
    }
    if (!out) throw IoError("failed writing scene");
}

// Path overloads.

inline Intrinsics read_intrinsics(const std::string& path, int width, int height) {
    auto in = detail::open_text(path);
    return read_intrinsics(in, width, height);
}
inline void write_intrinsics(const std::string& path, const Intrinsics& k) {
    auto out = detail::create_text(path);
    write_intrinsics(out, k);
}
inline Pose read_pose(const std::string& path) {
    auto in = detail::open_text(path);
    return read_pose(in);
}
inline void write_pose(const std::string& path, const Pose& pose) {
    auto out = detail::create_text(path);
    write_pose(out, pose);
}
inline Manifest read_manifest(const std::string& path) {
    auto in = detail::open_text(path);
    return read_manifest(in, std::filesystem::path(path).parent_path());
}
inline void write_manifest(const std::string& path, const Manifest& m) {
    auto out = detail::create_text(path);
    write_manifest(out, m);
}
inline BoxScene read_scene(const std::string& path) {
    auto in = detail::open_text(path);
    return read_scene(in);
}
inline void write_scene(const std::string& path, const BoxScene& scene) {
    auto out = detail::create_text(path);
    write_scene(out, scene);
}

/// Loads every view of a manifest: depth maps, poses and the shared
/// intrinsics (image size taken from the first depth map).
inline ViewBundle load_view_bundle(const Manifest& manifest) {
    std::vector<View> views;
    for (const auto& e : manifest.entries) {
        DepthMap depth = read_pgm16(e.depth_path);
        const Intrinsics intr = read_intrinsics(manifest.intrinsics_path, depth.width, depth.height);
        views.push_back(View{e.frame_index, e.color_path, std::move(depth), Camera(intr, read_pose(e.pose_path))});
    }
    return ViewBundle(std::move(views));
}

}  // namespace crossproj::io
