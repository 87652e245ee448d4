#pragma once

// 16-bit binary PGM ("P5", maxval 65535, big-endian samples). Depth maps are
// stored in millimeters with 0 = invalid; label images store raw label ids
// with 65535 = void.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "crossproj/error.hpp"
#include "crossproj/features.hpp"
#include "crossproj/linker.hpp"

namespace crossproj::io {

/// Raw 16-bit raster as stored on disk.
struct Gray16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> samples;
};

namespace detail {

inline constexpr int kMaxPgmDim = 1 << 20;

// Header integer; skips whitespace and '#' comments first.
inline std::uint64_t pgm_header_int(std::istream& in, const char* field) {
    int c = in.get();
    while (true) {
        if (c == '#') {
            while (c != '\n' && c != std::char_traits<char>::eof()) c = in.get();
        } else if (c != std::char_traits<char>::eof() && std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c == std::char_traits<char>::eof() || !std::isdigit(c)) {
        throw ParseError(std::string("PGM: expected ") + field + " in header");
    }
    std::uint64_t v = 0;
    while (c != std::char_traits<char>::eof() && std::isdigit(c)) {
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
        if (v > std::numeric_limits<std::uint32_t>::max()) throw ParseError(std::string("PGM: ") + field + " too large");
        c = in.get();
    }
    // Exactly one whitespace byte terminates the field.
    if (c == std::char_traits<char>::eof() || !std::isspace(c)) {
        throw ParseError(std::string("PGM: malformed ") + field);
    }
    return v;
}

}  // namespace detail

inline Gray16 read_pgm16_raw(std::istream& in) {
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '5') throw ParseError("PGM: bad magic, expected \"P5\"");
    const std::uint64_t w = detail::pgm_header_int(in, "width");
    const std::uint64_t h = detail::pgm_header_int(in, "height");
    const std::uint64_t maxval = detail::pgm_header_int(in, "maxval");
    if (w == 0 || h == 0 || w > detail::kMaxPgmDim || h > detail::kMaxPgmDim) {
        throw ParseError("PGM: invalid dimensions " + std::to_string(w) + "x" + std::to_string(h));
    }
    if (maxval != 65535) throw ParseError("PGM: maxval must be 65535, got " + std::to_string(maxval));

    const std::uint64_t bytes = w * h * 2;
    const auto start = in.tellg();
    if (start != std::istream::pos_type(-1)) {
        in.seekg(0, std::ios::end);
        const auto end = in.tellg();
        in.seekg(start);
        if (end != std::istream::pos_type(-1) && static_cast<std::uint64_t>(end - start) < bytes) {
            throw ParseError("PGM: truncated body");
        }
    }
    std::vector<unsigned char> raw(bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<std::uint64_t>(in.gcount()) != bytes) throw ParseError("PGM: truncated body");

    Gray16 img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.samples.resize(w * h);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        img.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
    return img;
}

inline void write_pgm16_raw(std::ostream& out, const Gray16& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.samples.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
        throw ValidationError("PGM: sample count does not match dimensions");
    }
    out << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
    std::vector<unsigned char> raw(img.samples.size() * 2);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        raw[2 * i] = static_cast<unsigned char>(img.samples[i] >> 8);
        raw[2 * i + 1] = static_cast<unsigned char>(img.samples[i] & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    out.flush();
    if (!out) throw IoError("failed writing PGM");
}

/// Depth in meters = sample / 1000.
inline DepthMap read_pgm16(std::istream& in) {
    const Gray16 img = read_pgm16_raw(in);
    DepthMap depth(img.width, img.height);
    for (std::size_t i = 0; i < img.samples.size(); ++i) depth.values[i] = img.samples[i] / 1000.0;
    return depth;
}

/// Depth is rounded to whole millimeters; values above 65.535 m are rejected.
inline void write_pgm16(std::ostream& out, const DepthMap& depth) {
    depth.validate();
    Gray16 img{depth.width, depth.height, std::vector<std::uint16_t>(depth.values.size())};
    for (std::size_t i = 0; i < depth.values.size(); ++i) {
        const double mm = std::round(depth.values[i] * 1000.0);
        if (mm > 65535.0) throw ValidationError("PGM: depth exceeds 65.535 m");
        img.samples[i] = static_cast<std::uint16_t>(mm);
    }
    write_pgm16_raw(out, img);
}

inline LabelImage read_label_pgm(std::istream& in) {
    Gray16 img = read_pgm16_raw(in);
    LabelImage labels(img.width, img.height);
    labels.values = std::move(img.samples);
    return labels;
}

inline void write_label_pgm(std::ostream& out, const LabelImage& labels) {
    write_pgm16_raw(out, Gray16{labels.width, labels.height, labels.values});
}

inline DepthMap read_pgm16(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    return read_pgm16(in);
}
inline void write_pgm16(const std::string& path, const DepthMap& depth) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_pgm16(out, depth);
}
inline LabelImage read_label_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    return read_label_pgm(in);
}
inline void write_label_pgm(const std::string& path, const LabelImage& labels) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_label_pgm(out, labels);
}

}  // namespace crossproj::io
