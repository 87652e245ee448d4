#pragma once

// ASCII PLY point clouds: x, y, z (float), red, green, blue (uchar) and an
// optional label (ushort) on the vertex element. Other properties and
// elements are skipped with a warning.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "crossproj/error.hpp"
#include "crossproj/io/tokens.hpp"
#include "crossproj/voxelgrid.hpp"

namespace crossproj::io {

namespace detail {

enum class PlyScalar { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

inline std::optional<PlyScalar> ply_scalar(std::string_view name) {
    if (name == "char" || name == "int8") return PlyScalar::kInt8;
    if (name == "uchar" || name == "uint8") return PlyScalar::kUInt8;
    if (name == "short" || name == "int16") return PlyScalar::kInt16;
    if (name == "ushort" || name == "uint16") return PlyScalar::kUInt16;
    if (name == "int" || name == "int32") return PlyScalar::kInt32;
    if (name == "uint" || name == "uint32") return PlyScalar::kUInt32;
    if (name == "float" || name == "float32") return PlyScalar::kFloat32;
    if (name == "double" || name == "float64") return PlyScalar::kFloat64;
    return std::nullopt;
}

inline bool is_integral(PlyScalar s) { return s != PlyScalar::kFloat32 && s != PlyScalar::kFloat64; }

struct PlyProperty {
    std::string name;
    PlyScalar type = PlyScalar::kFloat32;
    bool is_list = false;
    PlyScalar count_type = PlyScalar::kUInt8;
};

struct PlyElement {
    std::string name;
    std::uint64_t count = 0;
    std::vector<PlyProperty> properties;
};

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }
    std::size_t line() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

// Parses one scalar token as a double, enforcing the declared type's range.
inline std::optional<double> ply_value(std::string_view tok, PlyScalar type) {
    switch (type) {
        case PlyScalar::kFloat32: {
            const auto f = parse_number<float>(tok);
            if (!f) return std::nullopt;
            return static_cast<double>(*f);
        }
        case PlyScalar::kFloat64: return parse_number<double>(tok);
        default: break;
    }
    const auto v = parse_number<std::int64_t>(tok);
    if (!v) return std::nullopt;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    switch (type) {
        case PlyScalar::kInt8: lo = -128; hi = 127; break;
        case PlyScalar::kUInt8: lo = 0; hi = 255; break;
        case PlyScalar::kInt16: lo = -32768; hi = 32767; break;
        case PlyScalar::kUInt16: lo = 0; hi = 65535; break;
        case PlyScalar::kInt32: lo = -2147483648LL; hi = 2147483647LL; break;
        case PlyScalar::kUInt32: lo = 0; hi = 4294967295LL; break;
        default: break;
    }
    if (*v < lo || *v > hi) return std::nullopt;
    return static_cast<double>(*v);
}

inline std::string format_float(float x) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ptr);
}

}  // namespace detail

/// Reads an ASCII PLY cloud. Colors map 0..255 to [0, 1]. Warnings about
/// skipped properties or elements are appended to `warnings` when given.
inline PointCloud read_ply(std::istream& in, std::vector<std::string>* warnings = nullptr) {
    using namespace detail;
    LineReader lines(in);
    std::string line;
    auto fail = [&](const std::string& msg) -> ParseError { return ParseError("PLY: " + msg, lines.line()); };
    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back("PLY line " + std::to_string(lines.line()) + ": " + msg);
    };

    if (!lines.next(line) || line != "ply") throw fail("missing 'ply' magic line");

    std::vector<PlyElement> elements;
    bool have_format = false;
    bool header_done = false;
    while (lines.next(line)) {
        const auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "comment" || tok[0] == "obj_info") continue;
        if (tok[0] == "end_header") {
            if (tok.size() != 1) throw fail("unexpected tokens after end_header");
            header_done = true;
            break;
        }
        if (tok[0] == "format") {
            if (tok.size() != 3) throw fail("malformed format line");
            if (tok[1] != "ascii") throw fail("only ASCII PLY is supported, got '" + std::string(tok[1]) + "'");
            if (tok[2] != "1.0") throw fail("unsupported PLY version '" + std::string(tok[2]) + "'");
            have_format = true;
        } else if (tok[0] == "element") {
            if (tok.size() != 3) throw fail("malformed element line");
            const auto count = parse_number<std::uint64_t>(tok[2]);
            if (!count) throw fail("invalid element count '" + std::string(tok[2]) + "'");
            elements.push_back({std::string(tok[1]), *count, {}});
        } else if (tok[0] == "property") {
            if (elements.empty()) throw fail("property before any element");
            PlyProperty prop;
            if (tok.size() == 5 && tok[1] == "list") {
                const auto ct = ply_scalar(tok[2]);
                const auto it = ply_scalar(tok[3]);
                if (!ct || !it || !is_integral(*ct)) throw fail("malformed list property");
                prop.is_list = true;
                prop.count_type = *ct;
                prop.type = *it;
                prop.name = std::string(tok[4]);
            } else if (tok.size() == 3) {
                const auto t = ply_scalar(tok[1]);
                if (!t) throw fail("unknown property type '" + std::string(tok[1]) + "'");
                prop.type = *t;
                prop.name = std::string(tok[2]);
            } else {
                throw fail("malformed property line");
            }
            elements.back().properties.push_back(prop);
        } else {
            throw fail("unknown header keyword '" + std::string(tok[0]) + "'");
        }
    }
    if (!header_done) throw fail("header not terminated by end_header");
    if (!have_format) throw fail("missing format line");

    PointCloud cloud;
    bool seen_vertex = false;
    for (const PlyElement& el : elements) {
        if (el.name != "vertex") {
            warn("skipping element '" + el.name + "'");
            for (std::uint64_t k = 0; k < el.count; ++k) {
                if (!lines.next(line)) throw fail("expected " + std::to_string(el.count) + " '" + el.name + "' rows, found " + std::to_string(k));
            }
            continue;
        }
        if (seen_vertex) throw fail("duplicate vertex element");
        seen_vertex = true;

        // Column index of each required scalar property.
        constexpr std::array<std::string_view, 7> kNames{"x", "y", "z", "red", "green", "blue", "label"};
        std::array<int, 7> slot{};
        slot.fill(-1);
        for (std::size_t p = 0; p < el.properties.size(); ++p) {
            const PlyProperty& prop = el.properties[p];
            bool known = false;
            for (std::size_t k = 0; k < kNames.size(); ++k) {
                if (prop.name != kNames[k]) continue;
                if (prop.is_list) throw fail("property '" + prop.name + "' must be scalar");
                if (slot[k] != -1) throw fail("duplicate property '" + prop.name + "'");
                if (k >= 3 && k < 6 && prop.type != PlyScalar::kUInt8) {
                    throw fail("property '" + prop.name + "' must be uchar");
                }
                if (k == 6 && !is_integral(prop.type)) throw fail("property 'label' must be an integer type");
                slot[k] = static_cast<int>(p);
                known = true;
            }
            if (!known) warn("ignoring vertex property '" + prop.name + "'");
        }
        for (std::size_t k = 0; k < 6; ++k) {
            if (slot[k] == -1) throw fail("missing vertex property '" + std::string(kNames[k]) + "'");
        }
        const bool has_label = slot[6] != -1;

        // Header counts are untrusted; grow as rows arrive.
        std::vector<double> values(el.properties.size());
        for (std::uint64_t row = 0; row < el.count; ++row) {
            if (!lines.next(line)) {
                throw fail("expected " + std::to_string(el.count) + " vertices, found " + std::to_string(row));
            }
            const auto tok = split_ws(line);
            std::size_t t = 0;
            for (std::size_t p = 0; p < el.properties.size(); ++p) {
                const PlyProperty& prop = el.properties[p];
                if (prop.is_list) {
                    if (t >= tok.size()) throw fail("too few values in vertex row");
                    const auto n = ply_value(tok[t++], prop.count_type);
                    if (!n || *n < 0) throw fail("invalid list length");
                    const auto len = static_cast<std::uint64_t>(*n);
                    if (len > tok.size() - t) throw fail("too few values in vertex row");
                    t += static_cast<std::size_t>(len);
                    continue;
                }
                if (t >= tok.size()) throw fail("too few values in vertex row");
                const auto v = ply_value(tok[t], prop.type);
                if (!v) throw fail("invalid value '" + std::string(tok[t]) + "' for property '" + prop.name + "'");
                values[p] = *v;
                ++t;
            }
            if (t != tok.size()) throw fail("too many values in vertex row");

            const Vec3 pos(values[slot[0]], values[slot[1]], values[slot[2]]);
            if (!pos.allFinite()) throw fail("non-finite vertex coordinate");
            cloud.positions.push_back(pos);
            cloud.colors.emplace_back(values[slot[3]] / 255.0, values[slot[4]] / 255.0, values[slot[5]] / 255.0);
            if (has_label) {
                const double l = values[slot[6]];
                if (l < 0 || l > 65535) throw fail("label outside 0..65535");
                cloud.labels.push_back(static_cast<Label>(l));
            }
        }
    }
    if (!seen_vertex) throw fail("no vertex element");
    while (lines.next(line)) {
        if (!split_ws(line).empty()) throw fail("data after the last declared element (count mismatch)");
    }
    return cloud;
}

/// Writes an ASCII PLY cloud. Coordinates are stored as float32 in their
/// shortest round-tripping decimal form; colors as round(255 * c).
inline void write_ply(std::ostream& out, const PointCloud& cloud) {
    cloud.validate();
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (cloud.has_labels()) out << "property ushort label\n";
    out << "end_header\n";
    std::string row;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        row.clear();
        for (int k = 0; k < 3; ++k) {
            row += detail::format_float(static_cast<float>(cloud.positions[i][k]));
            row += ' ';
        }
        for (int k = 0; k < 3; ++k) {
            row += std::to_string(std::lround(cloud.colors[i][k] * 255.0));
            row += k < 2 || cloud.has_labels() ? ' ' : '\n';
        }
        if (cloud.has_labels()) {
            row += std::to_string(cloud.labels[i]);
            row += '\n';
        }
        out << row;
    }
    out.flush();
    if (!out) throw IoError("failed writing PLY");
}

inline PointCloud read_ply(const std::string& path, std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    return read_ply(in, warnings);
}

inline void write_ply(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_ply(out, cloud);
}

}  // namespace crossproj::io
