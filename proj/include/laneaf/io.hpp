#ifndef LANEAF_IO_HPP
#define LANEAF_IO_HPP

#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "laneaf/grid.hpp"

// File formats. Three on-disk representations, all fully pinned so other
// tools can produce and consume them:
//   masks   8-bit binary PGM (P5, maxval 255), pixel value = label
//   fields  LAF1: "LAF1" magic, u32le height, u32le width, then HAF and
//           VAF planes, each pixel as two float32-le (x component first)
//   lanes   JSON {"lanes": [{"id": n, "points": [[row, col], ...]}]} with
//           points ordered bottom to top and columns printed via %.17g
// Malformed or unreadable input raises io_error; semantic violations in
// otherwise well-formed data are reported the same way since they reach us
// through a file.

namespace laneaf {

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// refuse absurd header dimensions before allocating
inline constexpr std::uint64_t kMaxPixels = std::uint64_t(1) << 28;

inline void check_dims(std::uint64_t h, std::uint64_t w, const char* what) {
    if (h < 1 || w < 1 || h * w > kMaxPixels)
        throw io_error(std::string(what) + ": implausible dimensions " +
                       std::to_string(h) + "x" + std::to_string(w));
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw io_error("read failure on " + path);
    return data;
}

inline void write_file(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out.write(data.data(), std::streamsize(data.size()));
    if (!out) throw io_error("write failure on " + path);
}

inline void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
    out.push_back(char((v >> 16) & 0xff));
    out.push_back(char((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
           std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

inline void put_f32le(std::string& out, float f) {
    put_u32le(out, std::bit_cast<std::uint32_t>(f));
}

inline float get_f32le(const unsigned char* p) {
    return std::bit_cast<float>(get_u32le(p));
}

// PGM header tokens are separated by whitespace; '#' starts a comment that
// runs to end of line
class PnmHeaderScanner {
public:
    PnmHeaderScanner(std::string_view data, const char* what) : data_(data), what_(what) {}

    std::string token() {
        skip();
        const std::size_t start = pos_;
        while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_])))
            ++pos_;
        if (pos_ == start) throw io_error(std::string(what_) + ": truncated header");
        return std::string(data_.substr(start, pos_ - start));
    }

    int number() {
        const std::string tok = token();
        std::size_t used = 0;
        int value = 0;
        try {
            value = std::stoi(tok, &used);
        } catch (const std::exception&) {
            throw io_error(std::string(what_) + ": expected a number, got '" + tok + "'");
        }
        if (used != tok.size() || value < 0)
            throw io_error(std::string(what_) + ": expected a number, got '" + tok + "'");
        return value;
    }

    // position of the first raster byte: exactly one whitespace byte after
    // the last header token
    std::size_t raster_start() {
        if (pos_ >= data_.size() || !std::isspace(static_cast<unsigned char>(data_[pos_])))
            throw io_error(std::string(what_) + ": missing separator before raster");
        return pos_ + 1;
    }

private:
    void skip() {
        while (pos_ < data_.size()) {
            const unsigned char c = static_cast<unsigned char>(data_[pos_]);
            if (std::isspace(c)) {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view data_;
    const char* what_;
    std::size_t pos_ = 0;
};

}  // namespace detail

// --- masks (PGM P5) ---

inline std::string encode_pgm(const LabelMask& mask) {
    std::string out = "P5\n" + std::to_string(mask.width()) + " " +
                      std::to_string(mask.height()) + "\n255\n";
    out.reserve(out.size() + std::size_t(mask.height()) * mask.width());
    for (int y = 0; y < mask.height(); ++y) {
        const auto row = mask.grid().row(y);
        out.append(reinterpret_cast<const char*>(row.data()), row.size());
    }
    return out;
}

inline LabelMask decode_pgm(std::string_view data) {
    detail::PnmHeaderScanner scan(data, "pgm");
    if (scan.token() != "P5") throw io_error("pgm: not a binary PGM (P5) file");
    const int w = scan.number();
    const int h = scan.number();
    const int maxval = scan.number();
    detail::check_dims(std::uint64_t(h), std::uint64_t(w), "pgm");
    if (maxval != 255) throw io_error("pgm: maxval must be 255, got " + std::to_string(maxval));
    const std::size_t start = scan.raster_start();
    const std::size_t need = std::size_t(h) * std::size_t(w);
    if (data.size() - start < need) throw io_error("pgm: truncated raster");
    if (data.size() - start > need) throw io_error("pgm: trailing bytes after raster");
    const auto* raster = reinterpret_cast<const std::uint8_t*>(data.data()) + start;
    return LabelMask(h, w, std::vector<std::uint8_t>(raster, raster + need));
}

inline void write_mask(const LabelMask& mask, const std::string& path) {
    detail::write_file(path, encode_pgm(mask));
}

inline LabelMask read_mask(const std::string& path) {
    try {
        return decode_pgm(detail::read_file(path));
    } catch (const io_error& e) {
        throw io_error(path + ": " + e.what());
    }
}

// --- affinity fields (LAF1) ---

inline std::string encode_laf(const AffinityFields& fields) {
    std::string out;
    out.reserve(12 + std::size_t(fields.height()) * fields.width() * 16);
    out += "LAF1";
    detail::put_u32le(out, std::uint32_t(fields.height()));
    detail::put_u32le(out, std::uint32_t(fields.width()));
    for (const Grid<Vec2>* plane : {&fields.haf, &fields.vaf}) {
        for (int y = 0; y < fields.height(); ++y) {
            for (int x = 0; x < fields.width(); ++x) {
                const Vec2 v = plane->at(y, x);
                detail::put_f32le(out, v.x);
                detail::put_f32le(out, v.y);
            }
        }
    }
    return out;
}

inline AffinityFields decode_laf(std::string_view data) {
    if (data.size() < 12) throw io_error("laf: file shorter than header");
    if (data.substr(0, 4) != "LAF1") throw io_error("laf: bad magic");
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    const std::uint32_t h = detail::get_u32le(p + 4);
    const std::uint32_t w = detail::get_u32le(p + 8);
    detail::check_dims(h, w, "laf");
    const std::size_t need = 12 + std::size_t(h) * w * 16;
    if (data.size() < need) throw io_error("laf: truncated payload");
    if (data.size() > need) throw io_error("laf: trailing bytes after payload");
    AffinityFields fields{int(h), int(w)};
    std::size_t off = 12;
    for (Grid<Vec2>* plane : {&fields.haf, &fields.vaf}) {
        for (std::uint32_t y = 0; y < h; ++y) {
            for (std::uint32_t x = 0; x < w; ++x) {
                plane->at(int(y), int(x)) = {detail::get_f32le(p + off),
                                             detail::get_f32le(p + off + 4)};
                off += 8;
            }
        }
    }
    return fields;
}

inline void write_fields(const AffinityFields& fields, const std::string& path) {
    detail::write_file(path, encode_laf(fields));
}

inline AffinityFields read_fields(const std::string& path) {
    try {
        return decode_laf(detail::read_file(path));
    } catch (const io_error& e) {
        throw io_error(path + ": " + e.what());
    }
}

// --- lane polylines (JSON) ---

inline std::string encode_lanes_json(const LaneSet& lanes) {
    validate_lane_set(lanes);
    std::string out = "{\"lanes\":[";
    char buf[64];
    for (std::size_t i = 0; i < lanes.lanes.size(); ++i) {
        const Lane& lane = lanes.lanes[i];
        if (i) out += ',';
        out += "{\"id\":" + std::to_string(lane.id) + ",\"points\":[";
        for (std::size_t j = 0; j < lane.points.size(); ++j) {
            if (j) out += ',';
            std::snprintf(buf, sizeof buf, "[%d,%.17g]", lane.points[j].row, lane.points[j].col);
            out += buf;
        }
        out += "]}";
    }
    out += "]}\n";
    return out;
}

inline LaneSet decode_lanes_json(std::string_view data) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(data);
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("lanes: invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("lanes") || !doc["lanes"].is_array())
        throw io_error("lanes: expected an object with a \"lanes\" array");
    LaneSet set;
    for (const auto& entry : doc["lanes"]) {
        if (!entry.is_object() || !entry.contains("id") || !entry.contains("points"))
            throw io_error("lanes: each lane needs \"id\" and \"points\"");
        if (!entry["id"].is_number_integer())
            throw io_error("lanes: lane id must be an integer");
        if (!entry["points"].is_array())
            throw io_error("lanes: \"points\" must be an array");
        Lane lane;
        lane.id = entry["id"].get<int>();
        for (const auto& pt : entry["points"]) {
            if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number_integer() ||
                !pt[1].is_number())
                throw io_error("lanes: each point must be an [integer row, numeric col] pair");
            lane.points.push_back({pt[0].get<int>(), pt[1].get<double>()});
        }
        set.lanes.push_back(std::move(lane));
    }
    try {
        validate_lane_set(set);
    } catch (const std::invalid_argument& e) {
        throw io_error(std::string("lanes: ") + e.what());
    }
    return set;
}

inline void write_lanes_json(const LaneSet& lanes, const std::string& path) {
    detail::write_file(path, encode_lanes_json(lanes));
}

inline LaneSet read_lanes_json(const std::string& path) {
    try {
        return decode_lanes_json(detail::read_file(path));
    } catch (const io_error& e) {
        throw io_error(path + ": " + e.what());
    }
}

// --- overlay images (PPM P6) ---

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
};

inline void write_ppm(const Grid<Rgb>& image, const std::string& path) {
    std::string out = "P6\n" + std::to_string(image.width()) + " " +
                      std::to_string(image.height()) + "\n255\n";
    out.reserve(out.size() + std::size_t(image.height()) * image.width() * 3);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const Rgb c = image.at(y, x);
            out.push_back(char(c.r));
            out.push_back(char(c.g));
            out.push_back(char(c.b));
        }
    }
    detail::write_file(path, out);
}

}  // namespace laneaf

#endif  // LANEAF_IO_HPP
