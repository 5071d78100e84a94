#ifndef LANEAF_GRID_HPP
#define LANEAF_GRID_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

// Core grid types shared by every module. Coordinate convention is fixed
// library-wide: row 0 is the top of the image, row height-1 the bottom;
// columns grow left to right. Decoding sweeps rows bottom to top, so the
// "previous" row of a lane during that sweep is the row with the larger
// index (below).

namespace laneaf {

/// Per-pixel 2-vector, x component first. Stored as binary32 to match the
/// on-disk field format exactly.
struct Vec2 {
    float x = 0.0f;
    float y = 0.0f;

    bool operator==(const Vec2&) const = default;
};

inline double norm(Vec2 v) {
    return std::sqrt(double(v.x) * v.x + double(v.y) * v.y);
}

/// Dense row-major grid. Dimensions are validated once at construction;
/// element access is unchecked beyond debug asserts.
template <typename T>
class Grid {
public:
    Grid() = default;

    Grid(int height, int width, T fill = T{})
        : height_(height), width_(width) {
        check_dims(height, width);
        data_.assign(size_t(height) * width, fill);
    }

    Grid(int height, int width, std::vector<T> data)
        : height_(height), width_(width), data_(std::move(data)) {
        check_dims(height, width);
        if (data_.size() != size_t(height) * width)
            throw std::invalid_argument("grid data size does not match dimensions");
    }

    int height() const { return height_; }
    int width() const { return width_; }

    const T& at(int y, int x) const {
        assert(y >= 0 && y < height_ && x >= 0 && x < width_);
        return data_[size_t(y) * width_ + x];
    }
    T& at(int y, int x) {
        assert(y >= 0 && y < height_ && x >= 0 && x < width_);
        return data_[size_t(y) * width_ + x];
    }

    std::span<const T> row(int y) const {
        assert(y >= 0 && y < height_);
        return {data_.data() + size_t(y) * width_, size_t(width_)};
    }
    std::span<T> row(int y) {
        assert(y >= 0 && y < height_);
        return {data_.data() + size_t(y) * width_, size_t(width_)};
    }

    const std::vector<T>& data() const { return data_; }

    bool operator==(const Grid&) const = default;

private:
    static void check_dims(int height, int width) {
        if (height < 1 || width < 1)
            throw std::invalid_argument("grid dimensions must be at least 1x1");
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<T> data_;
};

/// Instance label grid: 0 = background, k >= 1 = lane instance k. Labels are
/// capped at 255 by the storage type so a mask round-trips losslessly through
/// an 8-bit image file. Input label sets need not be contiguous.
class LabelMask {
public:
    LabelMask(int height, int width, std::uint8_t fill = 0)
        : grid_(height, width, fill) {}
    LabelMask(int height, int width, std::vector<std::uint8_t> labels)
        : grid_(height, width, std::move(labels)) {}

    int height() const { return grid_.height(); }
    int width() const { return grid_.width(); }

    std::uint8_t label(int y, int x) const { return grid_.at(y, x); }
    void set_label(int y, int x, std::uint8_t v) { grid_.at(y, x) = v; }

    const Grid<std::uint8_t>& grid() const { return grid_; }

    bool operator==(const LabelMask&) const = default;

private:
    Grid<std::uint8_t> grid_;
};

/// Foreground flag grid; any nonzero source value counts as foreground.
class BinaryMask {
public:
    BinaryMask(int height, int width, bool fill = false)
        : grid_(height, width, fill ? 1 : 0) {}

    int height() const { return grid_.height(); }
    int width() const { return grid_.width(); }

    bool fg(int y, int x) const { return grid_.at(y, x) != 0; }
    void set_fg(int y, int x, bool v) { grid_.at(y, x) = v ? 1 : 0; }

    const Grid<std::uint8_t>& grid() const { return grid_; }

    bool operator==(const BinaryMask&) const = default;

private:
    Grid<std::uint8_t> grid_;
};

/// Paired horizontal/vertical affinity fields over one grid.
struct AffinityFields {
    Grid<Vec2> haf;
    Grid<Vec2> vaf;

    AffinityFields(int height, int width) : haf(height, width), vaf(height, width) {}

    int height() const { return haf.height(); }
    int width() const { return haf.width(); }

    bool operator==(const AffinityFields&) const = default;
};

struct LanePoint {
    int row = 0;
    double col = 0.0;

    bool operator==(const LanePoint&) const = default;
};

/// One lane as a bottom-to-top point sequence: rows strictly decreasing, at
/// most one point per row, column is the per-row mean (a real number).
struct Lane {
    int id = 0;
    std::vector<LanePoint> points;

    bool operator==(const Lane&) const = default;
};

struct LaneSet {
    std::vector<Lane> lanes;

    bool operator==(const LaneSet&) const = default;
};

/// Throws if ids are not unique and positive, a lane is empty, or point rows
/// are not strictly decreasing.
inline void validate_lane_set(const LaneSet& set) {
    std::vector<int> ids;
    for (const Lane& lane : set.lanes) {
        if (lane.id < 1)
            throw std::invalid_argument("lane id must be a positive integer");
        ids.push_back(lane.id);
        if (lane.points.empty())
            throw std::invalid_argument("lane must have at least one point");
        for (size_t i = 1; i < lane.points.size(); ++i) {
            if (lane.points[i].row >= lane.points[i - 1].row)
                throw std::invalid_argument("lane points must have strictly decreasing rows");
        }
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw std::invalid_argument("lane ids must be unique");
}

inline BinaryMask binarize(const LabelMask& mask) {
    BinaryMask out(mask.height(), mask.width());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            out.set_fg(y, x, mask.label(y, x) > 0);
    return out;
}

inline std::int64_t count_foreground(const BinaryMask& bw) {
    std::int64_t n = 0;
    for (int y = 0; y < bw.height(); ++y)
        for (int x = 0; x < bw.width(); ++x)
            n += bw.fg(y, x) ? 1 : 0;
    return n;
}

/// Distinct nonzero labels present in a mask, ascending.
inline std::vector<std::uint8_t> distinct_labels(const LabelMask& mask) {
    bool seen[256] = {};
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            seen[mask.label(y, x)] = true;
    std::vector<std::uint8_t> out;
    for (int v = 1; v < 256; ++v)
        if (seen[v]) out.push_back(std::uint8_t(v));
    return out;
}

/// Reduce a label mask to per-row mean columns: for each label present, one
/// lane whose point at row y is the mean column of that label's pixels in
/// row y. Rows without pixels of the label are omitted; points run bottom
/// to top. Lane ids are the original label values.
inline LaneSet lanes_from_label_mask(const LabelMask& mask) {
    LaneSet out;
    for (std::uint8_t lbl : distinct_labels(mask)) {
        Lane lane;
        lane.id = lbl;
        for (int y = mask.height() - 1; y >= 0; --y) {
            std::int64_t sum = 0;
            int count = 0;
            for (int x = 0; x < mask.width(); ++x) {
                if (mask.label(y, x) == lbl) {
                    sum += x;
                    ++count;
                }
            }
            if (count > 0)
                lane.points.push_back({y, double(sum) / count});
        }
        out.lanes.push_back(std::move(lane));
    }
    return out;
}

inline LabelMask flip_lr(const LabelMask& mask) {
    LabelMask out(mask.height(), mask.width());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            out.set_label(y, mask.width() - 1 - x, mask.label(y, x));
    return out;
}

inline BinaryMask flip_lr(const BinaryMask& bw) {
    BinaryMask out(bw.height(), bw.width());
    for (int y = 0; y < bw.height(); ++y)
        for (int x = 0; x < bw.width(); ++x)
            out.set_fg(y, bw.width() - 1 - x, bw.fg(y, x));
    return out;
}

/// Mirror columns and negate x components of both fields, the field-space
/// counterpart of a horizontal image flip.
inline AffinityFields flip_lr(const AffinityFields& fields) {
    AffinityFields out(fields.height(), fields.width());
    for (int y = 0; y < fields.height(); ++y) {
        for (int x = 0; x < fields.width(); ++x) {
            int mx = fields.width() - 1 - x;
            Vec2 h = fields.haf.at(y, x);
            Vec2 v = fields.vaf.at(y, x);
            out.haf.at(y, mx) = {-h.x, h.y};
            out.vaf.at(y, mx) = {-v.x, v.y};
        }
    }
    return out;
}

/// True iff some bijection on nonzero labels maps `a` onto `b` pixel-wise
/// (background must coincide exactly).
inline bool label_permutation_equal(const LabelMask& a, const LabelMask& b) {
    if (a.height() != b.height() || a.width() != b.width()) return false;
    int fwd[256], bwd[256];
    std::fill(std::begin(fwd), std::end(fwd), -1);
    std::fill(std::begin(bwd), std::end(bwd), -1);
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            int la = a.label(y, x), lb = b.label(y, x);
            if ((la == 0) != (lb == 0)) return false;
            if (la == 0) continue;
            if (fwd[la] == -1 && bwd[lb] == -1) {
                fwd[la] = lb;
                bwd[lb] = la;
            } else if (fwd[la] != lb || bwd[lb] != la) {
                return false;
            }
        }
    }
    return true;
}

/// Agreement of two label masks under the best greedy label bijection.
/// Confusion rows cover every (reference label, other label) pixel pair,
/// including background on either side.
struct MaskComparison {
    std::int64_t total_pixels = 0;
    std::int64_t agreeing_pixels = 0;
    double agreement = 1.0;
    bool permutation_equal = false;
    int labels_a = 0;
    int labels_b = 0;
    // (label in a, label in b) -> shared pixel count
    std::map<std::pair<int, int>, std::int64_t> confusion;
    // greedy bijection on nonzero labels, a -> b
    std::map<int, int> mapping;
};

inline MaskComparison compare_label_masks(const LabelMask& a, const LabelMask& b) {
    if (a.height() != b.height() || a.width() != b.width())
        throw std::invalid_argument("mask dimensions differ");

    MaskComparison cmp;
    cmp.total_pixels = std::int64_t(a.height()) * a.width();
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            cmp.confusion[{a.label(y, x), b.label(y, x)}]++;
    cmp.labels_a = int(distinct_labels(a).size());
    cmp.labels_b = int(distinct_labels(b).size());

    // Greedy bijection by descending overlap, ties toward lower label pairs.
    std::vector<std::pair<std::pair<int, int>, std::int64_t>> pairs;
    for (const auto& [key, count] : cmp.confusion)
        if (key.first != 0 && key.second != 0) pairs.push_back({key, count});
    std::sort(pairs.begin(), pairs.end(), [](const auto& l, const auto& r) {
        if (l.second != r.second) return l.second > r.second;
        return l.first < r.first;
    });
    std::vector<bool> used_b(256, false);
    for (const auto& [key, count] : pairs) {
        if (cmp.mapping.count(key.first) || used_b[key.second]) continue;
        cmp.mapping[key.first] = key.second;
        used_b[key.second] = true;
        cmp.agreeing_pixels += count;
    }
    auto bg = cmp.confusion.find({0, 0});
    if (bg != cmp.confusion.end()) cmp.agreeing_pixels += bg->second;

    cmp.agreement = cmp.total_pixels > 0
                        ? double(cmp.agreeing_pixels) / double(cmp.total_pixels)
                        : 1.0;
    cmp.permutation_equal = label_permutation_equal(a, b);
    return cmp;
}

}  // namespace laneaf

#endif  // LANEAF_GRID_HPP
