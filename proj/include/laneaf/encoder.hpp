#ifndef LANEAF_ENCODER_HPP
#define LANEAF_ENCODER_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "laneaf/grid.hpp"

// Ground-truth affinity field generation. Each lane is scanned bottom to
// top. Within a row, the horizontal field at a lane pixel is the sign of
// the offset from the pixel to the lane's mean column in that row. Between
// rows, the vertical field at a lane pixel points from that pixel to the
// lane's mean column in the next row of the lane encountered above; for
// dashed lanes that row may be more than one step away, and the stored
// direction spans the whole gap.

namespace laneaf {

struct EncodeOptions {
    // Store the vertical field as (sign(dx), -1) instead of the
    // unit-normalized displacement. Off by default: downstream association
    // rescales the vector by a Euclidean distance, which is only geometric
    // with a unit direction.
    bool literal_vaf = false;
};

struct EncodeReport {
    int lanes_encoded = 0;
    // rows containing pixels of each lane, in ascending label order
    std::vector<int> rows_touched_per_lane;
    // rows where some lane had exactly one pixel
    int degenerate_rows = 0;
};

namespace detail {

inline float sign_or_zero(double d) {
    if (d > 0.0) return 1.0f;
    if (d < 0.0) return -1.0f;
    return 0.0f;
}

}  // namespace detail

struct EncodeResult {
    AffinityFields fields;
    EncodeReport report;
};

inline EncodeResult encode(const LabelMask& mask, const EncodeOptions& opts = {}) {
    const int h = mask.height();
    const int w = mask.width();
    EncodeResult out{AffinityFields(h, w), {}};

    for (std::uint8_t lbl : distinct_labels(mask)) {
        int rows_touched = 0;
        std::vector<int> prev_cols;  // lane pixels in the last populated row below
        int prev_row = -1;

        for (int y = h - 1; y >= 0; --y) {
            std::vector<int> cols;
            for (int x = 0; x < w; ++x)
                if (mask.label(y, x) == lbl) cols.push_back(x);
            if (cols.empty()) continue;

            ++rows_touched;
            if (cols.size() == 1) ++out.report.degenerate_rows;

            std::int64_t sum = 0;
            for (int x : cols) sum += x;
            const double mean = double(sum) / double(cols.size());

            for (int x : cols)
                out.fields.haf.at(y, x) = {detail::sign_or_zero(mean - x), 0.0f};

            if (prev_row >= 0) {
                for (int x : prev_cols) {
                    const double dx = mean - x;
                    const double dy = double(y - prev_row);  // negative: up
                    Vec2 v;
                    if (opts.literal_vaf) {
                        v = {detail::sign_or_zero(dx), -1.0f};
                    } else {
                        const double len = std::sqrt(dx * dx + dy * dy);
                        v = {float(dx / len), float(dy / len)};
                    }
                    out.fields.vaf.at(prev_row, x) = v;
                }
            }
            prev_cols = std::move(cols);
            prev_row = y;
        }
        // the topmost populated row of the lane keeps a zero vertical vector
        out.report.rows_touched_per_lane.push_back(rows_touched);
        ++out.report.lanes_encoded;
    }
    return out;
}

/// The binary mask a decoder pairs with the generated fields.
inline BinaryMask encode_binary_companion(const LabelMask& mask) {
    return binarize(mask);
}

}  // namespace laneaf

#endif  // LANEAF_ENCODER_HPP
