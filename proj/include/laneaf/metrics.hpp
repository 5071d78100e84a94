#ifndef LANEAF_METRICS_HPP
#define LANEAF_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "laneaf/grid.hpp"

// Lane-level evaluation: point accuracy against row anchors, and F1 over
// rasterized-lane IoU. Matching is greedy in both metrics; optimal
// matching differs only on adversarial ties, and a debug knob computes the
// exhaustive answer for small inputs so the gap can be observed.

namespace laneaf {

struct MetricConfig {
    double point_tolerance = 20.0;        // pixels, full-resolution convention
    double lane_accuracy_threshold = 0.85;
    int lane_width = 30;                  // pixels, rasterized-IoU convention
    double iou_threshold = 0.5;
    // rows at which lanes are sampled for the point metric; unset = every
    // 10th row up to the tallest lane point, empty = error
    std::optional<std::vector<int>> row_anchors;
    // additionally compute the exhaustive matching when both sides have at
    // most 6 lanes
    bool debug_exhaustive_match = false;
};

struct LaneMatch {
    int pred_id = 0;
    int gt_id = 0;
    double score = 0.0;  // per-lane accuracy or IoU, depending on the metric
};

struct MetricReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double fp_per_gt_lane = 0.0;
    double fn_per_gt_lane = 0.0;
    std::vector<LaneMatch> per_lane;
    // greedy vs exhaustive true-positive count, -1 unless requested
    int exhaustive_tp = -1;
};

/// Column of a lane at `row`: the stored point if present, linear
/// interpolation between bracketing points otherwise, nothing outside the
/// lane's row span.
inline std::optional<double> sample_lane_at(const Lane& lane, int row) {
    // points run bottom to top: rows strictly decreasing
    for (size_t i = 0; i < lane.points.size(); ++i) {
        if (lane.points[i].row == row) return lane.points[i].col;
        if (i + 1 < lane.points.size() && lane.points[i].row > row &&
            lane.points[i + 1].row < row) {
            const LanePoint& below = lane.points[i];
            const LanePoint& above = lane.points[i + 1];
            const double f = double(below.row - row) / double(below.row - above.row);
            return below.col + f * (above.col - below.col);
        }
    }
    return std::nullopt;
}

namespace detail {

inline void finalize_counts(MetricReport& r, int n_pred, int n_gt) {
    r.fp = n_pred - r.tp;
    r.fn = n_gt - r.tp;
    r.precision = (r.tp + r.fp) > 0 ? double(r.tp) / double(r.tp + r.fp) : 0.0;
    r.recall = (r.tp + r.fn) > 0 ? double(r.tp) / double(r.tp + r.fn) : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    r.fp_per_gt_lane = n_gt > 0 ? double(r.fp) / double(n_gt) : 0.0;
    r.fn_per_gt_lane = n_gt > 0 ? double(r.fn) / double(n_gt) : 0.0;
}

// Greedy one-to-one matching over a dense score matrix, descending score,
// ties toward lower indices. Pairs with score below `floor` are skipped.
inline std::vector<std::pair<int, int>> greedy_match(
    const std::vector<std::vector<double>>& score, double floor) {
    struct Entry {
        double s;
        int i, j;
    };
    std::vector<Entry> entries;
    for (size_t i = 0; i < score.size(); ++i)
        for (size_t j = 0; j < score[i].size(); ++j)
            if (score[i][j] >= floor) entries.push_back({score[i][j], int(i), int(j)});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.s != b.s) return a.s > b.s;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    std::vector<bool> used_i(score.size(), false);
    std::vector<bool> used_j(score.empty() ? 0 : score[0].size(), false);
    std::vector<std::pair<int, int>> out;
    for (const Entry& e : entries) {
        if (used_i[e.i] || used_j[e.j]) continue;
        used_i[e.i] = used_j[e.j] = true;
        out.push_back({e.i, e.j});
    }
    return out;
}

// Exhaustive best matching by permuting the smaller side; counts pairs at
// or above `floor`.
inline int exhaustive_tp_count(const std::vector<std::vector<double>>& score, double floor) {
    const int n = int(score.size());
    const int m = score.empty() ? 0 : int(score[0].size());
    if (n == 0 || m == 0) return 0;
    std::vector<int> idx(std::max(n, m));
    std::iota(idx.begin(), idx.end(), 0);
    int best = 0;
    do {
        int tp = 0;
        for (int i = 0; i < std::min(n, m); ++i) {
            const int a = n <= m ? i : idx[i];
            const int b = n <= m ? idx[i] : i;
            if (a < n && b < m && score[a][b] >= floor) ++tp;
        }
        best = std::max(best, tp);
    } while (std::next_permutation(idx.begin(), idx.end()));
    return best;
}

}  // namespace detail

/// Fraction of ground-truth anchor points matched within the column
/// tolerance, plus lane-level TP/FP/FN where a matched prediction must
/// reach the per-lane accuracy threshold to count as a true positive.
inline MetricReport point_accuracy(const LaneSet& pred, const LaneSet& gt,
                                   const MetricConfig& cfg = {}) {
    std::vector<int> anchors;
    if (cfg.row_anchors) {
        anchors = *cfg.row_anchors;
        if (anchors.empty()) throw std::invalid_argument("row anchors must be nonempty");
    } else {
        int max_row = 0;
        for (const Lane& l : pred.lanes)
            for (const LanePoint& p : l.points) max_row = std::max(max_row, p.row);
        for (const Lane& l : gt.lanes)
            for (const LanePoint& p : l.points) max_row = std::max(max_row, p.row);
        for (int y = 0; y <= max_row; y += 10) anchors.push_back(y);
    }

    // per-gt-lane anchor columns and counts
    std::vector<std::vector<std::optional<double>>> gt_cols(gt.lanes.size());
    std::vector<int> gt_counts(gt.lanes.size(), 0);
    std::int64_t n_gt_points = 0;
    for (size_t g = 0; g < gt.lanes.size(); ++g) {
        gt_cols[g].reserve(anchors.size());
        for (int row : anchors) {
            gt_cols[g].push_back(sample_lane_at(gt.lanes[g], row));
            if (gt_cols[g].back()) ++gt_counts[g];
        }
        n_gt_points += gt_counts[g];
    }
    std::int64_t n_pred_points = 0;
    std::vector<std::vector<std::optional<double>>> pred_cols(pred.lanes.size());
    for (size_t p = 0; p < pred.lanes.size(); ++p) {
        pred_cols[p].reserve(anchors.size());
        for (int row : anchors) {
            pred_cols[p].push_back(sample_lane_at(pred.lanes[p], row));
            if (pred_cols[p].back()) ++n_pred_points;
        }
    }

    // correct-point counts for every (pred, gt) pair
    std::vector<std::vector<double>> correct(pred.lanes.size(),
                                             std::vector<double>(gt.lanes.size(), 0.0));
    for (size_t p = 0; p < pred.lanes.size(); ++p)
        for (size_t g = 0; g < gt.lanes.size(); ++g)
            for (size_t a = 0; a < anchors.size(); ++a)
                if (pred_cols[p][a] && gt_cols[g][a] &&
                    std::abs(*pred_cols[p][a] - *gt_cols[g][a]) <= cfg.point_tolerance)
                    correct[p][g] += 1.0;

    MetricReport report;
    std::int64_t n_correct = 0;
    for (const auto& [p, g] : detail::greedy_match(correct, 1.0)) {
        n_correct += std::int64_t(correct[p][g]);
        const double lane_acc =
            gt_counts[g] > 0 ? correct[p][g] / double(gt_counts[g]) : 0.0;
        report.per_lane.push_back({pred.lanes[p].id, gt.lanes[g].id, lane_acc});
        if (lane_acc >= cfg.lane_accuracy_threshold) ++report.tp;
    }
    if (n_gt_points > 0)
        report.accuracy = double(n_correct) / double(n_gt_points);
    else
        report.accuracy = n_pred_points == 0 ? 1.0 : 0.0;

    detail::finalize_counts(report, int(pred.lanes.size()), int(gt.lanes.size()));
    if (cfg.debug_exhaustive_match && pred.lanes.size() <= 6 && gt.lanes.size() <= 6) {
        // threshold-aware: a pair only counts if it clears the per-lane gate
        std::vector<std::vector<double>> gated(pred.lanes.size(),
                                               std::vector<double>(gt.lanes.size(), 0.0));
        for (size_t p = 0; p < pred.lanes.size(); ++p)
            for (size_t g = 0; g < gt.lanes.size(); ++g)
                gated[p][g] = gt_counts[g] > 0 &&
                                      correct[p][g] / double(gt_counts[g]) >=
                                          cfg.lane_accuracy_threshold
                                  ? 1.0
                                  : 0.0;
        report.exhaustive_tp = detail::exhaustive_tp_count(gated, 1.0);
    }
    return report;
}

/// Paint a lane into a mask: each point's column dilated to `width` pixels,
/// rows between consecutive points filled by linear interpolation, clipped
/// at the borders.
inline BinaryMask rasterize_lane(const Lane& lane, int width, int height, int grid_width) {
    if (width < 1) throw std::invalid_argument("lane width must be at least 1");
    BinaryMask out(height, grid_width);
    auto paint = [&](int row, double col) {
        if (row < 0 || row >= height) return;
        // the half-open span [col - width/2, col + width/2) holds exactly
        // `width` integer columns
        const int lo = int(std::ceil(col - width / 2.0));
        for (int x = lo; x < lo + width; ++x)
            if (x >= 0 && x < grid_width) out.set_fg(row, x, true);
    };
    for (size_t i = 0; i < lane.points.size(); ++i) {
        paint(lane.points[i].row, lane.points[i].col);
        if (i + 1 < lane.points.size()) {
            const LanePoint& below = lane.points[i];
            const LanePoint& above = lane.points[i + 1];
            for (int row = below.row - 1; row > above.row; --row) {
                const double f = double(below.row - row) / double(below.row - above.row);
                paint(row, below.col + f * (above.col - below.col));
            }
        }
    }
    return out;
}

inline double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    std::int64_t inter = 0, uni = 0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            const bool fa = a.fg(y, x), fb = b.fg(y, x);
            inter += (fa && fb) ? 1 : 0;
            uni += (fa || fb) ? 1 : 0;
        }
    }
    return uni > 0 ? double(inter) / double(uni) : 0.0;
}

/// F1 over rasterized lanes: pairs matched greedily by descending IoU; a
/// matched pair at or above the IoU threshold is a true positive.
inline MetricReport lane_f1(const LaneSet& pred, const LaneSet& gt, int height,
                            int width, const MetricConfig& cfg = {}) {
    std::vector<BinaryMask> pred_masks, gt_masks;
    pred_masks.reserve(pred.lanes.size());
    gt_masks.reserve(gt.lanes.size());
    for (const Lane& l : pred.lanes)
        pred_masks.push_back(rasterize_lane(l, cfg.lane_width, height, width));
    for (const Lane& l : gt.lanes)
        gt_masks.push_back(rasterize_lane(l, cfg.lane_width, height, width));

    std::vector<std::vector<double>> iou(pred.lanes.size(),
                                         std::vector<double>(gt.lanes.size(), 0.0));
    for (size_t p = 0; p < pred.lanes.size(); ++p)
        for (size_t g = 0; g < gt.lanes.size(); ++g)
            iou[p][g] = mask_iou(pred_masks[p], gt_masks[g]);

    MetricReport report;
    for (const auto& [p, g] : detail::greedy_match(iou, cfg.iou_threshold)) {
        report.per_lane.push_back({pred.lanes[p].id, gt.lanes[g].id, iou[p][g]});
        ++report.tp;
    }
    report.accuracy = gt.lanes.empty()
                          ? (pred.lanes.empty() ? 1.0 : 0.0)
                          : double(report.tp) / double(gt.lanes.size());
    detail::finalize_counts(report, int(pred.lanes.size()), int(gt.lanes.size()));
    if (cfg.debug_exhaustive_match && pred.lanes.size() <= 6 && gt.lanes.size() <= 6)
        report.exhaustive_tp = detail::exhaustive_tp_count(iou, cfg.iou_threshold);
    return report;
}

}  // namespace laneaf

#endif  // LANEAF_METRICS_HPP
