#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "laneaf/metrics.hpp"
#include "laneaf/synth.hpp"

using namespace laneaf;

namespace {

Lane straight_lane(int id, int bottom_row, int top_row, double col, int step = 10) {
    Lane lane;
    lane.id = id;
    for (int y = bottom_row; y >= top_row; y -= step) lane.points.push_back({y, col});
    return lane;
}

LaneSet random_lane_set(SplitMix64& rng, int max_lanes, int height, int width) {
    LaneSet set;
    const int n = rng.uniform_int(0, max_lanes);
    for (int i = 0; i < n; ++i) {
        Lane lane;
        lane.id = i + 1;
        const double c = rng.uniform(5.0, width - 5.0);
        const double b = rng.uniform(-0.3, 0.3);
        int row = height - 1 - rng.uniform_int(0, 5);
        while (row >= 0) {
            lane.points.push_back({row, c + b * (height - 1 - row) + rng.uniform(-0.5, 0.5)});
            row -= rng.uniform_int(1, 3);
        }
        if (lane.points.empty()) lane.points.push_back({0, c});
        set.lanes.push_back(std::move(lane));
    }
    return set;
}

}  // namespace

TEST_CASE("sample_lane_at interpolates between stored points") {
    Lane lane;
    lane.id = 1;
    lane.points = {{9, 0.0}, {5, 8.0}};
    CHECK(sample_lane_at(lane, 9) == 0.0);
    CHECK(sample_lane_at(lane, 5) == 8.0);
    CHECK(sample_lane_at(lane, 7) == doctest::Approx(4.0));
    CHECK(sample_lane_at(lane, 8) == doctest::Approx(2.0));
    CHECK_FALSE(sample_lane_at(lane, 10).has_value());
    CHECK_FALSE(sample_lane_at(lane, 4).has_value());
}

TEST_CASE("rasterize_lane dilation, interpolation and clipping") {
    const BinaryMask vert = rasterize_lane(straight_lane(1, 4, 0, 10.0, 1), 3, 5, 20);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 20; ++x) CHECK(vert.fg(y, x) == (x >= 9 && x <= 11));

    // diagonal from (9,0) to (5,8) at width 1 hits columns 0,2,4,6,8
    Lane diag;
    diag.id = 1;
    diag.points = {{9, 0.0}, {5, 8.0}};
    const BinaryMask d = rasterize_lane(diag, 1, 10, 10);
    const int expect[5] = {0, 2, 4, 6, 8};
    for (int i = 0; i < 5; ++i) {
        const int row = 9 - i;
        for (int x = 0; x < 10; ++x) CHECK(d.fg(row, x) == (x == expect[i]));
    }
    for (int row = 0; row < 5; ++row)
        for (int x = 0; x < 10; ++x) CHECK_FALSE(d.fg(row, x));

    // width 5 at column 0 survives only where the image does
    const BinaryMask clipped = rasterize_lane(straight_lane(1, 2, 0, 0.0, 1), 5, 3, 10);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 10; ++x) CHECK(clipped.fg(y, x) == (x <= 2));

    CHECK_THROWS_AS(rasterize_lane(diag, 0, 10, 10), std::invalid_argument);
}

TEST_CASE("point accuracy counts matched anchor points") {
    // gt sampled at rows 0,10,...,90; pred correct on exactly 5 of 10
    LaneSet gt, pred;
    gt.lanes.push_back(straight_lane(1, 90, 0, 50.0));
    Lane p;
    p.id = 1;
    for (int y = 90; y >= 0; y -= 10) p.points.push_back({y, y >= 50 ? 50.0 : 200.0});
    pred.lanes.push_back(p);

    const MetricReport r = point_accuracy(pred, gt);
    CHECK(r.accuracy == doctest::Approx(0.5));
    CHECK(r.tp == 0);  // 0.5 below the 0.85 lane threshold
    CHECK(r.fp == 1);
    CHECK(r.fn == 1);
    REQUIRE(r.per_lane.size() == 1);
    CHECK(r.per_lane[0].score == doctest::Approx(0.5));
}

TEST_CASE("point accuracy identity and empty cases") {
    SplitMix64 rng(5);
    const LaneSet set = random_lane_set(rng, 4, 70, 200);
    const MetricReport ident = point_accuracy(set, set);
    CHECK(ident.accuracy == 1.0);
    CHECK(ident.fp == 0);
    CHECK(ident.fn == 0);
    if (!set.lanes.empty()) CHECK(ident.f1 == 1.0);

    LaneSet gt;
    gt.lanes.push_back(straight_lane(1, 60, 0, 30.0));
    gt.lanes.push_back(straight_lane(2, 60, 0, 90.0));
    const MetricReport none = point_accuracy(LaneSet{}, gt);
    CHECK(none.accuracy == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.fn == 2);

    CHECK(point_accuracy(LaneSet{}, LaneSet{}).accuracy == 1.0);
}

TEST_CASE("point accuracy explicit anchors and the empty-anchor error") {
    LaneSet gt, pred;
    gt.lanes.push_back(straight_lane(1, 40, 0, 50.0, 1));
    pred.lanes.push_back(straight_lane(1, 40, 0, 55.0, 1));

    MetricConfig cfg;
    cfg.row_anchors = std::vector<int>{0, 20, 40};
    cfg.point_tolerance = 10.0;
    const MetricReport r = point_accuracy(pred, gt, cfg);
    CHECK(r.accuracy == 1.0);
    CHECK(r.tp == 1);

    cfg.row_anchors = std::vector<int>{};
    CHECK_THROWS_AS(point_accuracy(pred, gt, cfg), std::invalid_argument);
}

TEST_CASE("single-lane point accuracy is monotone in the tolerance") {
    // one lane per side keeps the matching trivial, so widening the
    // tolerance can only add correct points
    SplitMix64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        LaneSet pred = random_lane_set(rng, 1, 70, 200);
        LaneSet gt = random_lane_set(rng, 1, 70, 200);
        if (pred.lanes.empty() || gt.lanes.empty()) continue;
        double prev = -1.0;
        for (double tol : {2.0, 8.0, 20.0, 60.0, 300.0}) {
            MetricConfig cfg;
            cfg.point_tolerance = tol;
            const double acc = point_accuracy(pred, gt, cfg).accuracy;
            CHECK(acc >= prev);
            prev = acc;
        }
        // at tolerance wider than the grid every co-sampled anchor matches
        CHECK(prev > 0.0);
    }
}

TEST_CASE("lane_f1 identity, spurious lane, and offset iou") {
    LaneSet gt;
    gt.lanes.push_back(straight_lane(1, 60, 0, 40.0, 1));
    gt.lanes.push_back(straight_lane(2, 60, 0, 120.0, 1));

    MetricConfig cfg;
    cfg.lane_width = 30;
    const MetricReport same = lane_f1(gt, gt, 74, 205, cfg);
    CHECK(same.f1 == 1.0);
    CHECK(same.tp == 2);

    LaneSet spurious = gt;
    spurious.lanes.push_back(straight_lane(3, 60, 0, 180.0, 1));
    const MetricReport sp = lane_f1(spurious, gt, 74, 205, cfg);
    CHECK(sp.precision == doctest::Approx(2.0 / 3.0));
    CHECK(sp.recall == doctest::Approx(1.0));

    // two straight lanes offset by half the width: matched pair score equals
    // the raw pixel iou of the two rasterized strips
    LaneSet a, b;
    a.lanes.push_back(straight_lane(1, 60, 0, 100.0, 1));
    b.lanes.push_back(straight_lane(1, 60, 0, 115.0, 1));
    const double direct = mask_iou(rasterize_lane(a.lanes[0], 30, 74, 205),
                                   rasterize_lane(b.lanes[0], 30, 74, 205));
    CHECK(direct == doctest::Approx(15.0 / 45.0));
    const MetricReport strict = lane_f1(a, b, 74, 205, cfg);
    CHECK(strict.tp == 0);  // 1/3 overlap misses the default 0.5 bar
    cfg.iou_threshold = 0.25;
    const MetricReport off = lane_f1(a, b, 74, 205, cfg);
    REQUIRE(off.per_lane.size() == 1);
    CHECK(off.per_lane[0].score == direct);
    CHECK(off.tp == 1);
}

TEST_CASE("lane_f1 is invariant to order and ids, swap trades precision for recall") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const LaneSet pred = random_lane_set(rng, 4, 70, 200);
        const LaneSet gt = random_lane_set(rng, 4, 70, 200);
        MetricConfig cfg;
        cfg.lane_width = 5;

        const MetricReport fwd = lane_f1(pred, gt, 70, 200, cfg);
        const MetricReport swp = lane_f1(gt, pred, 70, 200, cfg);
        CHECK(fwd.precision == swp.recall);
        CHECK(fwd.recall == swp.precision);
        CHECK(fwd.f1 == doctest::Approx(swp.f1).epsilon(1e-15));
        CHECK(fwd.tp + fwd.fp == int(pred.lanes.size()));
        CHECK(fwd.tp + fwd.fn == int(gt.lanes.size()));

        LaneSet renamed = pred;
        for (std::size_t i = 0; i < renamed.lanes.size(); ++i)
            renamed.lanes[i].id = int(90 - i);
        std::reverse(renamed.lanes.begin(), renamed.lanes.end());
        const MetricReport ren = lane_f1(renamed, gt, 70, 200, cfg);
        CHECK(ren.f1 == fwd.f1);
        CHECK(ren.tp == fwd.tp);
    }
}

TEST_CASE("exhaustive matching agrees with greedy away from ties") {
    LaneSet gt;
    gt.lanes.push_back(straight_lane(1, 60, 0, 40.0, 1));
    gt.lanes.push_back(straight_lane(2, 60, 0, 120.0, 1));
    LaneSet pred = gt;
    pred.lanes[0].points[0].col += 2.0;

    MetricConfig cfg;
    cfg.debug_exhaustive_match = true;
    const MetricReport r = lane_f1(pred, gt, 74, 205, cfg);
    CHECK(r.exhaustive_tp == r.tp);

    const MetricReport pt = point_accuracy(pred, gt, cfg);
    CHECK(pt.exhaustive_tp == pt.tp);
}
