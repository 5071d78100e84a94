#include <cmath>
#include <limits>

#include "doctest.h"
#include "laneaf/losses.hpp"
#include "laneaf/synth.hpp"
#include "oracles.hpp"

using namespace laneaf;

namespace {

RealGrid one_pixel(double v) { return RealGrid(1, 1, v); }

}  // namespace

TEST_CASE("weighted bce hand anchor") {
    // -(w * 1 * log 0.5) = w * ln 2
    CHECK(weighted_bce(one_pixel(1.0), one_pixel(0.5), 9.6) ==
          doctest::Approx(9.6 * std::log(2.0)).epsilon(1e-12));
    // unweighted symmetric case
    CHECK(weighted_bce(one_pixel(0.0), one_pixel(0.5), 1.0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("bce clamps exact 0 and 1 probabilities") {
    CHECK(std::isfinite(weighted_bce(one_pixel(1.0), one_pixel(0.0), 9.6)));
    CHECK(std::isfinite(weighted_bce(one_pixel(0.0), one_pixel(1.0), 9.6)));
    // a perfect prediction costs only the clamp epsilon
    CHECK(weighted_bce(one_pixel(1.0), one_pixel(1.0), 9.6) ==
          doctest::Approx(-9.6 * std::log(1.0 - 1e-7)).epsilon(1e-9));
}

TEST_CASE("iou hand anchor includes the epsilon guard") {
    // overlap term 0.5 / (1 + eps); the loss is 1 minus that
    const double loss = iou_loss(one_pixel(1.0), one_pixel(0.5));
    CHECK(1.0 - loss == doctest::Approx(0.5).epsilon(2e-6));
    // the guard makes the empty-vs-empty pixel cost a full 1.0
    CHECK(iou_loss(one_pixel(0.0), one_pixel(0.0)) == doctest::Approx(1.0));
}

TEST_CASE("af loss covers both fields, foreground only") {
    AffinityFields target(2, 2), pred(2, 2);
    BinaryMask fg(2, 2);
    fg.set_fg(0, 0, true);
    target.haf.at(0, 0) = {1.0f, 0.0f};
    pred.haf.at(0, 0) = {0.25f, 0.5f};
    target.vaf.at(0, 0) = {0.0f, -1.0f};
    pred.vaf.at(0, 0) = {0.0f, -0.5f};
    // a large background mismatch must not count
    pred.haf.at(1, 1) = {9.0f, 9.0f};

    CHECK(af_l1_loss(target, pred, fg) == doctest::Approx(0.75 + 0.5 + 0.5).epsilon(1e-12));
    CHECK(af_l1_loss(target, pred, BinaryMask(2, 2)) == 0.0);
}

TEST_CASE("total is the plain sum of the three terms") {
    SplitMix64 rng(3);
    const int n = 8;
    RealGrid t(n, n, 0.0), o(n, n, 0.0);
    AffinityFields ta(n, n), pa(n, n);
    BinaryMask fg(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            t.at(y, x) = rng.next_double() < 0.4 ? 1.0 : 0.0;
            o.at(y, x) = rng.next_double();
            ta.haf.at(y, x) = {float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))};
            pa.vaf.at(y, x) = {float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))};
            fg.set_fg(y, x, rng.next_double() < 0.5);
        }
    const LossValues v = total_loss({t, o, ta, pa, fg}, 9.6);
    CHECK(v.total == doctest::Approx(v.bce + v.iou + v.af).epsilon(1e-15));
    CHECK(v.w == 9.6);
}

TEST_CASE("losses match the double-loop oracle on random grids") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 8;
        RealGrid t(n, n, 0.0), o(n, n, 0.0);
        AffinityFields ta(n, n), pa(n, n);
        BinaryMask fg(n, n);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                t.at(y, x) = rng.next_double() < 0.5 ? 1.0 : 0.0;
                const double u = rng.next_double();
                o.at(y, x) = u < 0.1 ? 0.0 : (u > 0.9 ? 1.0 : u);  // hit the clamps
                ta.haf.at(y, x) = {float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-1.5, 1.5))};
                ta.vaf.at(y, x) = {float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-1.5, 1.5))};
                pa.haf.at(y, x) = {float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-1.5, 1.5))};
                pa.vaf.at(y, x) = {float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-1.5, 1.5))};
                fg.set_fg(y, x, rng.next_double() < 0.4);
            }
        CHECK(weighted_bce(t, o, 9.6) == doctest::Approx(oracle::weighted_bce(t, o, 9.6)).epsilon(1e-12));
        CHECK(iou_loss(t, o) == doctest::Approx(oracle::iou_loss(t, o)).epsilon(1e-12));
        CHECK(af_l1_loss(ta, pa, fg) == doctest::Approx(oracle::af_l1_loss(ta, pa, fg)).epsilon(1e-12));
    }
}

TEST_CASE("loss validation") {
    CHECK_THROWS_AS(weighted_bce(RealGrid(2, 2, 0.0), RealGrid(2, 3, 0.0), 9.6),
                    std::invalid_argument);
    CHECK_THROWS_AS(weighted_bce(one_pixel(1.0), one_pixel(0.5), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(weighted_bce(one_pixel(1.0), one_pixel(0.5), -1.0), std::invalid_argument);
    CHECK_THROWS_AS(
        weighted_bce(one_pixel(std::numeric_limits<double>::quiet_NaN()), one_pixel(0.5), 1.0),
        std::invalid_argument);
    CHECK_THROWS_AS(iou_loss(RealGrid(2, 2, 0.0), RealGrid(3, 2, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(af_l1_loss(AffinityFields(2, 2), AffinityFields(2, 3), BinaryMask(2, 2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(af_l1_loss(AffinityFields(2, 2), AffinityFields(2, 2), BinaryMask(3, 3)),
                    std::invalid_argument);
}
