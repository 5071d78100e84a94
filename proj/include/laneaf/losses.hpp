#ifndef LANEAF_LOSSES_HPP
#define LANEAF_LOSSES_HPP

#include <cmath>
#include <stdexcept>

#include "laneaf/grid.hpp"

// Forward-only reference evaluations of the training losses, for checking
// an external training stack against a known-good computation. No
// gradients. Probabilities are clamped to [1e-7, 1 - 1e-7] before logs so
// saturated predictions stay finite; the overlap term carries a 1e-6
// denominator guard, which makes an all-background pixel contribute 1.

namespace laneaf {

using RealGrid = Grid<double>;

constexpr double kProbClamp = 1e-7;
constexpr double kIouEps = 1e-6;

struct LossInputs {
    RealGrid targets;        // {0,1} per pixel
    RealGrid outputs;        // post-sigmoid probabilities
    AffinityFields af_targets;
    AffinityFields af_preds;
    BinaryMask fg_mask;      // defines the foreground for the field loss
};

struct LossValues {
    double bce = 0.0;
    double iou = 0.0;
    double af = 0.0;
    double total = 0.0;
    double w = 0.0;
};

namespace detail {

inline void require_same_dims(int h1, int w1, int h2, int w2, const char* what) {
    if (h1 != h2 || w1 != w2) throw std::invalid_argument(what);
}

inline void require_finite(const RealGrid& g, const char* what) {
    for (double v : g.data())
        if (!std::isfinite(v)) throw std::invalid_argument(what);
}

}  // namespace detail

/// Class-weighted binary cross-entropy, averaged over all pixels. The
/// weight multiplies the positive-pixel term only.
inline double weighted_bce(const RealGrid& targets, const RealGrid& outputs, double w) {
    detail::require_same_dims(targets.height(), targets.width(),
                              outputs.height(), outputs.width(),
                              "target/output dimensions differ");
    if (!(w > 0.0)) throw std::invalid_argument("weight must be positive");
    detail::require_finite(targets, "non-finite target value");
    detail::require_finite(outputs, "non-finite output value");

    double sum = 0.0;
    const auto& t = targets.data();
    const auto& o = outputs.data();
    for (size_t i = 0; i < t.size(); ++i) {
        const double p = std::clamp(o[i], kProbClamp, 1.0 - kProbClamp);
        sum += w * t[i] * std::log(p) + (1.0 - t[i]) * std::log(1.0 - p);
    }
    return -sum / double(t.size());
}

/// Soft overlap loss, averaged over all pixels.
inline double iou_loss(const RealGrid& targets, const RealGrid& outputs) {
    detail::require_same_dims(targets.height(), targets.width(),
                              outputs.height(), outputs.width(),
                              "target/output dimensions differ");
    detail::require_finite(targets, "non-finite target value");
    detail::require_finite(outputs, "non-finite output value");

    double sum = 0.0;
    const auto& t = targets.data();
    const auto& o = outputs.data();
    for (size_t i = 0; i < t.size(); ++i)
        sum += 1.0 - (t[i] * o[i]) / (t[i] + o[i] - t[i] * o[i] + kIouEps);
    return sum / double(t.size());
}

/// L1 distance between target and predicted fields, both components of
/// both fields, averaged over foreground pixels only. Zero when the mask
/// has no foreground.
inline double af_l1_loss(const AffinityFields& af_targets, const AffinityFields& af_preds,
                         const BinaryMask& fg_mask) {
    detail::require_same_dims(af_targets.height(), af_targets.width(),
                              af_preds.height(), af_preds.width(),
                              "field dimensions differ");
    detail::require_same_dims(af_targets.height(), af_targets.width(),
                              fg_mask.height(), fg_mask.width(),
                              "field/mask dimensions differ");

    double sum = 0.0;
    std::int64_t n_fg = 0;
    for (int y = 0; y < fg_mask.height(); ++y) {
        for (int x = 0; x < fg_mask.width(); ++x) {
            if (!fg_mask.fg(y, x)) continue;
            ++n_fg;
            const Vec2 th = af_targets.haf.at(y, x), oh = af_preds.haf.at(y, x);
            const Vec2 tv = af_targets.vaf.at(y, x), ov = af_preds.vaf.at(y, x);
            sum += std::abs(double(th.x) - oh.x) + std::abs(double(th.y) - oh.y) +
                   std::abs(double(tv.x) - ov.x) + std::abs(double(tv.y) - ov.y);
        }
    }
    return n_fg > 0 ? sum / double(n_fg) : 0.0;
}

inline LossValues total_loss(const LossInputs& inputs, double w = 9.6) {
    LossValues out;
    out.w = w;
    out.bce = weighted_bce(inputs.targets, inputs.outputs, w);
    out.iou = iou_loss(inputs.targets, inputs.outputs);
    out.af = af_l1_loss(inputs.af_targets, inputs.af_preds, inputs.fg_mask);
    out.total = out.bce + out.iou + out.af;
    return out;
}

}  // namespace laneaf

#endif  // LANEAF_LOSSES_HPP
