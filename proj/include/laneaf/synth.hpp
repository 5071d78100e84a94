#ifndef LANEAF_SYNTH_HPP
#define LANEAF_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "laneaf/grid.hpp"

// Deterministic synthetic lane scenes and field/mask perturbations. All
// randomness flows through SplitMix64 with explicit seeds, so a given spec
// reproduces the same mask byte-for-byte on every run and platform; no
// standard-library distributions are involved.

namespace laneaf {

/// SplitMix64: the 64-bit mixing generator from Steele, Lea and Flood's
/// splittable-RNG construction. State advances by the golden-gamma
/// constant; output is the finalizer of the new state.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// uniform in [0, 1), 53-bit resolution
    double next_double() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// uniform integer in [lo, hi], inclusive
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = std::uint64_t(hi - lo) + 1;
        using u128 = unsigned __int128;
        return lo + int((u128(next()) * span) >> 64);
    }

    /// standard normal via Box-Muller; one fresh pair of draws per call
    double normal() {
        double u1 = 0.0;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

struct DashSpec {
    int period = 6;     // rows
    double duty = 0.5;  // fraction of the period that is drawn
};

struct SceneSpec {
    int height = 74;
    int width = 205;
    int num_lanes = 4;
    // lane centers follow x(t) = c + b*t + a*t^2 with t = rows above the
    // bottom row; a and b are drawn uniformly from these symmetric ranges
    double max_curvature = 0.0015;
    double max_slope = 0.2;
    int thickness = 3;
    std::optional<DashSpec> dash;
    // required column gap between nearest pixels of different lanes, per row
    int min_separation = 2;
    // pull the two middle lanes together until their pixel gap at the top
    // row is exactly min_separation
    bool converge = false;
    std::uint64_t seed = 0;
    int retry_budget = 64;
};

struct NoiseSpec {
    double angle_sigma = 0.0;     // degrees of Gaussian rotation per vector
    double mask_flip_prob = 0.0;  // per-pixel Bernoulli flip
    std::uint64_t seed = 0;
};

namespace detail {

struct LaneCurve {
    double c = 0.0, b = 0.0, a = 0.0;

    double center(int t) const { return c + b * t + a * double(t) * t; }
};

}  // namespace detail

/// Generate a labeled scene. Lanes are ordered left to right at the bottom
/// row and labeled 1..K; dashes remove whole rows of a lane on a per-lane
/// phase. Curves are resampled until every row keeps the required
/// separation with every lane fully inside the image; an infeasible spec
/// exhausts the retry budget and throws.
inline LabelMask generate_scene(const SceneSpec& spec) {
    if (spec.height < 1 || spec.width < 1)
        throw std::invalid_argument("scene dimensions must be at least 1x1");
    if (spec.num_lanes < 0 || spec.num_lanes > 255)
        throw std::invalid_argument("lane count must be in [0, 255]");
    if (spec.thickness < 1) throw std::invalid_argument("thickness must be at least 1");
    if (spec.min_separation < 0)
        throw std::invalid_argument("separation must be non-negative");
    if (spec.dash && (spec.dash->period < 1 || spec.dash->duty <= 0.0 || spec.dash->duty > 1.0))
        throw std::invalid_argument("dash period must be >= 1 and duty in (0, 1]");

    LabelMask mask(spec.height, spec.width);
    if (spec.num_lanes == 0) return mask;

    SplitMix64 rng(spec.seed);
    const int k = spec.num_lanes;
    const int half_lo = (spec.thickness - 1) / 2;
    const int half_hi = spec.thickness / 2;
    // nearest-pixel gap s requires centers (rounded) s + thickness - 1 apart
    const double center_gap = spec.min_separation + spec.thickness - 1;
    const double margin = half_lo + 1;

    std::vector<detail::LaneCurve> curves(k);
    bool feasible = false;
    for (int attempt = 0; attempt < spec.retry_budget && !feasible; ++attempt) {
        // spread bottom anchors evenly with jitter, then draw curvatures
        const double usable = spec.width - 2.0 * margin;
        if (usable < (k - 1) * (center_gap + 1.0))
            throw std::invalid_argument("lanes do not fit the width at the required separation");
        for (int i = 0; i < k; ++i) {
            const double slot = usable / k;
            curves[i].c = margin + slot * i + rng.uniform(0.25, 0.75) * slot;
            curves[i].b = rng.uniform(-spec.max_slope, spec.max_slope);
            curves[i].a = rng.uniform(-spec.max_curvature, spec.max_curvature);
        }
        std::sort(curves.begin(), curves.end(),
                  [](const auto& l, const auto& r) { return l.c < r.c; });

        if (spec.converge && k >= 2) {
            // straight segments meeting the exact target gap at the top row
            const int li = (k - 1) / 2, ri = li + 1;
            const double mid = (curves[li].c + curves[ri].c) / 2.0;
            const int top_t = spec.height - 1;
            const double top_gap = spec.min_separation + spec.thickness - 1;
            curves[li].a = curves[ri].a = 0.0;
            curves[li].b = top_t > 0 ? ((mid - top_gap / 2.0) - curves[li].c) / top_t : 0.0;
            curves[ri].b = top_t > 0 ? ((mid + top_gap / 2.0) - curves[ri].c) / top_t : 0.0;
        }

        feasible = true;
        for (int t = 0; t < spec.height && feasible; ++t) {
            double prev = -1e18;
            for (int i = 0; i < k; ++i) {
                const double c = std::round(curves[i].center(t));
                if (c - half_lo < 0 || c + half_hi > spec.width - 1 || c - prev < center_gap) {
                    feasible = false;
                    break;
                }
                prev = c;
            }
        }
    }
    if (!feasible)
        throw std::invalid_argument("no feasible scene within the retry budget");

    std::vector<int> phases(k, 0);
    if (spec.dash)
        for (int i = 0; i < k; ++i) phases[i] = rng.uniform_int(0, spec.dash->period - 1);

    for (int i = 0; i < k; ++i) {
        const std::uint8_t label = std::uint8_t(i + 1);
        for (int t = 0; t < spec.height; ++t) {
            if (spec.dash) {
                const int duty_rows = std::max(1, int(std::round(spec.dash->duty * spec.dash->period)));
                if ((t + phases[i]) % spec.dash->period >= duty_rows) continue;
            }
            const int y = spec.height - 1 - t;
            const int c = int(std::round(curves[i].center(t)));
            for (int x = c - half_lo; x <= c + half_hi; ++x)
                mask.set_label(y, x, label);
        }
    }
    return mask;
}

/// Rotate every nonzero field vector by an independent Gaussian angle and
/// renormalize to unit length; zero vectors stay zero.
inline AffinityFields perturb_fields(const AffinityFields& fields, const NoiseSpec& noise) {
    if (noise.angle_sigma < 0.0)
        throw std::invalid_argument("angle sigma must be non-negative");
    AffinityFields out = fields;
    if (noise.angle_sigma == 0.0) return out;

    SplitMix64 rng(noise.seed);
    const double sigma_rad = noise.angle_sigma * std::numbers::pi / 180.0;
    auto rotate = [&](Vec2 v) -> Vec2 {
        if (v.x == 0.0f && v.y == 0.0f) return v;
        const double theta = rng.normal() * sigma_rad;
        const double cs = std::cos(theta), sn = std::sin(theta);
        const double rx = cs * v.x - sn * v.y;
        const double ry = sn * v.x + cs * v.y;
        const double len = std::sqrt(rx * rx + ry * ry);
        return {float(rx / len), float(ry / len)};
    };
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            out.haf.at(y, x) = rotate(out.haf.at(y, x));
            out.vaf.at(y, x) = rotate(out.vaf.at(y, x));
        }
    }
    return out;
}

/// Flip each pixel independently with the configured probability.
inline BinaryMask perturb_mask(const BinaryMask& bw, const NoiseSpec& noise) {
    if (noise.mask_flip_prob < 0.0 || noise.mask_flip_prob > 1.0)
        throw std::invalid_argument("flip probability must be in [0, 1]");
    BinaryMask out = bw;
    if (noise.mask_flip_prob == 0.0) return out;
    SplitMix64 rng(noise.seed);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            if (rng.next_double() < noise.mask_flip_prob)
                out.set_fg(y, x, !out.fg(y, x));
    return out;
}

}  // namespace laneaf

#endif  // LANEAF_SYNTH_HPP
