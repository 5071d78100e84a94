// Command-line front end wiring files to the library. Exit codes: 0 on
// success, 1 on validation or contract failures, 2 on I/O or format errors.
// Every subcommand accepts --config pointing at a JSON object; precedence
// is flag > config > compiled default.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "laneaf/laneaf.hpp"

namespace {

using nlohmann::json;

constexpr laneaf::Rgb kPalette[12] = {
    {230, 25, 75},  {60, 180, 75},  {255, 225, 25}, {0, 130, 200},
    {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230},
    {210, 245, 60}, {250, 190, 212}, {0, 128, 128}, {220, 190, 255},
};

laneaf::Rgb lane_color(int id) { return kPalette[(id - 1) % 12]; }

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    json cfg;
    try {
        cfg = json::parse(laneaf::detail::read_file(path));
    } catch (const json::exception& e) {
        throw laneaf::io_error(path + ": invalid config JSON: " + e.what());
    }
    if (!cfg.is_object()) throw laneaf::io_error(path + ": config must be a JSON object");
    return cfg;
}

// flag > config > compiled default; config keys are long flag names without
// the leading dashes
template <typename T>
void config_fill(const json& cfg, const CLI::App& sub, const std::string& flag, T& var) {
    if (sub.count(flag) > 0) return;
    const std::string key = flag.substr(2);
    const auto it = cfg.find(key);
    if (it == cfg.end()) return;
    try {
        var = it->get<T>();
    } catch (const json::exception&) {
        throw laneaf::io_error("config: wrong type for \"" + key + "\"");
    }
}

int worker_count(std::size_t jobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    long cap = long(hw);
    if (const char* env = std::getenv("LANEAF_CODEC_THREADS")) {
        char* end = nullptr;
        cap = std::strtol(env, &end, 10);
        if (*env == '\0' || (end != nullptr && *end != '\0') || cap < 1)
            throw std::invalid_argument("LANEAF_CODEC_THREADS must be a positive integer");
    }
    return int(std::min(cap, long(jobs)));
}

bool has_json_suffix(const std::string& path) {
    return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

json report_to_json(const laneaf::MetricReport& r) {
    json j{{"accuracy", r.accuracy},
           {"precision", r.precision},
           {"recall", r.recall},
           {"f1", r.f1},
           {"tp", r.tp},
           {"fp", r.fp},
           {"fn", r.fn},
           {"fp_per_gt_lane", r.fp_per_gt_lane},
           {"fn_per_gt_lane", r.fn_per_gt_lane}};
    json matches = json::array();
    for (const laneaf::LaneMatch& m : r.per_lane)
        matches.push_back({{"pred_id", m.pred_id}, {"gt_id", m.gt_id}, {"score", m.score}});
    j["per_lane"] = matches;
    if (r.exhaustive_tp >= 0) j["exhaustive_tp"] = r.exhaustive_tp;
    return j;
}

laneaf::LabelMask binary_to_visual(const laneaf::BinaryMask& bw) {
    laneaf::LabelMask vis(bw.height(), bw.width());
    for (int y = 0; y < bw.height(); ++y)
        for (int x = 0; x < bw.width(); ++x)
            if (bw.fg(y, x)) vis.set_label(y, x, 255);
    return vis;
}

std::string format_trace(const laneaf::DecodeTrace& trace, const laneaf::DecodeConfig& cfg,
                         int height, int width) {
    std::ostringstream os;
    os << "decode " << height << "x" << width << " tau=" << cfg.tau
       << " min_lane_pixels=" << cfg.min_lane_pixels << " max_lanes=" << cfg.max_lanes << "\n";
    for (const laneaf::TraceRow& row : trace.rows) {
        if (row.clusters.empty()) continue;
        os << "row " << row.row << ":";
        for (std::size_t c = 0; c < row.clusters.size(); ++c) {
            const laneaf::RowCluster& cl = row.clusters[c];
            os << " c" << c << "[" << cl.columns.front() << ".." << cl.columns.back()
               << " n=" << cl.columns.size() << " mean=" << cl.mean_col << "]";
        }
        os << "\n";
        for (const laneaf::TraceAssignment& a : row.assignments)
            os << "  lane " << a.lane_id << " <- c" << a.cluster_index << " err=" << a.error
               << "\n";
        for (const laneaf::TraceSpawn& s : row.spawns)
            os << "  spawn lane " << s.lane_id << " <- c" << s.cluster_index << "\n";
        for (int c : row.dropped_clusters) os << "  drop c" << c << " (lane cap)\n";
    }
    os << "final labels:";
    for (std::size_t i = 0; i < trace.final_labels.size(); ++i)
        if (trace.final_labels[i] == 0)
            os << " " << i + 1 << "->erased";
        else
            os << " " << i + 1 << "->" << trace.final_labels[i];
    os << "\n";
    return os.str();
}

// --- encode ---

struct EncodeArgs {
    std::string mask_path, fields_path, bw_path, config;
    bool literal_vaf = false;
};

int run_encode(const CLI::App& sub, EncodeArgs& a) {
    const json cfg = load_config(a.config);
    config_fill(cfg, sub, "--literal-vaf", a.literal_vaf);

    const laneaf::LabelMask mask = laneaf::read_mask(a.mask_path);
    laneaf::EncodeOptions opts;
    opts.literal_vaf = a.literal_vaf;
    const laneaf::EncodeResult enc = laneaf::encode(mask, opts);
    laneaf::write_fields(enc.fields, a.fields_path);
    if (!a.bw_path.empty())
        laneaf::write_mask(binary_to_visual(laneaf::encode_binary_companion(mask)), a.bw_path);
    return 0;
}

// --- decode ---

struct DecodeArgs {
    std::string bw_path, fields_path, out_path, lanes_path, trace_path, config;
    double tau = laneaf::DecodeConfig{}.tau;
    int min_lane_pixels = 0;
    int max_lanes = 0;
};

int run_decode(const CLI::App& sub, DecodeArgs& a) {
    const json cfg = load_config(a.config);
    config_fill(cfg, sub, "--tau", a.tau);
    config_fill(cfg, sub, "--min-lane-pixels", a.min_lane_pixels);
    config_fill(cfg, sub, "--max-lanes", a.max_lanes);

    const laneaf::BinaryMask bw = laneaf::binarize(laneaf::read_mask(a.bw_path));
    const laneaf::AffinityFields fields = laneaf::read_fields(a.fields_path);
    laneaf::DecodeConfig dc{a.tau, a.min_lane_pixels, a.max_lanes};
    const laneaf::DecodeResult dec = laneaf::decode(bw, fields, dc);
    laneaf::write_mask(dec.labels, a.out_path);
    if (!a.lanes_path.empty())
        laneaf::write_lanes_json(laneaf::lanes_from_label_mask(dec.labels), a.lanes_path);
    if (!a.trace_path.empty())
        laneaf::detail::write_file(a.trace_path,
                                   format_trace(dec.trace, dc, bw.height(), bw.width()));
    return 0;
}

// --- roundtrip ---

struct RoundtripArgs {
    std::vector<std::string> mask_paths;
    std::string config;
    double tau = laneaf::DecodeConfig{}.tau;
    bool literal_vaf = false;
    bool allow_imperfect = false;
};

enum class FileStatus { ok, imperfect, invalid, io_failed };

struct FileOutcome {
    std::string text;
    FileStatus status = FileStatus::ok;
};

FileOutcome roundtrip_one(const std::string& path, double tau, bool literal_vaf) {
    FileOutcome out;
    std::ostringstream os;
    try {
        const laneaf::LabelMask mask = laneaf::read_mask(path);
        laneaf::EncodeOptions opts;
        opts.literal_vaf = literal_vaf;
        const laneaf::EncodeResult enc = laneaf::encode(mask, opts);
        laneaf::DecodeConfig dc;
        dc.tau = tau;
        const laneaf::DecodeResult dec = laneaf::decode(laneaf::binarize(mask), enc.fields, dc);
        const laneaf::MaskComparison cmp = laneaf::compare_label_masks(mask, dec.labels);

        char line[256];
        std::snprintf(line, sizeof line,
                      "%s: agreement=%.6f lanes_in=%d lanes_out=%d permutation_equal=%s",
                      path.c_str(), cmp.agreement, cmp.labels_a, cmp.labels_b,
                      cmp.permutation_equal ? "true" : "false");
        os << line << "\n";
        for (const auto& [key, count] : cmp.confusion)
            if (key.first != 0 || key.second != 0)
                os << "  confusion " << key.first << "->" << key.second << " pixels=" << count
                   << "\n";
        out.status = cmp.permutation_equal ? FileStatus::ok : FileStatus::imperfect;
    } catch (const laneaf::io_error& e) {
        os << path << ": error: " << e.what() << "\n";
        out.status = FileStatus::io_failed;
    } catch (const std::exception& e) {
        os << path << ": error: " << e.what() << "\n";
        out.status = FileStatus::invalid;
    }
    out.text = os.str();
    return out;
}

int run_roundtrip(const CLI::App& sub, RoundtripArgs& a) {
    const json cfg = load_config(a.config);
    config_fill(cfg, sub, "--tau", a.tau);
    config_fill(cfg, sub, "--literal-vaf", a.literal_vaf);
    config_fill(cfg, sub, "--allow-imperfect", a.allow_imperfect);

    std::vector<FileOutcome> outcomes(a.mask_paths.size());
    const int workers = worker_count(a.mask_paths.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < a.mask_paths.size(); ++i)
            outcomes[i] = roundtrip_one(a.mask_paths[i], a.tau, a.literal_vaf);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < a.mask_paths.size();)
                    outcomes[i] = roundtrip_one(a.mask_paths[i], a.tau, a.literal_vaf);
            });
        for (std::thread& th : pool) th.join();
    }

    int exit_code = 0;
    for (const FileOutcome& o : outcomes) {
        std::cout << o.text;
        if (o.status == FileStatus::io_failed)
            exit_code = 2;
        else if (o.status == FileStatus::invalid && exit_code != 2)
            exit_code = 1;
        else if (o.status == FileStatus::imperfect && !a.allow_imperfect && exit_code == 0)
            exit_code = 1;
    }
    return exit_code;
}

// --- eval ---

struct EvalArgs {
    std::string pred_path, gt_path, config;
    std::string mode = "auto";
    double tolerance = 20.0;
    double accuracy_threshold = 0.85;
    double iou_threshold = 0.5;
    int lane_width = 30;
    int height = 0, width = 0;
    std::vector<int> anchors;
    bool exhaustive = false;
};

laneaf::LaneSet load_lane_input(const std::string& path, int& height, int& width) {
    if (has_json_suffix(path)) return laneaf::read_lanes_json(path);
    const laneaf::LabelMask mask = laneaf::read_mask(path);
    height = mask.height();
    width = mask.width();
    return laneaf::lanes_from_label_mask(mask);
}

int run_eval(const CLI::App& sub, EvalArgs& a) {
    const json cfg = load_config(a.config);
    config_fill(cfg, sub, "--mode", a.mode);
    config_fill(cfg, sub, "--tolerance", a.tolerance);
    config_fill(cfg, sub, "--accuracy-threshold", a.accuracy_threshold);
    config_fill(cfg, sub, "--iou-threshold", a.iou_threshold);
    config_fill(cfg, sub, "--lane-width", a.lane_width);
    config_fill(cfg, sub, "--height", a.height);
    config_fill(cfg, sub, "--width", a.width);
    config_fill(cfg, sub, "--anchors", a.anchors);
    config_fill(cfg, sub, "--exhaustive", a.exhaustive);

    int mask_h = 0, mask_w = 0;
    const laneaf::LaneSet pred = load_lane_input(a.pred_path, mask_h, mask_w);
    const laneaf::LaneSet gt = load_lane_input(a.gt_path, mask_h, mask_w);

    std::string mode = a.mode;
    if (mode == "auto")
        mode = has_json_suffix(a.pred_path) && has_json_suffix(a.gt_path) ? "point" : "iou";
    if (mode != "point" && mode != "iou")
        throw std::invalid_argument("mode must be point or iou");

    laneaf::MetricConfig mc;
    mc.point_tolerance = a.tolerance;
    mc.lane_accuracy_threshold = a.accuracy_threshold;
    mc.iou_threshold = a.iou_threshold;
    mc.lane_width = a.lane_width;
    mc.debug_exhaustive_match = a.exhaustive;
    if (!a.anchors.empty()) mc.row_anchors = a.anchors;

    laneaf::MetricReport report;
    if (mode == "point") {
        report = laneaf::point_accuracy(pred, gt, mc);
    } else {
        const int h = a.height > 0 ? a.height : mask_h;
        const int w = a.width > 0 ? a.width : mask_w;
        if (h < 1 || w < 1)
            throw std::invalid_argument("--height and --width are required for iou mode with JSON inputs");
        report = laneaf::lane_f1(pred, gt, h, w, mc);
    }
    std::cout << report_to_json(report).dump(2) << "\n";
    return 0;
}

// --- loss ---

struct LossArgs {
    std::string targets_path, outputs_path, af_targets_path, af_preds_path, fg_path, config;
    double w = 9.6;
};

int run_loss(const CLI::App& sub, LossArgs& a) {
    const json cfg = load_config(a.config);
    config_fill(cfg, sub, "--bce-weight", a.w);

    const laneaf::LabelMask target_mask = laneaf::read_mask(a.targets_path);
    const laneaf::LabelMask output_mask = laneaf::read_mask(a.outputs_path);
    laneaf::RealGrid targets(target_mask.height(), target_mask.width(), 0.0);
    for (int y = 0; y < target_mask.height(); ++y)
        for (int x = 0; x < target_mask.width(); ++x)
            targets.at(y, x) = target_mask.label(y, x) != 0 ? 1.0 : 0.0;
    // predictions arrive as 8-bit PGM; value/255 recovers the probability
    laneaf::RealGrid outputs(output_mask.height(), output_mask.width(), 0.0);
    for (int y = 0; y < output_mask.height(); ++y)
        for (int x = 0; x < output_mask.width(); ++x)
            outputs.at(y, x) = output_mask.label(y, x) / 255.0;

    const laneaf::BinaryMask fg = a.fg_path.empty()
                                      ? laneaf::binarize(target_mask)
                                      : laneaf::binarize(laneaf::read_mask(a.fg_path));
    laneaf::LossInputs inputs{std::move(targets), std::move(outputs),
                              laneaf::read_fields(a.af_targets_path),
                              laneaf::read_fields(a.af_preds_path), fg};
    const laneaf::LossValues v = laneaf::total_loss(inputs, a.w);
    const json out{{"bce", v.bce}, {"iou", v.iou}, {"af", v.af}, {"total", v.total}, {"w", v.w}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

// --- synth ---

struct SynthArgs {
    std::string out_mask, fields_path, bw_path, config;
    int height = 74, width = 205, lanes = 4, thickness = 3;
    int min_separation = 2, dash_period = 0, retry_budget = 64;
    double dash_duty = 0.5, max_slope = 0.2, max_curvature = 0.0015;
    bool converge = false, literal_vaf = false;
    std::uint64_t seed = 0;
};

int run_synth(const CLI::App& sub, SynthArgs& a) {
    const json cfg = load_config(a.config);
    config_fill(cfg, sub, "--height", a.height);
    config_fill(cfg, sub, "--width", a.width);
    config_fill(cfg, sub, "--lanes", a.lanes);
    config_fill(cfg, sub, "--thickness", a.thickness);
    config_fill(cfg, sub, "--min-separation", a.min_separation);
    config_fill(cfg, sub, "--dash-period", a.dash_period);
    config_fill(cfg, sub, "--dash-duty", a.dash_duty);
    config_fill(cfg, sub, "--max-slope", a.max_slope);
    config_fill(cfg, sub, "--max-curvature", a.max_curvature);
    config_fill(cfg, sub, "--converge", a.converge);
    config_fill(cfg, sub, "--seed", a.seed);
    config_fill(cfg, sub, "--retry-budget", a.retry_budget);
    config_fill(cfg, sub, "--literal-vaf", a.literal_vaf);

    laneaf::SceneSpec spec;
    spec.height = a.height;
    spec.width = a.width;
    spec.num_lanes = a.lanes;
    spec.thickness = a.thickness;
    spec.min_separation = a.min_separation;
    spec.max_slope = a.max_slope;
    spec.max_curvature = a.max_curvature;
    spec.converge = a.converge;
    spec.seed = a.seed;
    spec.retry_budget = a.retry_budget;
    if (a.dash_period > 0) spec.dash = laneaf::DashSpec{a.dash_period, a.dash_duty};

    const laneaf::LabelMask mask = laneaf::generate_scene(spec);
    laneaf::write_mask(mask, a.out_mask);
    if (!a.fields_path.empty()) {
        laneaf::EncodeOptions opts;
        opts.literal_vaf = a.literal_vaf;
        laneaf::write_fields(laneaf::encode(mask, opts).fields, a.fields_path);
    }
    if (!a.bw_path.empty())
        laneaf::write_mask(binary_to_visual(laneaf::encode_binary_companion(mask)), a.bw_path);
    return 0;
}

// --- perturb ---

struct PerturbArgs {
    std::string fields_in, fields_out, mask_in, mask_out, config;
    double angle_sigma = 0.0, flip_prob = 0.0;
    std::uint64_t seed = 0;
};

int run_perturb(const CLI::App& sub, PerturbArgs& a) {
    const json cfg = load_config(a.config);
    config_fill(cfg, sub, "--angle-sigma", a.angle_sigma);
    config_fill(cfg, sub, "--flip-prob", a.flip_prob);
    config_fill(cfg, sub, "--seed", a.seed);

    const bool do_fields = !a.fields_in.empty() || !a.fields_out.empty();
    const bool do_mask = !a.mask_in.empty() || !a.mask_out.empty();
    if (do_fields && (a.fields_in.empty() || a.fields_out.empty()))
        throw std::invalid_argument("--fields and --out-fields must be given together");
    if (do_mask && (a.mask_in.empty() || a.mask_out.empty()))
        throw std::invalid_argument("--mask and --out-mask must be given together");
    if (!do_fields && !do_mask)
        throw std::invalid_argument("nothing to perturb: give --fields/--out-fields or --mask/--out-mask");

    laneaf::NoiseSpec noise;
    noise.angle_sigma = a.angle_sigma;
    noise.mask_flip_prob = a.flip_prob;
    noise.seed = a.seed;
    if (do_fields)
        laneaf::write_fields(laneaf::perturb_fields(laneaf::read_fields(a.fields_in), noise),
                             a.fields_out);
    if (do_mask) {
        const laneaf::BinaryMask bw = laneaf::binarize(laneaf::read_mask(a.mask_in));
        laneaf::write_mask(binary_to_visual(laneaf::perturb_mask(bw, noise)), a.mask_out);
    }
    return 0;
}

// --- bench ---

struct BenchArgs {
    int height = 74, width = 205, lanes = 6, iters = 50, thickness = 3;
    double tau = laneaf::DecodeConfig{}.tau;
    std::uint64_t seed = 0;
    std::string config;
};

int run_bench(const CLI::App& sub, BenchArgs& a) {
    const json cfg = load_config(a.config);
    config_fill(cfg, sub, "--height", a.height);
    config_fill(cfg, sub, "--width", a.width);
    config_fill(cfg, sub, "--lanes", a.lanes);
    config_fill(cfg, sub, "--iters", a.iters);
    config_fill(cfg, sub, "--thickness", a.thickness);
    config_fill(cfg, sub, "--tau", a.tau);
    config_fill(cfg, sub, "--seed", a.seed);
    if (a.iters < 1) throw std::invalid_argument("--iters must be at least 1");

    laneaf::SceneSpec spec;
    spec.height = a.height;
    spec.width = a.width;
    spec.num_lanes = a.lanes;
    spec.thickness = a.thickness;
    spec.seed = a.seed;
    const laneaf::LabelMask mask = laneaf::generate_scene(spec);
    const laneaf::AffinityFields fields = laneaf::encode(mask).fields;
    const laneaf::BinaryMask bw = laneaf::binarize(mask);
    laneaf::DecodeConfig dc;
    dc.tau = a.tau;

    int decoded_lanes = int(laneaf::distinct_labels(laneaf::decode(bw, fields, dc).labels).size());
    std::vector<double> ms(a.iters, 0.0);
    for (int i = 0; i < a.iters; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const laneaf::DecodeResult dec = laneaf::decode(bw, fields, dc);
        const auto t1 = std::chrono::steady_clock::now();
        ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
        decoded_lanes = int(laneaf::distinct_labels(dec.labels).size());
    }
    std::sort(ms.begin(), ms.end());
    const std::size_t n = ms.size();
    const double median = n % 2 ? ms[n / 2] : (ms[n / 2 - 1] + ms[n / 2]) / 2.0;
    const double p95 = ms[std::min(n - 1, std::size_t(std::ceil(0.95 * double(n))) - 1)];

    const json out{{"height", a.height}, {"width", a.width},   {"lanes", a.lanes},
                   {"iters", a.iters},   {"decoded_lanes", decoded_lanes},
                   {"median_ms", median}, {"p95_ms", p95},
                   {"min_ms", ms.front()}, {"max_ms", ms.back()}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

// --- overlay ---

struct OverlayArgs {
    std::string input, output, bw_path, config;
    int height = 0, width = 0, line_width = 3;
};

int run_overlay(const CLI::App& sub, OverlayArgs& a) {
    const json cfg = load_config(a.config);
    config_fill(cfg, sub, "--height", a.height);
    config_fill(cfg, sub, "--width", a.width);
    config_fill(cfg, sub, "--line-width", a.line_width);

    int h = a.height, w = a.width;
    std::optional<laneaf::BinaryMask> backdrop;
    if (!a.bw_path.empty()) {
        backdrop = laneaf::binarize(laneaf::read_mask(a.bw_path));
        h = backdrop->height();
        w = backdrop->width();
    }

    std::optional<laneaf::LabelMask> mask;
    laneaf::LaneSet lanes;
    if (has_json_suffix(a.input)) {
        lanes = laneaf::read_lanes_json(a.input);
        if (h < 1 || w < 1)
            throw std::invalid_argument("lanes input needs --bw or --height/--width for dimensions");
    } else {
        mask = laneaf::read_mask(a.input);
        h = mask->height();
        w = mask->width();
    }

    laneaf::Grid<laneaf::Rgb> image(h, w, laneaf::Rgb{0, 0, 0});
    if (backdrop && backdrop->height() == h && backdrop->width() == w)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (backdrop->fg(y, x)) image.at(y, x) = {96, 96, 96};

    if (mask) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (const int id = mask->label(y, x); id > 0) image.at(y, x) = lane_color(id);
    } else {
        for (const laneaf::Lane& lane : lanes.lanes) {
            const laneaf::BinaryMask strip = laneaf::rasterize_lane(lane, a.line_width, h, w);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if (strip.fg(y, x)) image.at(y, x) = lane_color(lane.id);
        }
    }
    laneaf::write_ppm(image, a.output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lane instance / affinity field codec"};
    app.require_subcommand(1);
    int rc = 0;

    auto add_config = [](CLI::App* sub, std::string& var) {
        sub->add_option("--config", var, "JSON config file; flags take precedence");
    };

    EncodeArgs encode_args;
    CLI::App* enc = app.add_subcommand("encode", "Label mask -> affinity fields");
    enc->add_option("mask", encode_args.mask_path, "input label mask (PGM)")->required();
    enc->add_option("fields", encode_args.fields_path, "output fields (LAF1)")->required();
    enc->add_option("--bw", encode_args.bw_path, "also write the binary mask (PGM)");
    enc->add_flag("--literal-vaf", encode_args.literal_vaf,
                  "store vertical vectors as (sign(dx), -1) instead of unit displacement");
    add_config(enc, encode_args.config);
    enc->callback([&] { rc = run_encode(*enc, encode_args); });

    DecodeArgs decode_args;
    CLI::App* dec = app.add_subcommand("decode", "Binary mask + fields -> labeled lanes");
    dec->add_option("bw", decode_args.bw_path, "input binary mask (PGM, nonzero = lane)")->required();
    dec->add_option("fields", decode_args.fields_path, "input fields (LAF1)")->required();
    dec->add_option("out", decode_args.out_path, "output label mask (PGM)")->required();
    dec->add_option("--tau", decode_args.tau, "association error threshold");
    dec->add_option("--min-lane-pixels", decode_args.min_lane_pixels,
                    "erase lanes smaller than this after decoding");
    dec->add_option("--max-lanes", decode_args.max_lanes, "cap on spawned lanes (0 = unlimited)");
    dec->add_option("--lanes-json", decode_args.lanes_path, "also write lane polylines (JSON)");
    dec->add_option("--trace", decode_args.trace_path, "also write a human-readable decode trace");
    add_config(dec, decode_args.config);
    dec->callback([&] { rc = run_decode(*dec, decode_args); });

    RoundtripArgs rt_args;
    CLI::App* rt = app.add_subcommand("roundtrip", "encode -> decode -> compare, per input mask");
    rt->add_option("masks", rt_args.mask_paths, "label masks (PGM)")->required();
    rt->add_option("--tau", rt_args.tau, "association error threshold");
    rt->add_flag("--literal-vaf", rt_args.literal_vaf, "encode with (sign(dx), -1) vertical vectors");
    rt->add_flag("--allow-imperfect", rt_args.allow_imperfect,
                 "exit 0 even when a round trip is not label-permutation exact");
    add_config(rt, rt_args.config);
    rt->callback([&] { rc = run_roundtrip(*rt, rt_args); });

    EvalArgs eval_args;
    CLI::App* ev = app.add_subcommand("eval", "Compare predicted lanes against ground truth");
    ev->add_option("pred", eval_args.pred_path, "predicted lanes (.json) or label mask (PGM)")->required();
    ev->add_option("gt", eval_args.gt_path, "ground-truth lanes (.json) or label mask (PGM)")->required();
    ev->add_option("--mode", eval_args.mode, "point | iou (default: point for JSON, iou for masks)");
    ev->add_option("--tolerance", eval_args.tolerance, "point mode: per-point column tolerance");
    ev->add_option("--accuracy-threshold", eval_args.accuracy_threshold,
                   "point mode: per-lane accuracy needed for a true positive");
    ev->add_option("--lane-width", eval_args.lane_width, "iou mode: rasterized lane width");
    ev->add_option("--iou-threshold", eval_args.iou_threshold, "iou mode: match threshold");
    ev->add_option("--height", eval_args.height, "grid height for iou mode with JSON inputs");
    ev->add_option("--width", eval_args.width, "grid width for iou mode with JSON inputs");
    ev->add_option("--anchors", eval_args.anchors, "point mode: explicit row anchors");
    ev->add_flag("--exhaustive", eval_args.exhaustive,
                 "also report the exhaustive-matching TP count (<= 6 lanes per side)");
    add_config(ev, eval_args.config);
    ev->callback([&] { rc = run_eval(*ev, eval_args); });

    LossArgs loss_args;
    CLI::App* ls = app.add_subcommand("loss", "Training losses from mask + field files");
    ls->add_option("--targets", loss_args.targets_path, "ground-truth mask (PGM, nonzero = lane)")->required();
    ls->add_option("--outputs", loss_args.outputs_path, "predicted probabilities (PGM, value/255)")->required();
    ls->add_option("--af-targets", loss_args.af_targets_path, "ground-truth fields (LAF1)")->required();
    ls->add_option("--af-preds", loss_args.af_preds_path, "predicted fields (LAF1)")->required();
    ls->add_option("--fg", loss_args.fg_path, "foreground mask for the field loss (default: targets)");
    ls->add_option("--bce-weight", loss_args.w, "positive-class weight in the cross entropy");
    add_config(ls, loss_args.config);
    ls->callback([&] { rc = run_loss(*ls, loss_args); });

    SynthArgs synth_args;
    CLI::App* sy = app.add_subcommand("synth", "Generate a synthetic lane scene");
    sy->add_option("out", synth_args.out_mask, "output label mask (PGM)")->required();
    sy->add_option("--height", synth_args.height, "grid height");
    sy->add_option("--width", synth_args.width, "grid width");
    sy->add_option("--lanes", synth_args.lanes, "number of lanes");
    sy->add_option("--thickness", synth_args.thickness, "lane thickness in pixels");
    sy->add_option("--min-separation", synth_args.min_separation, "minimum inter-lane gap per row");
    sy->add_option("--dash-period", synth_args.dash_period, "dash period in rows (0 = solid)");
    sy->add_option("--dash-duty", synth_args.dash_duty, "drawn fraction of each dash period");
    sy->add_option("--max-slope", synth_args.max_slope, "max |linear| coefficient");
    sy->add_option("--max-curvature", synth_args.max_curvature, "max |quadratic| coefficient");
    sy->add_flag("--converge", synth_args.converge, "pull the two middle lanes to the minimum gap at the top");
    sy->add_option("--seed", synth_args.seed, "RNG seed");
    sy->add_option("--retry-budget", synth_args.retry_budget, "resampling attempts before giving up");
    sy->add_option("--fields", synth_args.fields_path, "also encode and write fields (LAF1)");
    sy->add_option("--bw", synth_args.bw_path, "also write the binary mask (PGM)");
    sy->add_flag("--literal-vaf", synth_args.literal_vaf, "encode with (sign(dx), -1) vertical vectors");
    add_config(sy, synth_args.config);
    sy->callback([&] { rc = run_synth(*sy, synth_args); });

    PerturbArgs perturb_args;
    CLI::App* pb = app.add_subcommand("perturb", "Add field/mask noise");
    pb->add_option("--fields", perturb_args.fields_in, "input fields (LAF1)");
    pb->add_option("--out-fields", perturb_args.fields_out, "output fields (LAF1)");
    pb->add_option("--mask", perturb_args.mask_in, "input mask (PGM)");
    pb->add_option("--out-mask", perturb_args.mask_out, "output binary mask (PGM)");
    pb->add_option("--angle-sigma", perturb_args.angle_sigma, "Gaussian rotation sigma in degrees");
    pb->add_option("--flip-prob", perturb_args.flip_prob, "per-pixel flip probability");
    pb->add_option("--seed", perturb_args.seed, "RNG seed");
    add_config(pb, perturb_args.config);
    pb->callback([&] { rc = run_perturb(*pb, perturb_args); });

    BenchArgs bench_args;
    CLI::App* bn = app.add_subcommand("bench", "Time decode on a synthetic scene");
    bn->add_option("--height", bench_args.height, "grid height");
    bn->add_option("--width", bench_args.width, "grid width");
    bn->add_option("--lanes", bench_args.lanes, "number of lanes");
    bn->add_option("--thickness", bench_args.thickness, "lane thickness in pixels");
    bn->add_option("--iters", bench_args.iters, "timed decode iterations");
    bn->add_option("--tau", bench_args.tau, "association error threshold");
    bn->add_option("--seed", bench_args.seed, "scene RNG seed");
    add_config(bn, bench_args.config);
    bn->callback([&] { rc = run_bench(*bn, bench_args); });

    OverlayArgs overlay_args;
    CLI::App* ov = app.add_subcommand("overlay", "Render lanes as a color PPM image");
    ov->add_option("input", overlay_args.input, "label mask (PGM) or lanes (.json)")->required();
    ov->add_option("out", overlay_args.output, "output image (PPM)")->required();
    ov->add_option("--bw", overlay_args.bw_path, "binary mask drawn as a gray backdrop");
    ov->add_option("--height", overlay_args.height, "grid height for JSON input");
    ov->add_option("--width", overlay_args.width, "grid width for JSON input");
    ov->add_option("--line-width", overlay_args.line_width, "rasterized width for JSON input");
    add_config(ov, overlay_args.config);
    ov->callback([&] { rc = run_overlay(*ov, overlay_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const laneaf::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
