// evtrack command-line front end: track, eval, distance, synth, bench.

#include <evtrack/bench.hpp>
#include <evtrack/geometry.hpp>
#include <evtrack/metrics.hpp>
#include <evtrack/pipeline.hpp>
#include <evtrack/stream_io.hpp>
#include <evtrack/synth.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace evtrack;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kNumeric = 3 };

struct TrackArgs {
    std::string manifest;
    std::string config;
    std::string mode;
    double rate{0.0};
    std::string out;
    std::string emit_series;
};

RunConfig load_run_config(const TrackArgs& a) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : parse_run_config(read_file(a.config));
    if (a.config.empty()) cfg.apply_mode(cfg.mode);
    if (!a.mode.empty()) cfg.apply_mode(a.mode);
    if (a.rate > 0.0) cfg.window.tracking_rate_hz = a.rate;
    return cfg;
}

TrackingResult track_sequence(const TrackArgs& a, const RunConfig& cfg) {
    const bool need_images = cfg.tracker.mask_kind == MaskKind::edge_based &&
                             (cfg.tracker.recovery_enabled || cfg.tracker.inter_frame_enabled);
    const auto data = load_sequence(a.manifest, cfg.detection_filter, need_images);
    return run_tracking(data, cfg);
}

void add_track_options(CLI::App* cmd, TrackArgs& a) {
    cmd->add_option("--manifest,-m", a.manifest, "sequence manifest JSON")->required();
    cmd->add_option("--config,-c", a.config, "run configuration JSON");
    cmd->add_option("--mode", a.mode, "ablation mode: baseline, A1-A3, B1-B3");
    cmd->add_option("--rate,-k", a.rate, "tracking rate override (Hz)");
    cmd->add_option("--emit-series", a.emit_series, "write per-window track positions as CSV");
}

int cmd_track(const TrackArgs& a) {
    const auto cfg = load_run_config(a);
    const auto result = track_sequence(a, cfg);
    const auto text = write_mot(to_mot(result.snapshots));
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_file(a.out, text);
    }
    if (!a.emit_series.empty()) write_file(a.emit_series, format_series_csv(result.snapshots));
    std::cerr << "mode " << cfg.mode << ", " << result.schedule.size() << " windows, " << result.snapshots.size()
              << " track rows\n";
    return kOk;
}

int cmd_eval(const std::string& gt_path, const std::string& pred_path, const std::string& csv_path) {
    const auto gt = parse_mot(read_file(gt_path));
    const auto pred = parse_mot(read_file(pred_path));
    const auto report = compute_hota(gt, pred);
    std::cout << format_report_table(report);
    if (!csv_path.empty()) write_file(csv_path, format_report_csv(report));
    return kOk;
}

struct DistanceArgs {
    TrackArgs track;
    std::string gt;
    std::string calib;
    std::string iir;
    bool preprocess{false};
    double target_rate{1000.0};
    double sync_offset{0.0};
    double tolerance{0.0};
    int track_id{0};
};

int cmd_distance(const DistanceArgs& a) {
    const auto cfg = load_run_config(a.track);
    const auto calib = parse_calibration(read_file(a.calib));
    const auto result = track_sequence(a.track, cfg);
    const auto pred = to_distance_series(result.snapshots, calib,
                                         a.track_id > 0 ? std::optional<int>(a.track_id) : std::nullopt);
    TimeSeries gt = parse_series(read_file(a.gt));
    if (a.preprocess || !a.iir.empty()) {
        PreprocessOptions opt;
        opt.target_rate_hz = a.target_rate;
        opt.sync_offset_s = a.sync_offset;
        if (!a.iir.empty()) opt.sos = parse_sos(read_file(a.iir));
        gt = preprocess_groundtruth(gt, opt);
    } else if (a.sync_offset != 0.0) {
        for (auto& s : gt.samples) s.t += a.sync_offset;
    }
    const double tol = a.tolerance > 0.0 ? a.tolerance : 0.5 / cfg.window.tracking_rate_hz;
    const auto err = distance_error_metrics(pred, gt, tol);

    auto show = [](std::optional<double> v, double scale, const char* unit) {
        char buf[64];
        if (!v) return std::string("n/a");
        std::snprintf(buf, sizeof buf, "%.4f %s", *v * scale, unit);
        return std::string(buf);
    };
    std::cout << "mode                  " << cfg.mode << "\n"
              << "tracking rate         " << cfg.window.tracking_rate_hz << " Hz\n"
              << "sync offset           " << a.sync_offset << " s\n"
              << "match tolerance       " << tol << " s\n"
              << "median abs error      " << show(err.median_abs_error_m, 100.0, "cm") << "\n"
              << "median rel error      " << show(err.median_rel_error, 100.0, "%") << "\n"
              << "RMSE                  " << show(err.rmse_m, 100.0, "cm") << "\n"
              << "success rate          " << show(err.success_rate, 100.0, "%") << " (" << err.detected << "/"
              << err.total << ")\n";
    if (!a.track.emit_series.empty()) write_file(a.track.emit_series, write_series(pred));
    return kOk;
}

struct SynthArgs {
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
    double gt_rate{0.0};
    double miss_probability{-1.0};
};

int cmd_synth(const SynthArgs& a) {
    synth::Scenario sc = a.scenario.empty() ? synth::single_vehicle() : synth::parse_scenario(read_file(a.scenario));
    if (a.seed) sc.seed = *a.seed;
    if (a.gt_rate > 0.0) sc.gt_rate_hz = a.gt_rate;
    if (a.miss_probability >= 0.0) sc.detector.miss_probability = a.miss_probability;
    const auto out = synth::generate(sc);
    const auto manifest = synth::write(out, sc, a.out);
    std::cerr << out.events.size() << " events, " << out.frames.size() << " frames, " << out.detections.size()
              << " detections -> " << manifest.string() << "\n";
    return kOk;
}

int cmd_bench(const BenchConfig& cfg) {
    std::cout << format_bench_table(run_bench(cfg));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-assisted multi-object detection and tracking"};
    app.require_subcommand(1);

    TrackArgs track;
    auto* track_cmd = app.add_subcommand("track", "run the tracker and write MOTChallenge output");
    add_track_options(track_cmd, track);
    track_cmd->add_option("--out,-o", track.out, "output MOT file (stdout when omitted)");

    std::string gt_path, pred_path, csv_path;
    auto* eval_cmd = app.add_subcommand("eval", "HOTA evaluation of MOTChallenge files");
    eval_cmd->add_option("--gt", gt_path, "ground truth MOT file")->required();
    eval_cmd->add_option("--pred", pred_path, "prediction MOT file")->required();
    eval_cmd->add_option("--csv", csv_path, "write the report as CSV");

    DistanceArgs dist;
    auto* dist_cmd = app.add_subcommand("distance", "track, convert to metric distance, compare with ground truth");
    add_track_options(dist_cmd, dist.track);
    dist_cmd->add_option("--gt-distance", dist.gt, "ground-truth CSV t_s,distance_m")->required();
    dist_cmd->add_option("--calib", dist.calib, "calibration JSON")->required();
    dist_cmd->add_option("--iir", dist.iir, "second-order sections JSON for ground-truth filtering");
    dist_cmd->add_flag("--preprocess", dist.preprocess, "gap-fill and resample the ground truth");
    dist_cmd->add_option("--target-rate", dist.target_rate, "ground-truth resampling rate (Hz)");
    dist_cmd->add_option("--sync-offset", dist.sync_offset, "seconds added to ground-truth timestamps");
    dist_cmd->add_option("--tolerance", dist.tolerance, "match tolerance in seconds (default half a window)");
    dist_cmd->add_option("--track-id", dist.track_id, "only use this track id");

    SynthArgs syn;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic sequence");
    synth_cmd->add_option("--scenario", syn.scenario, "scenario JSON (default: one vehicle)");
    synth_cmd->add_option("--out,-o", syn.out, "output directory")->required();
    synth_cmd->add_option("--seed", syn.seed, "RNG seed override");
    synth_cmd->add_option("--gt-rate", syn.gt_rate, "ground-truth box rate (Hz), default frame rate");
    synth_cmd->add_option("--miss-prob", syn.miss_probability, "detector miss probability override");

    BenchConfig bench;
    auto* bench_cmd = app.add_subcommand("bench", "latency of mask generation, detection and refinement");
    bench_cmd->add_option("--width", bench.mask_width, "object width (px)");
    bench_cmd->add_option("--height", bench.mask_height, "object height (px)");
    bench_cmd->add_option("--margin", bench.margin_px, "search margin (px)");
    bench_cmd->add_option("--reps", bench.repetitions, "timed repetitions");
    bench_cmd->add_option("--warmup", bench.warmup, "untimed warm-up repetitions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*track_cmd) return cmd_track(track);
        if (*eval_cmd) return cmd_eval(gt_path, pred_path, csv_path);
        if (*dist_cmd) return cmd_distance(dist);
        if (*synth_cmd) return cmd_synth(syn);
        if (*bench_cmd) return cmd_bench(bench);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const Error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    }
    return kUsage;
}
