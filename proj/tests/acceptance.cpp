// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 when any fails.

#include <evtrack/bench.hpp>
#include <evtrack/event_detector.hpp>
#include <evtrack/geometry.hpp>
#include <evtrack/metrics.hpp>
#include <evtrack/pipeline.hpp>
#include <evtrack/refine.hpp>
#include <evtrack/synth.hpp>
#include <evtrack/windowing.hpp>

#include "oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace evtrack;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SequenceData as_sequence(const synth::Output& out, const synth::Scenario& sc) {
    SequenceData d;
    d.manifest = synth::manifest_for(out, sc);
    d.events = out.events;
    for (const auto& r : out.detections) d.detections[r.frame_index].push_back(r);
    d.images = out.images;
    return d;
}

Outcome correlation_oracle() {
    std::mt19937 rng(1001);
    const auto start = std::chrono::steady_clock::now();
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int mw = 1 + rng() % 32, mh = 1 + rng() % 32;
        const int fw = mw + rng() % (65 - mw), fh = mh + rng() % (65 - mh);
        std::vector<std::int8_t> mv(static_cast<std::size_t>(mw) * mh);
        for (auto& x : mv) x = static_cast<std::int8_t>(int(rng() % 3) - 1);
        mv[rng() % mv.size()] = 1;
        std::vector<double> fv(static_cast<std::size_t>(fw) * fh);
        std::uniform_real_distribution<double> u(-1, 1);
        for (auto& x : fv) x = rng() % 4 ? 0.0 : u(rng);
        const EventMask m(MaskKind::event_based, {0, 0, mw, mh}, {0, 0, double(mw), double(mh)}, mv, 0);
        const auto cm = correlate(m, WeightedField{{0, 0, fw, fh}, fv});
        const auto ref = oracle::correlate(mv, mw, mh, fv, fw, fh);
        const bool same = cm.cols == ref.cols && cm.rows == ref.rows && cm.raw_sums == ref.raw &&
                          cm.scores == ref.score && cm.argmax().u == ref.best_u && cm.argmax().v == ref.best_v;
        mismatches += !same;
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {mismatches == 0 && s < 5.0, fmt("200 instances, %d mismatches, %.2f s (limit 5 s)", mismatches, s)};
}

Outcome otsu_oracle() {
    std::mt19937 rng(1002);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int w = 1 + rng() % 64, h = 1 + rng() % 64;
        const int levels = trial % 4 == 0 ? 2 + rng() % 6 : 256;
        GrayImage img(w, h);
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>((rng() % levels) * (255 / (levels - 1)));
        const auto r = otsu_threshold(img);
        const auto ref = oracle::otsu(img.pixels);
        mismatches += r.has_value() != ref.has_value() || (r && r->threshold != *ref);
    }
    return {mismatches == 0, fmt("1000 images, %d mismatches", mismatches)};
}

Outcome schedule() {
    SequenceManifest m;
    m.frame_rate = 24.0;
    for (int f = 0; f < 240; ++f) m.frames.push_back({f, std::llround(f * 1e6 / 24.0), {}});
    WindowConfig wc;
    wc.tracking_rate_hz = 384.0;
    const auto w384 = plan_windows(wc, m, 0, m.frames.back().t);
    bool one_per_16 = w384.size() == 239 * 16 + 1;
    for (std::size_t i = 0; i < w384.size(); ++i) one_per_16 &= w384[i].has_image() == (i % 16 == 0);

    wc.tracking_rate_hz = 200.0;
    wc.interval_ms = 50.0;
    const auto w200 = plan_windows(wc, m, 0, m.frames.back().t);
    bool steps = wc.interval_us() == 50'000 && w200.size() > 1;
    for (std::size_t i = 1; i < w200.size(); ++i) steps &= w200[i].t_now - w200[i - 1].t_now == 5000;
    return {one_per_16 && steps, fmt("384 Hz: %zu windows, image every 16th: %s; 200 Hz: %zu windows, 5000 us steps: %s",
                                     w384.size(), one_per_16 ? "yes" : "no", w200.size(), steps ? "yes" : "no")};
}

Outcome ablation_recovery() {
    int wins = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto sc = synth::single_vehicle(120.0, 100 + seed);
        // 30% of frames missed; frame 0 stays so both modes start a track at the same instant
        std::vector<int> frames(48);
        for (int i = 0; i < 48; ++i) frames[i] = i + 1;
        std::mt19937 rng(static_cast<unsigned>(seed));
        std::shuffle(frames.begin(), frames.end(), rng);
        sc.detector.scripted_misses.assign(frames.begin(), frames.begin() + 15);
        std::sort(sc.detector.scripted_misses.begin(), sc.detector.scripted_misses.end());
        const auto out = synth::generate(sc);
        const auto data = as_sequence(out, sc);

        auto run = [&](const char* mode) {
            RunConfig cfg;
            cfg.apply_mode(mode);
            cfg.window.tracking_rate_hz = 24.0;
            const auto res = run_tracking(data, cfg);
            const double hota = compute_hota(out.gt_tracks, to_mot(res.snapshots)).hota;
            const double success =
                distance_error_metrics(to_distance_series(res.snapshots, out.calibration), out.gt_distance, 0.5 / 24.0)
                    .success_rate;
            return std::pair{hota, success};
        };
        const auto [hb, sb] = run("baseline");
        const auto [ha, sa] = run("A2");
        wins += ha > hb && sa > sb;
        detail += fmt(" [%llu] HOTA %.3f->%.3f succ %.3f->%.3f", static_cast<unsigned long long>(seed), hb, ha, sb, sa);
    }
    return {wins == 10, fmt("%d/10 seeds improve;", wins) + detail};
}

Outcome ablation_refinement() {
    const SensorSize sensor{240, 180};
    RefineConfig rc;
    WindowConfig wc;
    int eligible = 0, better = 0, escapes = 0;
    double sum_unref = 0, sum_ref = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto sc = synth::single_vehicle(120.0, 200 + seed);
        sc.detector.inflate = 0.2;
        const auto out = synth::generate(sc);
        const auto data = as_sequence(out, sc);
        const auto sched = plan_windows(wc, data.manifest, 0, out.events.back().t);
        for (const auto& sw : sched) {
            const auto gt = synth::object_box(sc, 0, sw.t_now);
            if (!gt) continue;
            WindowFrame w;
            w.index = sw.index;
            w.t_now = sw.t_now;
            w.interval_us = wc.interval_us();
            w.min_weight = wc.min_weight;
            w.events = slice_window(out.events, sw.t_now, w.interval_us);
            int object_events = 0;
            for (const auto& e : w.events) {
                object_events += e.x >= gt->left && e.x < gt->left + gt->width && e.y >= gt->top &&
                                 e.y < gt->top + gt->height;
            }
            if (object_events < 20) continue;

            // the detector's view of the object: the true box grown 20% per side, clipped to the sensor
            const double l = std::max(0.0, gt->left - 0.2 * gt->width), t = std::max(0.0, gt->top - 0.2 * gt->height);
            const double r = std::min<double>(sensor.width, gt->left + 1.2 * gt->width);
            const double b = std::min<double>(sensor.height, gt->top + 1.2 * gt->height);
            const BBox inflated{l, t, r - l, b - t};
            const Detection d{inflated, 0.9, DetectionSource::frame, sw.t_now, 0.9};
            const BBox refined = refine_bbox(d, w, sensor, rc).bbox;
            const PixelRect region = enlarge_bbox(inflated, rc.bbox_enlargement, sensor);
            escapes += refined.left < region.left || refined.top < region.top ||
                       refined.left + refined.width > region.right() || refined.top + refined.height > region.bottom();
            const double before = iou(inflated, *gt), after = iou(refined, *gt);
            ++eligible;
            better += after > before;
            sum_unref += before;
            sum_ref += after;
        }
    }
    const double frac = eligible ? double(better) / eligible : 0.0;
    return {eligible > 0 && frac >= 0.8 && escapes == 0,
            fmt("%d windows, refined better in %.1f%% (need 80%%), mean IoU %.3f -> %.3f, %d outside enlarged region",
                eligible, 100 * frac, sum_unref / std::max(eligible, 1), sum_ref / std::max(eligible, 1), escapes)};
}

Outcome hota_micro() {
    std::vector<MotRecord> gt;
    for (int f = 1; f <= 5; ++f) gt.push_back({f, 1, {double(f), 5, 20, 10}, 1});
    const auto perfect = compute_hota(gt, gt);

    const std::vector<MotRecord> g2{{1, 1, {0, 0, 10, 10}, 1}, {2, 1, {1, 0, 10, 10}, 1}};
    const std::vector<MotRecord> p2{{1, 5, {0, 0, 10, 10}, 1}, {2, 6, {1, 0, 10, 10}, 1}};
    const auto sw = compute_hota(g2, p2);
    double worst = 0;
    for (const auto& s : sw.per_alpha) worst = std::max(worst, std::abs(s.hota - std::sqrt(0.5)));

    const auto empty = compute_hota(gt, {});
    const bool ok = perfect.hota == 1.0 && worst <= 1e-9 && empty.hota == 0.0;
    return {ok, fmt("perfect %.12f, id switch max |HOTA_a - sqrt(.5)| %.1e, empty %.1f", perfect.hota, worst, empty.hota)};
}

Outcome geometry() {
    std::mt19937 rng(1007);
    std::uniform_real_distribution<double> u(-1, 1), px(0, 240), py(0, 180);
    int tested = 0;
    double worst_rt = 0;
    while (tested < 1000) {
        PerspectiveMatrix m;
        for (auto& v : m.m) v = u(rng);
        m.m[6] *= 1e-3;
        m.m[7] *= 1e-3;
        m.m[8] = 1.0 + std::abs(m.m[8]);
        Eigen::Matrix3d e;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) e(r, c) = m(r, c);
        }
        if (std::abs(e.determinant()) < 1e-2) continue;
        ++tested;
        const auto inv = m.inverse();
        const Point2 v{px(rng), py(rng)};
        const Point2 back = perspective_transform(perspective_transform(v, m), inv);
        worst_rt = std::max(worst_rt, std::hypot(back.x - v.x, back.y - v.y));
    }

    const DistanceCalib c;
    const double exit_m = pixel_to_distance(c.frame_width_px, c);
    const double entry_m = pixel_to_distance(0.0, c);

    double worst_ud = 0;
    std::uniform_real_distribution<double> k(-0.05, 0.05), p(-0.005, 0.005);
    for (int i = 0; i < 1000; ++i) {
        DistortionModel dm;
        dm.fx = 250;
        dm.fy = 245;
        dm.cx = 120;
        dm.cy = 90;
        dm.k1 = k(rng);
        dm.k2 = k(rng) / 2;
        dm.p1 = p(rng);
        dm.p2 = p(rng);
        const Point2 obs{px(rng), py(rng)};
        const Point2 back = distort_point(undistort_point(obs, dm), dm);
        worst_ud = std::max(worst_ud, std::hypot(back.x - obs.x, back.y - obs.y));
    }
    const bool ok = worst_rt <= 1e-9 && exit_m == 28.0 && std::abs(entry_m - 40.0) < 0.05 && worst_ud < 1e-6;
    return {ok, fmt("M^-1 round trip %.1e px (1e-9); exit %.3f m, entry %.3f m; undistort round trip %.1e px (1e-6)",
                    worst_rt, exit_m, entry_m, worst_ud)};
}

Outcome end_to_end_distance() {
    const auto sc = synth::single_vehicle(120.0, 300);
    const auto out = synth::generate(sc);
    const auto data = as_sequence(out, sc);
    bool ok = true;
    std::string detail;
    for (double k : {24.0, 384.0, 500.0}) {
        for (const char* mode : {"baseline", "A2"}) {
            RunConfig cfg;
            cfg.apply_mode(mode);
            cfg.window.tracking_rate_hz = k;
            const auto pred = to_distance_series(run_tracking(data, cfg).snapshots, out.calibration);
            const auto err = distance_error_metrics(pred, out.gt_distance, 0.5 / k);
            const double med = err.median_abs_error_m.value_or(1e300);
            ok &= med < 1e-6 && err.success_rate == 1.0;
            detail += fmt(" [%g Hz %s] median %.1e m, success %.1f%%", k, mode, med, 100 * err.success_rate);
        }
    }
    return {ok, detail.substr(1)};
}

Outcome latency() {
    BenchConfig bc;
    bc.repetitions = 300;
    bool ok = true;
    std::string detail;
    for (const auto& s : run_bench(bc)) {
        ok &= s.median_ms <= s.envelope_ms;
        detail += fmt(" [%s] %.4f ms <= %.2f", s.name.c_str(), s.median_ms, s.envelope_ms);
    }
    return {ok, "80x45 mask, margin 16:" + detail};
}

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "evtrack_acceptance_determinism";
    fs::remove_all(dir);
    const std::string cli = EVTRACK_CLI;
    bool ok = shell(cli + " synth -o " + (dir / "seq").string() + " --seed 11 > /dev/null") == 0;
    std::string detail;
    for (const char* args : {"", " --mode A3 -k 500", " --mode B2 -k 200"}) {
        const std::string base = cli + " track -m " + (dir / "seq" / "manifest.json").string() + args + " -o ";
        ok &= shell(base + (dir / "a.txt").string() + " > /dev/null") == 0;
        ok &= shell(base + (dir / "b.txt").string() + " > /dev/null") == 0;
        const auto a = read_file(dir / "a.txt"), b = read_file(dir / "b.txt");
        ok &= !a.empty() && a == b;
        detail += fmt(" [track%s] %zu bytes %s", args, a.size(), a == b ? "identical" : "DIFFER");
    }
    fs::remove_all(dir);
    return {ok, detail.substr(1)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"correlation oracle", correlation_oracle},
        {"otsu oracle", otsu_oracle},
        {"window schedule", schedule},
        {"ablation: recovery", ablation_recovery},
        {"ablation: refinement", ablation_refinement},
        {"hota micro-oracle", hota_micro},
        {"geometry", geometry},
        {"end-to-end distance", end_to_end_distance},
        {"latency envelopes", latency},
        {"track determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
