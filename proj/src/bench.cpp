#include <evtrack/bench.hpp>
#include <evtrack/event_detector.hpp>
#include <evtrack/masks.hpp>
#include <evtrack/refine.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>

namespace evtrack {

namespace {

// Latency envelopes of the reference interpreted implementation, ms per object.
constexpr double kEventMaskEnvelope = 0.66;
constexpr double kEdgeMaskEnvelope = 0.26;
constexpr double kEventDetectEnvelope = 23.7;
constexpr double kEdgeDetectEnvelope = 29.0;
constexpr double kRefineEnvelope = 0.37;

// Dense moving-object events: texture everywhere inside the box, denser bands on the
// left/right edges, sparse noise around it.
std::vector<Event> object_events(const BBox& box, Micros t_now, Micros interval, SensorSize sensor,
                                 std::mt19937_64& rng) {
    std::vector<Event> ev;
    std::uniform_int_distribution<Micros> when(t_now - interval + 1, t_now);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int l = static_cast<int>(box.left), t = static_cast<int>(box.top);
    const int r = static_cast<int>(box.right()), b = static_cast<int>(box.bottom());
    for (int y = t; y < b; ++y) {
        for (int x = l; x < r; ++x) {
            const bool edge = x - l < 3 || r - x <= 3;
            if (u(rng) < (edge ? 0.9 : 0.3)) {
                ev.push_back({when(rng), x, y, static_cast<std::int8_t>(x - l < (r - l) / 2 ? -1 : 1)});
            }
        }
    }
    std::uniform_int_distribution<int> ux(0, sensor.width - 1), uy(0, sensor.height - 1);
    for (int i = 0; i < 200; ++i) ev.push_back({when(rng), ux(rng), uy(rng), std::int8_t{1}});
    std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& c) { return a.t < c.t; });
    return ev;
}

template <typename Fn>
BenchStage time_stage(std::string name, double envelope, const BenchConfig& cfg, Fn&& fn) {
    using clock = std::chrono::steady_clock;
    for (int i = 0; i < cfg.warmup; ++i) fn();
    std::vector<double> ms;
    ms.reserve(static_cast<std::size_t>(cfg.repetitions));
    for (int i = 0; i < cfg.repetitions; ++i) {
        const auto t0 = clock::now();
        fn();
        ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());
    }
    BenchStage s;
    s.name = std::move(name);
    s.envelope_ms = envelope;
    s.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
    std::nth_element(ms.begin(), ms.begin() + static_cast<long>(ms.size() / 2), ms.end());
    s.median_ms = ms[ms.size() / 2];
    return s;
}

}  // namespace

std::vector<BenchStage> run_bench(const BenchConfig& cfg) {
    const SensorSize sensor{240, 180};
    const Micros interval = 50'000;
    std::mt19937_64 rng(cfg.seed);

    const BBox object{80.0, 60.0, double(cfg.mask_width), double(cfg.mask_height)};
    const BBox moved{83.0, 60.0, double(cfg.mask_width), double(cfg.mask_height)};
    const auto first_events = object_events(object, 100'000, interval, sensor, rng);
    const auto next_events = object_events(moved, 102'604, interval, sensor, rng);

    WindowFrame first{1, 100'000, interval, 0.05, first_events, nullptr, std::nullopt};
    WindowFrame next{2, 102'604, interval, 0.05, next_events, nullptr, std::nullopt};

    GrayImage frame(sensor.width, sensor.height, 60);
    for (int y = 60; y < 60 + cfg.mask_height; ++y) {
        for (int x = 80; x < 80 + cfg.mask_width; ++x) frame.at(x, y) = 200;
    }

    const PixelRect region = enlarge_bbox(object, cfg.bbox_enlargement, sensor);
    const EventMask event_mask = build_event_mask(first_events, region, first.t_now, object);
    const EventMask edge_mask = build_edge_mask(frame, region, first.t_now, object);
    DetectorConfig det;
    det.margin_px = cfg.margin_px;
    RefineConfig ref;
    ref.bbox_enlargement = cfg.bbox_enlargement;

    std::vector<BenchStage> out;
    volatile long sink = 0;
    out.push_back(time_stage("mask generation (event-based)", kEventMaskEnvelope, cfg, [&] {
        sink = sink + build_event_mask(first_events, region, first.t_now, object).nonzero_count();
    }));
    out.push_back(time_stage("mask generation (edge-based)", kEdgeMaskEnvelope, cfg, [&] {
        sink = sink + build_edge_mask(frame, region, first.t_now, object).nonzero_count();
    }));
    out.push_back(time_stage("event-based detection (event-based mask)", kEventDetectEnvelope, cfg, [&] {
        sink = sink + detect_inter_frame(event_mask, next, object, sensor, det).has_value();
    }));
    out.push_back(time_stage("event-based detection (edge-based mask)", kEdgeDetectEnvelope, cfg, [&] {
        sink = sink + detect_inter_frame(edge_mask, next, object, sensor, det).has_value();
    }));
    Detection d{moved, 1.0, DetectionSource::event, next.t_now, 1.0};
    out.push_back(time_stage("bounding box refinement", kRefineEnvelope, cfg, [&] {
        sink = sink + static_cast<long>(refine_bbox(d, next, sensor, ref).bbox.width);
    }));
    return out;
}

std::string format_bench_table(const std::vector<BenchStage>& stages) {
    std::string out;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-42s %10s %10s %10s %8s\n", "stage", "mean_ms", "median_ms", "envelope", "ratio");
    out += buf;
    for (const auto& s : stages) {
        std::snprintf(buf, sizeof buf, "%-42s %10.4f %10.4f %10.2f %7.1fx\n", s.name.c_str(), s.mean_ms, s.median_ms,
                      s.envelope_ms, s.mean_ms > 0 ? s.envelope_ms / s.mean_ms : 0.0);
        out += buf;
    }
    return out;
}

}  // namespace evtrack
