#include <evtrack/pipeline.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace evtrack {

const std::array<std::string_view, 7>& mode_names() {
    static const std::array<std::string_view, 7> names{"baseline", "A1", "A2", "A3", "B1", "B2", "B3"};
    return names;
}

AblationSwitches expand_mode(std::string_view mode) {
    if (mode == "baseline") return {};
    if (mode.size() == 2 && (mode[0] == 'A' || mode[0] == 'B') && mode[1] >= '1' && mode[1] <= '3') {
        AblationSwitches s;
        s.mask_kind = mode[0] == 'A' ? MaskKind::event_based : MaskKind::edge_based;
        s.inter_frame_enabled = true;
        s.refine_enabled = mode[1] != '2';
        s.recovery_enabled = mode[1] != '1';
        return s;
    }
    throw ConfigError("unknown mode '" + std::string(mode) + "' (expected baseline, A1-A3 or B1-B3)");
}

std::optional<std::string> mode_for(const AblationSwitches& switches) {
    for (auto name : mode_names()) {
        if (expand_mode(name) == switches) return std::string(name);
    }
    return std::nullopt;
}

void RunConfig::apply_mode(std::string_view name) {
    const auto s = expand_mode(name);
    tracker.refine_enabled = s.refine_enabled;
    tracker.recovery_enabled = s.recovery_enabled;
    tracker.inter_frame_enabled = s.inter_frame_enabled;
    tracker.mask_kind = s.mask_kind;
    mode = std::string(name);
}

RunConfig parse_run_config(std::string_view json_text) {
    RunConfig c;
    c.apply_mode(c.mode);
    try {
        const auto j = nlohmann::json::parse(json_text);
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        c.window.tracking_rate_hz = j.value("tracking_rate_hz", c.window.tracking_rate_hz);
        c.window.interval_ms = j.value("interval_ms", c.window.interval_ms);
        c.window.min_weight = j.value("min_weight", c.window.min_weight);
        auto& t = c.tracker;
        if (j.contains("mask_kind")) t.mask_kind = mask_kind_from_string(j["mask_kind"].get<std::string>());
        t.refine.bbox_enlargement = j.value("bbox_enlargement", t.refine.bbox_enlargement);
        t.detector.margin_px = j.value("margin_px", t.detector.margin_px);
        t.detector.score_threshold = j.value("score_threshold", t.detector.score_threshold);
        t.detector.recovery_multiplier = j.value("recovery_multiplier", t.detector.recovery_multiplier);
        t.refine.min_weight_sum = j.value("min_weight_sum", t.refine.min_weight_sum);
        t.refine.min_component_area = j.value("min_component_area", t.refine.min_component_area);
        t.refine_enabled = j.value("refine_enabled", t.refine_enabled);
        t.recovery_enabled = j.value("recovery_enabled", t.recovery_enabled);
        t.inter_frame_enabled = j.value("inter_frame_enabled", t.inter_frame_enabled);
        t.max_distance_px = j.value("max_distance_px", t.max_distance_px);
        if (j.contains("max_disappeared") && !j["max_disappeared"].is_null()) {
            c.max_disappeared = j["max_disappeared"].get<int>();
        }
        c.detection_filter.min_confidence = j.value("min_confidence", c.detection_filter.min_confidence);
        if (j.contains("classes")) {
            c.detection_filter.accepted_classes.clear();
            for (const auto& s : j["classes"]) c.detection_filter.accepted_classes.insert(s.get<std::string>());
        }
        if (j.contains("mode")) {
            c.apply_mode(j["mode"].get<std::string>());
        } else {
            const auto m = mode_for({t.refine_enabled, t.recovery_enabled, t.inter_frame_enabled, t.mask_kind});
            c.mode = m.value_or("custom");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.window.validate();
    c.tracker.detector.validate();
    c.tracker.refine.validate();
    return c;
}

std::string write_run_config(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["mode"] = c.mode;
    j["tracking_rate_hz"] = c.window.tracking_rate_hz;
    j["interval_ms"] = c.window.interval_ms;
    j["min_weight"] = c.window.min_weight;
    j["mask_kind"] = std::string(to_string(c.tracker.mask_kind));
    j["bbox_enlargement"] = c.tracker.refine.bbox_enlargement;
    j["margin_px"] = c.tracker.detector.margin_px;
    j["score_threshold"] = c.tracker.detector.score_threshold;
    j["recovery_multiplier"] = c.tracker.detector.recovery_multiplier;
    j["min_weight_sum"] = c.tracker.refine.min_weight_sum;
    j["min_component_area"] = c.tracker.refine.min_component_area;
    j["refine_enabled"] = c.tracker.refine_enabled;
    j["recovery_enabled"] = c.tracker.recovery_enabled;
    j["inter_frame_enabled"] = c.tracker.inter_frame_enabled;
    j["max_distance_px"] = c.tracker.max_distance_px;
    if (c.max_disappeared) j["max_disappeared"] = *c.max_disappeared;
    j["min_confidence"] = c.detection_filter.min_confidence;
    j["classes"] = c.detection_filter.accepted_classes;
    return j.dump(2) + "\n";
}

SequenceData load_sequence(const std::filesystem::path& manifest_path, const DetectionFilter& filter,
                           bool load_images) {
    SequenceData d;
    d.manifest = parse_manifest(read_file(manifest_path), manifest_path.parent_path());
    d.events = parse_events(read_file(d.manifest.events_path), d.manifest.sensor);
    DetectionFilter f = filter;
    f.sensor = d.manifest.sensor;
    d.detections = parse_detections(read_file(d.manifest.detections_path), f);
    if (load_images) {
        for (const auto& fr : d.manifest.frames) {
            if (fr.image_path.empty()) {
                d.images.emplace_back();
                continue;
            }
            d.images.push_back(load_frame(read_file(fr.image_path)));
        }
    }
    return d;
}

TrackingResult run_tracking(const SequenceData& data, const RunConfig& config) {
    TrackingResult result;
    const auto& m = data.manifest;
    const Micros begin = data.events.empty() ? 0 : data.events.front().t;
    const Micros end = data.events.empty() ? 0 : data.events.back().t;
    result.schedule = plan_windows(config.window, m, begin, end);

    TrackerConfig tc = config.tracker;
    tc.sensor = m.sensor;
    // Default: a track survives exactly one missed frame, whatever the tracking rate.
    const int per_frame = std::max(1, static_cast<int>(std::lround(config.window.tracking_rate_hz / m.frame_rate)));
    tc.max_disappeared = config.max_disappeared.value_or(2 * per_frame - 1);
    result.max_disappeared = tc.max_disappeared;
    Tracker tracker(tc);

    const Micros interval = config.window.interval_us();
    for (const auto& sw : result.schedule) {
        WindowFrame w;
        w.index = sw.index;
        w.t_now = sw.t_now;
        w.interval_us = interval;
        w.min_weight = config.window.min_weight;
        w.events = slice_window(data.events, sw.t_now, interval);
        if (sw.has_image()) {
            const std::size_t slot = sw.frames.back();
            if (slot < data.images.size() && data.images[slot].width > 0) w.image = &data.images[slot];
            auto it = data.detections.find(m.frames[slot].frame_index);
            w.frame_detections = it != data.detections.end() ? it->second : std::vector<DetectionRecord>{};
        }
        auto snaps = tracker.step(w);
        result.snapshots.insert(result.snapshots.end(), snaps.begin(), snaps.end());
    }
    return result;
}

std::vector<MotRecord> to_mot(const std::vector<Snapshot>& snapshots) {
    std::vector<MotRecord> out;
    out.reserve(snapshots.size());
    for (const auto& s : snapshots) out.push_back({s.window, s.track_id, s.bbox, s.conf});
    return out;
}

TimeSeries to_distance_series(const std::vector<Snapshot>& snapshots, const Calibration& calib,
                              std::optional<int> track_id) {
    TimeSeries ts;
    for (const auto& s : snapshots) {
        if (track_id && s.track_id != *track_id) continue;
        const double d = track_to_distance(s.bbox, calib.distortion, calib.perspective, calib.distance);
        ts.samples.push_back({static_cast<double>(s.t) * 1e-6, d});
    }
    std::stable_sort(ts.samples.begin(), ts.samples.end(), [](const Sample& a, const Sample& b) { return a.t < b.t; });
    return ts;
}

std::string format_series_csv(const std::vector<Snapshot>& snapshots) {
    std::string out = "window,t_us,id,left,top,width,height,source,conf\n";
    for (const auto& s : snapshots) {
        out += std::to_string(s.window) + ',' + std::to_string(s.t) + ',' + std::to_string(s.track_id) + ',' +
               format_number(s.bbox.left) + ',' + format_number(s.bbox.top) + ',' + format_number(s.bbox.width) +
               ',' + format_number(s.bbox.height) + ',' + std::string(to_string(s.source)) + ',' +
               format_number(s.conf) + '\n';
    }
    return out;
}

}  // namespace evtrack
