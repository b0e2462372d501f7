#pragma once

#include <evtrack/geometry.hpp>
#include <evtrack/stream_io.hpp>
#include <evtrack/tracker.hpp>
#include <evtrack/windowing.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evtrack {

// Switch combinations of the ablation grid.
struct AblationSwitches {
    bool refine_enabled{false};
    bool recovery_enabled{false};
    bool inter_frame_enabled{false};
    MaskKind mask_kind{MaskKind::event_based};

    friend bool operator==(const AblationSwitches&, const AblationSwitches&) = default;
};

// baseline: frames only. A = event-based mask, B = edge-based mask;
// 1 = refinement, 2 = recovery, 3 = both.
const std::array<std::string_view, 7>& mode_names();
AblationSwitches expand_mode(std::string_view mode);  // ConfigError on unknown names
std::optional<std::string> mode_for(const AblationSwitches& switches);

struct RunConfig {
    WindowConfig window;
    TrackerConfig tracker;
    DetectionFilter detection_filter;
    std::string mode{"A3"};
    std::optional<int> max_disappeared;  // default: 2 * round(k / frame_rate) - 1 windows

    void apply_mode(std::string_view name);
};

// Flat JSON keys: tracking_rate_hz, interval_ms, min_weight, mask_kind, bbox_enlargement,
// margin_px, score_threshold, recovery_multiplier, min_weight_sum, min_component_area,
// refine_enabled, recovery_enabled, inter_frame_enabled, max_distance_px, max_disappeared,
// min_confidence, classes, mode. A mode overrides the individual switches.
RunConfig parse_run_config(std::string_view json_text);
std::string write_run_config(const RunConfig& config);

struct SequenceData {
    SequenceManifest manifest;
    std::vector<Event> events;
    DetectionsByFrame detections;
    std::vector<GrayImage> images;  // parallel to manifest.frames; empty when not loaded
};

SequenceData load_sequence(const std::filesystem::path& manifest_path, const DetectionFilter& filter,
                           bool load_images);

struct TrackingResult {
    std::vector<ScheduledWindow> schedule;
    std::vector<Snapshot> snapshots;
    int max_disappeared{0};
};

TrackingResult run_tracking(const SequenceData& data, const RunConfig& config);

std::vector<MotRecord> to_mot(const std::vector<Snapshot>& snapshots);

// Distance series (t in seconds) from snapshots, optionally restricted to one track.
TimeSeries to_distance_series(const std::vector<Snapshot>& snapshots, const Calibration& calib,
                              std::optional<int> track_id = std::nullopt);

// window,t_us,id,left,top,width,height,source,conf
std::string format_series_csv(const std::vector<Snapshot>& snapshots);

}  // namespace evtrack
