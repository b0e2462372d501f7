#pragma once

#include <evtrack/common.hpp>
#include <evtrack/detection.hpp>
#include <evtrack/event_detector.hpp>
#include <evtrack/masks.hpp>
#include <evtrack/refine.hpp>
#include <evtrack/windowing.hpp>

#include <optional>
#include <span>
#include <vector>

namespace evtrack {

struct TrackerConfig {
    double max_distance_px{50.0};
    int max_disappeared{16};
    bool recovery_enabled{true};
    bool inter_frame_enabled{true};
    bool refine_enabled{true};
    MaskKind mask_kind{MaskKind::event_based};
    DetectorConfig detector;
    RefineConfig refine;
    SensorSize sensor;

    void validate() const;
};

struct HistoryEntry {
    int window{0};
    BBox bbox;
    DetectionSource source{DetectionSource::frame};
};

struct Track {
    int id{0};
    BBox bbox;
    Micros last_seen_t{0};
    int disappeared_count{0};
    std::optional<EventMask> mask;
    // Detected (by frame or recovery) at the most recent image-bearing window; only such tracks
    // run inter-frame detection.
    bool event_eligible{false};
    std::vector<HistoryEntry> history;
};

// One tracked object position emitted at one window.
struct Snapshot {
    int window{0};
    Micros t{0};  // exposure time for frame detections, t_now otherwise
    int track_id{0};
    BBox bbox;
    double conf{1.0};
    DetectionSource source{DetectionSource::frame};
};

struct Association {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (track, detection)
    std::vector<double> costs;                               // centroid distance per pair
    std::vector<std::size_t> unmatched_tracks;
    std::vector<std::size_t> unmatched_detections;
};

// Minimum total centroid distance matching; pairs farther apart than max_distance stay unmatched.
Association associate(std::span<const BBox> tracks, std::span<const BBox> detections, double max_distance);

class Tracker {
public:
    explicit Tracker(TrackerConfig config);

    // Windows must arrive in strictly increasing index order (ContractError otherwise).
    std::vector<Snapshot> step(const WindowFrame& window);

    const std::vector<Track>& tracks() const { return tracks_; }
    const TrackerConfig& config() const { return config_; }

private:
    std::vector<Snapshot> step_image(const WindowFrame& window);
    std::vector<Snapshot> step_events(const WindowFrame& window);
    Detection maybe_refine(const Detection& d, const WindowFrame& window) const;
    std::optional<EventMask> make_mask(const BBox& box, const WindowFrame& window) const;
    Snapshot record(Track& track, const Detection& d, const WindowFrame& window);

    TrackerConfig config_;
    std::vector<Track> tracks_;
    int next_id_{1};
    int last_window_{0};
};

}  // namespace evtrack
