#include <evtrack/assignment.hpp>
#include <evtrack/tracker.hpp>

#include <algorithm>
#include <cmath>

namespace evtrack {

void TrackerConfig::validate() const {
    if (!(max_distance_px > 0.0)) throw ConfigError("max_distance_px must be positive");
    if (max_disappeared <= 0) throw ConfigError("max_disappeared must be positive");
    if (sensor.width <= 0 || sensor.height <= 0) throw ConfigError("sensor size must be positive");
    detector.validate();
    refine.validate();
}

Association associate(std::span<const BBox> tracks, std::span<const BBox> detections, double max_distance) {
    Association out;
    CostTable table(tracks.size(), detections.size());
    // Gated pairs get a prohibitive cost so they never displace a feasible pairing.
    const double blocked = 1e6 * (max_distance + 1.0);
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        for (std::size_t j = 0; j < detections.size(); ++j) {
            const double d = std::hypot(tracks[i].center_x() - detections[j].center_x(),
                                        tracks[i].center_y() - detections[j].center_y());
            table.at(i, j) = d > max_distance ? blocked : d;
        }
    }
    std::vector<char> track_used(tracks.size(), 0), det_used(detections.size(), 0);
    for (auto [i, j] : solve_assignment(table)) {
        if (table.at(i, j) > max_distance) continue;
        out.pairs.emplace_back(i, j);
        out.costs.push_back(table.at(i, j));
        track_used[i] = det_used[j] = 1;
    }
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        if (!track_used[i]) out.unmatched_tracks.push_back(i);
    }
    for (std::size_t j = 0; j < detections.size(); ++j) {
        if (!det_used[j]) out.unmatched_detections.push_back(j);
    }
    return out;
}

Tracker::Tracker(TrackerConfig config) : config_(std::move(config)) { config_.validate(); }

Detection Tracker::maybe_refine(const Detection& d, const WindowFrame& window) const {
    if (!config_.refine_enabled) return d;
    return refine_bbox(d, window, config_.sensor, config_.refine);
}

std::optional<EventMask> Tracker::make_mask(const BBox& box, const WindowFrame& window) const {
    if (!config_.recovery_enabled && !config_.inter_frame_enabled) return std::nullopt;
    try {
        const PixelRect region = enlarge_bbox(box, config_.refine.bbox_enlargement, config_.sensor);
        if (config_.mask_kind == MaskKind::event_based) {
            return build_event_mask(window.events, region, window.t_now, box);
        }
        if (window.image == nullptr) return std::nullopt;
        return build_edge_mask(*window.image, region, window.t_now, box);
    } catch (const ValueError&) {
        // no usable template: the track follows frame detections only
        return std::nullopt;
    }
}

Snapshot Tracker::record(Track& track, const Detection& d, const WindowFrame& window) {
    track.bbox = d.bbox;
    track.last_seen_t = window.t_now;
    track.disappeared_count = 0;
    track.history.push_back({window.index, d.bbox, d.source});
    const double conf = d.source == DetectionSource::frame ? d.confidence : d.score.value_or(0.0);
    return {window.index, d.t, track.id, d.bbox, conf, d.source};
}

std::vector<Snapshot> Tracker::step(const WindowFrame& window) {
    if (window.index <= last_window_) throw ContractError("Tracker::step: windows out of order");
    last_window_ = window.index;

    auto out = window.has_image() ? step_image(window) : step_events(window);

    std::erase_if(tracks_, [&](const Track& t) { return t.disappeared_count > config_.max_disappeared; });
    std::sort(out.begin(), out.end(), [](const Snapshot& a, const Snapshot& b) { return a.track_id < b.track_id; });
    return out;
}

std::vector<Snapshot> Tracker::step_image(const WindowFrame& window) {
    std::vector<Snapshot> out;
    const auto& records = *window.frame_detections;

    std::vector<BBox> track_boxes;
    track_boxes.reserve(tracks_.size());
    for (const auto& t : tracks_) track_boxes.push_back(t.bbox);
    std::vector<BBox> det_boxes;
    det_boxes.reserve(records.size());
    for (const auto& r : records) det_boxes.push_back(r.bbox);

    const auto assoc = associate(track_boxes, det_boxes, config_.max_distance_px);

    auto frame_detection = [&](std::size_t j) {
        Detection d;
        d.bbox = records[j].bbox;
        d.source = DetectionSource::frame;
        d.t = records[j].t;  // the box describes the scene at exposure time
        d.confidence = records[j].confidence;
        return d;
    };

    for (auto [ti, dj] : assoc.pairs) {
        Track& track = tracks_[ti];
        const Detection d = maybe_refine(frame_detection(dj), window);
        out.push_back(record(track, d, window));
        track.mask = make_mask(d.bbox, window);
        track.event_eligible = true;
    }

    for (auto ti : assoc.unmatched_tracks) {
        Track& track = tracks_[ti];
        std::optional<Detection> rec;
        if (config_.recovery_enabled && track.mask) {
            rec = recover_missed(*track.mask, window, track.bbox, config_.sensor, config_.detector);
        }
        if (rec) {
            out.push_back(record(track, maybe_refine(*rec, window), window));
            track.event_eligible = true;
        } else {
            ++track.disappeared_count;
            track.event_eligible = false;
        }
    }

    for (auto dj : assoc.unmatched_detections) {
        Track track;
        track.id = next_id_++;
        const Detection d = maybe_refine(frame_detection(dj), window);
        out.push_back(record(track, d, window));
        track.mask = make_mask(d.bbox, window);
        track.event_eligible = true;
        tracks_.push_back(std::move(track));
    }
    return out;
}

std::vector<Snapshot> Tracker::step_events(const WindowFrame& window) {
    std::vector<Snapshot> out;
    for (auto& track : tracks_) {
        std::optional<Detection> det;
        if (config_.inter_frame_enabled && track.event_eligible && track.mask) {
            det = detect_inter_frame(*track.mask, window, track.bbox, config_.sensor, config_.detector);
        }
        if (det) {
            out.push_back(record(track, maybe_refine(*det, window), window));
        } else {
            ++track.disappeared_count;
        }
    }
    return out;
}

}  // namespace evtrack
