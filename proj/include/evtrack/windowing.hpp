#pragma once

#include <evtrack/common.hpp>
#include <evtrack/stream_io.hpp>

#include <optional>
#include <span>
#include <vector>

namespace evtrack {

struct WindowConfig {
    double tracking_rate_hz{384.0};
    double interval_ms{50.0};
    double min_weight{0.05};

    Micros interval_us() const;
    void validate() const;
};

// t_i = t0 + round(i * 1e6 / k); i is zero-based.
Micros schedule_time(Micros t0, double tracking_rate_hz, long i);

struct ScheduledWindow {
    int index{1};  // 1-based position in the schedule
    Micros t_now{0};
    // Manifest frame slots assigned to this window (normally zero or one).
    std::vector<std::size_t> frames;

    bool has_image() const { return !frames.empty(); }
};

// Windows start at the first manifest frame (or stream_begin when there are none) and continue
// until t_now reaches stream_end. Each frame goes to the first window with t_now >= its timestamp.
// Throws ConfigError when the tracking rate is below the frame rate.
std::vector<ScheduledWindow> plan_windows(const WindowConfig& config, const SequenceManifest& manifest,
                                          Micros stream_begin, Micros stream_end);

// Events with t in (t_now - interval, t_now]. Requires sorted input.
std::span<const Event> slice_window(std::span<const Event> events, Micros t_now, Micros interval_us);

// max(min_weight, 1 - age / interval). Throws ContractError for events outside the window.
double temporal_weight(Micros event_t, Micros t_now, Micros interval_us, double min_weight);

// Everything the per-window pipeline sees at one tracking instant.
struct WindowFrame {
    int index{1};
    Micros t_now{0};
    Micros interval_us{50'000};
    double min_weight{0.05};
    std::span<const Event> events;
    const GrayImage* image{nullptr};
    std::optional<std::vector<DetectionRecord>> frame_detections;

    bool has_image() const { return frame_detections.has_value(); }
    double weight(Micros event_t) const { return temporal_weight(event_t, t_now, interval_us, min_weight); }
};

}  // namespace evtrack
