#include <evtrack/windowing.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace evtrack {

Micros WindowConfig::interval_us() const { return std::llround(interval_ms * 1000.0); }

void WindowConfig::validate() const {
    if (!(tracking_rate_hz > 0.0)) throw ConfigError("tracking_rate_hz must be positive");
    if (!(interval_ms > 0.0) || interval_us() <= 0) throw ConfigError("interval_ms must be positive");
    if (!(min_weight > 0.0 && min_weight < 1.0)) throw ConfigError("min_weight must lie in (0, 1)");
}

Micros schedule_time(Micros t0, double tracking_rate_hz, long i) {
    return t0 + std::llround(static_cast<double>(i) * 1e6 / tracking_rate_hz);
}

std::vector<ScheduledWindow> plan_windows(const WindowConfig& config, const SequenceManifest& manifest,
                                          Micros stream_begin, Micros stream_end) {
    config.validate();
    if (config.tracking_rate_hz < manifest.frame_rate) {
        std::ostringstream ss;
        ss << "tracking rate " << config.tracking_rate_hz << " Hz is below the frame rate " << manifest.frame_rate
           << " Hz";
        throw ConfigError(ss.str());
    }
    const auto& frames = manifest.frames;
    const Micros t0 = frames.empty() ? stream_begin : frames.front().t;
    Micros t_end = stream_end;
    if (!frames.empty()) t_end = std::max(t_end, frames.back().t);

    std::vector<ScheduledWindow> out;
    std::size_t next_frame = 0;
    for (long i = 0;; ++i) {
        ScheduledWindow w;
        w.index = static_cast<int>(i + 1);
        w.t_now = schedule_time(t0, config.tracking_rate_hz, i);
        while (next_frame < frames.size() && frames[next_frame].t <= w.t_now) {
            w.frames.push_back(next_frame++);
        }
        out.push_back(std::move(w));
        if (out.back().t_now >= t_end && next_frame == frames.size()) break;
    }
    return out;
}

std::span<const Event> slice_window(std::span<const Event> events, Micros t_now, Micros interval_us) {
    const Micros lo = t_now - interval_us;
    auto first = std::upper_bound(events.begin(), events.end(), lo,
                                  [](Micros t, const Event& e) { return t < e.t; });
    auto last = std::upper_bound(first, events.end(), t_now, [](Micros t, const Event& e) { return t < e.t; });
    return events.subspan(static_cast<std::size_t>(first - events.begin()),
                          static_cast<std::size_t>(last - first));
}

double temporal_weight(Micros event_t, Micros t_now, Micros interval_us, double min_weight) {
    if (event_t > t_now || event_t <= t_now - interval_us) {
        throw ContractError("temporal_weight: event outside the window");
    }
    const double age = static_cast<double>(t_now - event_t) / static_cast<double>(interval_us);
    return std::max(min_weight, 1.0 - age);
}

}  // namespace evtrack
