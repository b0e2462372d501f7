#pragma once

#include <evtrack/common.hpp>

#include <optional>
#include <string_view>

namespace evtrack {

enum class DetectionSource { frame, event, recovered };

inline std::string_view to_string(DetectionSource s) {
    switch (s) {
        case DetectionSource::frame: return "frame";
        case DetectionSource::event: return "event";
        case DetectionSource::recovered: return "recovered";
    }
    return "?";
}

struct Detection {
    BBox bbox;
    std::optional<double> score;  // correlation score; absent for frame detections
    DetectionSource source{DetectionSource::frame};
    Micros t{0};
    double confidence{1.0};  // detector confidence for frame detections
};

}  // namespace evtrack
