#pragma once

#include <evtrack/common.hpp>
#include <evtrack/detection.hpp>
#include <evtrack/windowing.hpp>

#include <optional>
#include <vector>

namespace evtrack {

struct RefineConfig {
    double min_weight_sum{3.0};
    int min_component_area{9};
    double bbox_enlargement{0.10};

    void validate() const;
};

struct BinaryImage {
    int width{0};
    int height{0};
    std::vector<std::uint8_t> pixels;  // 0 or 1

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

struct OtsuResult {
    int threshold{0};
    BinaryImage foreground;  // intensity > threshold
};

// Weighted, polarity-free event image of `region`, max-normalised to 0..255.
// Empty when the region holds no events.
std::optional<GrayImage> events_to_gray(const WindowFrame& window, const PixelRect& region);

// 3x3 mean with replicate-edge padding, rounded half up.
GrayImage box_blur3(const GrayImage& image);

// Threshold maximising between-class variance over the 256-bin histogram; the smallest such
// threshold wins ties. Empty for zero-variance input.
std::optional<OtsuResult> otsu_threshold(const GrayImage& image);

// Tight box (in mask coordinates) of the largest 8-connected foreground component.
// Ties go to the component whose first pixel comes first in row-major order.
// Empty when no component reaches min_component_area.
std::optional<PixelRect> best_fit_bbox(const BinaryImage& mask, int min_component_area = 1);

// Sum over all window events inside `region` of their temporal weights.
double weighted_event_sum(const WindowFrame& window, const PixelRect& region);

// Blur / Otsu / largest-component refinement of a detection box. Never fails: every abort path
// returns the input unchanged. The result always lies inside the enlarged input box.
Detection refine_bbox(const Detection& detection, const WindowFrame& window, SensorSize sensor,
                      const RefineConfig& config);

}  // namespace evtrack
