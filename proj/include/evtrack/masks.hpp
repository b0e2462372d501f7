#pragma once

#include <evtrack/common.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace evtrack {

enum class MaskKind { event_based, edge_based };

std::string_view to_string(MaskKind kind);
MaskKind mask_kind_from_string(std::string_view name);  // "event" | "edge"

// Sparse object template correlated against later event windows.
//
// `bbox` is the enlarged sensor region the template covers; `object_box` is the detection box
// the template was cut around. A correlation hit at placement P reports object_box shifted by
// P - bbox.origin.
class EventMask {
public:
    // Throws EmptyMaskError when every value is zero, ValueError when values are out of range
    // for the kind or the size does not match bbox.
    EventMask(MaskKind kind, PixelRect bbox, BBox object_box, std::vector<std::int8_t> values, Micros created_t);

    MaskKind kind() const { return kind_; }
    const PixelRect& bbox() const { return bbox_; }
    const BBox& object_box() const { return object_box_; }
    Micros created_t() const { return created_t_; }
    int width() const { return bbox_.width; }
    int height() const { return bbox_.height; }
    int nonzero_count() const { return nonzero_; }
    std::int8_t at(int col, int row) const { return values_[static_cast<std::size_t>(row) * bbox_.width + col]; }
    std::span<const std::int8_t> values() const { return values_; }

private:
    MaskKind kind_;
    PixelRect bbox_;
    BBox object_box_;
    std::vector<std::int8_t> values_;
    Micros created_t_;
    int nonzero_{0};
};

// Grows each side by factor * dimension, then clamps to the sensor. Throws ValueError for a
// degenerate box or one that lies entirely off the sensor.
PixelRect enlarge_bbox(const BBox& bbox, double factor, SensorSize sensor);

// Polarity of the most recent event at each pixel of `region`. Equal timestamps resolve to the
// later record in stream order.
EventMask build_event_mask(std::span<const Event> events, const PixelRect& region, Micros t_now,
                           std::optional<BBox> object_box = std::nullopt);

// Sobel |gx|+|gy| of the crop, Otsu-binarised into {0, +1}.
EventMask build_edge_mask(const GrayImage& image, const PixelRect& region, Micros t_now = 0,
                          std::optional<BBox> object_box = std::nullopt);

}  // namespace evtrack
