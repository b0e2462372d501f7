#pragma once

#include <evtrack/common.hpp>
#include <evtrack/detection.hpp>
#include <evtrack/masks.hpp>
#include <evtrack/windowing.hpp>

#include <optional>
#include <vector>

namespace evtrack {

struct DetectorConfig {
    int margin_px{16};
    double score_threshold{0.10};
    double recovery_multiplier{2.0};

    void validate() const;
};

// Temporally weighted event field over a sensor region, row-major.
struct WeightedField {
    PixelRect region;
    std::vector<double> values;

    double at(int col, int row) const { return values[static_cast<std::size_t>(row) * region.width + col]; }
};

// Scores for every top-left placement (u, v) of a mask inside a field.
struct CostMatrix {
    int cols{0};  // region_w - mask_w + 1
    int rows{0};  // region_h - mask_h + 1
    std::vector<double> scores;    // raw / nonzero mask cells
    std::vector<double> raw_sums;  // plain correlation sums

    double score(int u, int v) const { return scores[static_cast<std::size_t>(v) * cols + u]; }

    struct Peak {
        int u{0};
        int v{0};
        double score{0.0};
    };
    // First maximum in row-major order (smallest v, then smallest u).
    Peak argmax() const;
};

// Search area: the mask footprint re-centred on `last_bbox`, united with `last_bbox`,
// grown by margin_px per side and clamped to the sensor.
PixelRect search_region(const EventMask& mask, const BBox& last_bbox, int margin_px, SensorSize sensor);

// Per pixel: weight of the most recent event, times its polarity when `signed_field`.
WeightedField build_weighted_field(const WindowFrame& window, const PixelRect& region, bool signed_field);

// Exhaustive sliding correlation. Throws SizeError when the mask does not fit.
CostMatrix correlate(const EventMask& mask, const WeightedField& field);

// Inter-frame detection at threshold score_threshold; none below it or without events.
std::optional<Detection> detect_inter_frame(const EventMask& mask, const WindowFrame& window, const BBox& last_bbox,
                                            SensorSize sensor, const DetectorConfig& config);

// Same search with the threshold raised to recovery_multiplier * score_threshold.
std::optional<Detection> recover_missed(const EventMask& mask, const WindowFrame& window, const BBox& last_bbox,
                                        SensorSize sensor, const DetectorConfig& config);

}  // namespace evtrack
