#include <evtrack/event_detector.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace evtrack {

void DetectorConfig::validate() const {
    if (margin_px < 0) throw ConfigError("margin_px must be non-negative");
    if (!(score_threshold > 0.0)) throw ConfigError("score_threshold must be positive");
    if (!(recovery_multiplier >= 1.0)) throw ConfigError("recovery_multiplier must be >= 1");
}

CostMatrix::Peak CostMatrix::argmax() const {
    Peak best{0, 0, -std::numeric_limits<double>::infinity()};
    for (int v = 0; v < rows; ++v) {
        for (int u = 0; u < cols; ++u) {
            const double s = score(u, v);
            if (s > best.score) best = {u, v, s};
        }
    }
    return best;
}

namespace {

PixelRect clamp_to_sensor(long left, long top, long right, long bottom, SensorSize sensor) {
    left = std::clamp<long>(left, 0, sensor.width);
    top = std::clamp<long>(top, 0, sensor.height);
    right = std::clamp<long>(right, 0, sensor.width);
    bottom = std::clamp<long>(bottom, 0, sensor.height);
    return {static_cast<int>(left), static_cast<int>(top), static_cast<int>(std::max(0L, right - left)),
            static_cast<int>(std::max(0L, bottom - top))};
}

BBox clip_bbox(const BBox& b, SensorSize sensor) {
    const double l = std::clamp(b.left, 0.0, double(sensor.width));
    const double t = std::clamp(b.top, 0.0, double(sensor.height));
    const double r = std::clamp(b.right(), 0.0, double(sensor.width));
    const double btm = std::clamp(b.bottom(), 0.0, double(sensor.height));
    return {l, t, std::max(0.0, r - l), std::max(0.0, btm - t)};
}

std::optional<Detection> search(const EventMask& mask, const WindowFrame& window, const BBox& last_bbox,
                                SensorSize sensor, const DetectorConfig& config, double threshold,
                                DetectionSource source) {
    if (window.events.empty()) return std::nullopt;
    const PixelRect region = search_region(mask, last_bbox, config.margin_px, sensor);
    if (region.width < mask.width() || region.height < mask.height()) return std::nullopt;

    const auto field = build_weighted_field(window, region, mask.kind() == MaskKind::event_based);
    const auto cost = correlate(mask, field);
    const auto peak = cost.argmax();
    if (!(peak.score >= threshold)) return std::nullopt;

    const double dx = region.left + peak.u - mask.bbox().left;
    const double dy = region.top + peak.v - mask.bbox().top;
    const BBox& ob = mask.object_box();
    BBox box = clip_bbox({ob.left + dx, ob.top + dy, ob.width, ob.height}, sensor);
    if (box.width <= 0.0 || box.height <= 0.0) return std::nullopt;

    Detection d;
    d.bbox = box;
    d.score = peak.score;
    d.source = source;
    d.t = window.t_now;
    d.confidence = peak.score;
    return d;
}

}  // namespace

PixelRect search_region(const EventMask& mask, const BBox& last_bbox, int margin_px, SensorSize sensor) {
    const BBox& ob = mask.object_box();
    const long ox = mask.bbox().left + std::lround(last_bbox.center_x() - ob.center_x());
    const long oy = mask.bbox().top + std::lround(last_bbox.center_y() - ob.center_y());
    long left = std::min<long>(ox, static_cast<long>(std::floor(last_bbox.left)));
    long top = std::min<long>(oy, static_cast<long>(std::floor(last_bbox.top)));
    long right = std::max<long>(ox + mask.width(), static_cast<long>(std::ceil(last_bbox.right())));
    long bottom = std::max<long>(oy + mask.height(), static_cast<long>(std::ceil(last_bbox.bottom())));
    return clamp_to_sensor(left - margin_px, top - margin_px, right + margin_px, bottom + margin_px, sensor);
}

WeightedField build_weighted_field(const WindowFrame& window, const PixelRect& region, bool signed_field) {
    WeightedField field{region, std::vector<double>(static_cast<std::size_t>(std::max(0L, region.area())), 0.0)};
    std::vector<Micros> latest(field.values.size(), std::numeric_limits<Micros>::min());
    for (const auto& e : window.events) {
        if (!region.contains(e.x, e.y)) continue;
        const auto idx = static_cast<std::size_t>(e.y - region.top) * region.width + (e.x - region.left);
        if (e.t >= latest[idx]) {
            latest[idx] = e.t;
            const double w = window.weight(e.t);
            field.values[idx] = signed_field ? w * e.p : w;
        }
    }
    return field;
}

CostMatrix correlate(const EventMask& mask, const WeightedField& field) {
    const int mw = mask.width();
    const int mh = mask.height();
    const int fw = field.region.width;
    const int fh = field.region.height;
    if (mw > fw || mh > fh) throw SizeError("correlate: mask larger than field");

    struct Cell {
        int offset;  // row * fw + col in field coordinates
        double value;
    };
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(mask.nonzero_count()));
    for (int j = 0; j < mh; ++j) {
        for (int i = 0; i < mw; ++i) {
            if (const auto m = mask.at(i, j); m != 0) cells.push_back({j * fw + i, static_cast<double>(m)});
        }
    }

    CostMatrix cm;
    cm.cols = fw - mw + 1;
    cm.rows = fh - mh + 1;
    const auto n = static_cast<std::size_t>(cm.cols) * cm.rows;
    cm.scores.resize(n);
    cm.raw_sums.resize(n);
    const double norm = static_cast<double>(mask.nonzero_count());
    const double* f = field.values.data();
    for (int v = 0; v < cm.rows; ++v) {
        for (int u = 0; u < cm.cols; ++u) {
            const double* base = f + static_cast<std::size_t>(v) * fw + u;
            double sum = 0.0;
            for (const auto& c : cells) sum += c.value * base[c.offset];
            const auto k = static_cast<std::size_t>(v) * cm.cols + u;
            cm.raw_sums[k] = sum;
            cm.scores[k] = sum / norm;
        }
    }
    return cm;
}

std::optional<Detection> detect_inter_frame(const EventMask& mask, const WindowFrame& window, const BBox& last_bbox,
                                            SensorSize sensor, const DetectorConfig& config) {
    return search(mask, window, last_bbox, sensor, config, config.score_threshold, DetectionSource::event);
}

std::optional<Detection> recover_missed(const EventMask& mask, const WindowFrame& window, const BBox& last_bbox,
                                        SensorSize sensor, const DetectorConfig& config) {
    return search(mask, window, last_bbox, sensor, config, config.recovery_multiplier * config.score_threshold,
                  DetectionSource::recovered);
}

}  // namespace evtrack
