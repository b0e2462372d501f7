#include <evtrack/masks.hpp>
#include <evtrack/refine.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace evtrack {

std::string_view to_string(MaskKind kind) { return kind == MaskKind::event_based ? "event" : "edge"; }

MaskKind mask_kind_from_string(std::string_view name) {
    if (name == "event" || name == "event_based") return MaskKind::event_based;
    if (name == "edge" || name == "edge_based") return MaskKind::edge_based;
    throw ConfigError("unknown mask_kind '" + std::string(name) + "' (expected event or edge)");
}

EventMask::EventMask(MaskKind kind, PixelRect bbox, BBox object_box, std::vector<std::int8_t> values,
                     Micros created_t)
    : kind_(kind), bbox_(bbox), object_box_(object_box), values_(std::move(values)), created_t_(created_t) {
    if (bbox_.empty() || values_.size() != static_cast<std::size_t>(bbox_.area())) {
        throw ValueError("EventMask: value count does not match bbox");
    }
    const int lo = kind_ == MaskKind::event_based ? -1 : 0;
    for (auto v : values_) {
        if (v < lo || v > 1) throw ValueError("EventMask: value out of range for mask kind");
        if (v != 0) ++nonzero_;
    }
    if (nonzero_ == 0) throw EmptyMaskError("EventMask: no nonzero cells");
}

PixelRect enlarge_bbox(const BBox& bbox, double factor, SensorSize sensor) {
    if (!(bbox.width > 0.0) || !(bbox.height > 0.0)) throw ValueError("enlarge_bbox: degenerate bbox");
    if (factor < 0.0) throw ValueError("enlarge_bbox: negative factor");
    constexpr double kSnap = 1e-9;
    const double dx = factor * bbox.width;
    const double dy = factor * bbox.height;
    long left = static_cast<long>(std::floor(bbox.left - dx + kSnap));
    long top = static_cast<long>(std::floor(bbox.top - dy + kSnap));
    long right = static_cast<long>(std::ceil(bbox.right() + dx - kSnap));
    long bottom = static_cast<long>(std::ceil(bbox.bottom() + dy - kSnap));
    left = std::clamp<long>(left, 0, sensor.width);
    top = std::clamp<long>(top, 0, sensor.height);
    right = std::clamp<long>(right, 0, sensor.width);
    bottom = std::clamp<long>(bottom, 0, sensor.height);
    if (right <= left || bottom <= top) throw ValueError("enlarge_bbox: bbox lies outside the sensor");
    return {static_cast<int>(left), static_cast<int>(top), static_cast<int>(right - left),
            static_cast<int>(bottom - top)};
}

EventMask build_event_mask(std::span<const Event> events, const PixelRect& region, Micros t_now,
                           std::optional<BBox> object_box) {
    if (region.empty()) throw ValueError("build_event_mask: empty region");
    const auto n = static_cast<std::size_t>(region.area());
    std::vector<std::int8_t> values(n, 0);
    std::vector<Micros> latest(n, std::numeric_limits<Micros>::min());
    for (const auto& e : events) {
        if (!region.contains(e.x, e.y)) continue;
        const auto idx = static_cast<std::size_t>(e.y - region.top) * region.width + (e.x - region.left);
        if (e.t >= latest[idx]) {
            latest[idx] = e.t;
            values[idx] = e.p > 0 ? 1 : -1;
        }
    }
    return EventMask(MaskKind::event_based, region, object_box.value_or(region.to_bbox()), std::move(values), t_now);
}

EventMask build_edge_mask(const GrayImage& image, const PixelRect& region, Micros t_now,
                          std::optional<BBox> object_box) {
    if (region.empty() || !PixelRect{0, 0, image.width, image.height}.contains(region)) {
        throw ValueError("build_edge_mask: region must lie inside the image");
    }
    const int w = region.width;
    const int h = region.height;
    auto px = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return static_cast<int>(image.at(region.left + x, region.top + y));
    };
    std::vector<int> mag(static_cast<std::size_t>(w) * h);
    int max_mag = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                           (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
            const int gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                           (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
            const int m = std::abs(gx) + std::abs(gy);
            mag[static_cast<std::size_t>(y) * w + x] = m;
            max_mag = std::max(max_mag, m);
        }
    }
    if (max_mag == 0) throw EmptyMaskError("build_edge_mask: crop has no gradient");

    GrayImage scaled(w, h);
    for (std::size_t i = 0; i < mag.size(); ++i) {
        scaled.pixels[i] = static_cast<std::uint8_t>(mag[i] * 255 / max_mag);
    }
    auto otsu = otsu_threshold(scaled);
    if (!otsu) throw EmptyMaskError("build_edge_mask: uniform gradient magnitude");
    std::vector<std::int8_t> values(otsu->foreground.pixels.begin(), otsu->foreground.pixels.end());
    return EventMask(MaskKind::edge_based, region, object_box.value_or(region.to_bbox()), std::move(values), t_now);
}

}  // namespace evtrack
