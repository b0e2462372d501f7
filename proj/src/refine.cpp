#include <evtrack/masks.hpp>
#include <evtrack/refine.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace evtrack {

void RefineConfig::validate() const {
    if (!(min_weight_sum > 0.0)) throw ConfigError("min_weight_sum must be positive");
    if (min_component_area <= 0) throw ConfigError("min_component_area must be positive");
    if (bbox_enlargement < 0.0) throw ConfigError("bbox_enlargement must be non-negative");
}

std::optional<GrayImage> events_to_gray(const WindowFrame& window, const PixelRect& region) {
    if (region.empty()) return std::nullopt;
    const auto n = static_cast<std::size_t>(region.area());
    std::vector<double> weight(n, 0.0);
    std::vector<Micros> latest(n, std::numeric_limits<Micros>::min());
    double max_w = 0.0;
    for (const auto& e : window.events) {
        if (!region.contains(e.x, e.y)) continue;
        const auto idx = static_cast<std::size_t>(e.y - region.top) * region.width + (e.x - region.left);
        if (e.t >= latest[idx]) {
            latest[idx] = e.t;
            weight[idx] = window.weight(e.t);
        }
    }
    for (double w : weight) max_w = std::max(max_w, w);
    if (max_w <= 0.0) return std::nullopt;

    GrayImage img(region.width, region.height);
    for (std::size_t i = 0; i < n; ++i) {
        img.pixels[i] = static_cast<std::uint8_t>(std::floor(weight[i] / max_w * 255.0));
    }
    return img;
}

GrayImage box_blur3(const GrayImage& image) {
    GrayImage out(image.width, image.height);
    const int w = image.width;
    const int h = image.height;
    // separable: horizontal 3-sums with replicated columns, then vertical with replicated rows
    std::vector<int> rows(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* src = &image.pixels[static_cast<std::size_t>(y) * w];
        int* dst = &rows[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) dst[x] = src[std::max(x - 1, 0)] + src[x] + src[std::min(x + 1, w - 1)];
    }
    for (int y = 0; y < h; ++y) {
        const int* up = &rows[static_cast<std::size_t>(std::max(y - 1, 0)) * w];
        const int* mid = &rows[static_cast<std::size_t>(y) * w];
        const int* down = &rows[static_cast<std::size_t>(std::min(y + 1, h - 1)) * w];
        std::uint8_t* dst = &out.pixels[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) dst[x] = static_cast<std::uint8_t>((up[x] + mid[x] + down[x] + 4) / 9);
    }
    return out;
}

namespace {

using u128 = unsigned __int128;

// Between-class variance up to a constant factor, as the exact fraction num / den.
struct Variance {
    u128 num{0};
    u128 den{1};
};

// num <= 65025 N^4 and den <= N^2 / 4, so num * den stays below 2^128 for N < 2^19 pixels.
constexpr std::int64_t kCrossMultiplyLimit = std::int64_t{1} << 19;

bool greater(const Variance& a, const Variance& b, bool small) {
    if (small) return a.num * b.den > b.num * a.den;
    const u128 qa = a.num / a.den;
    const u128 qb = b.num / b.den;
    if (qa != qb) return qa > qb;
    return (a.num % a.den) * b.den > (b.num % b.den) * a.den;
}

}  // namespace

std::optional<OtsuResult> otsu_threshold(const GrayImage& image) {
    if (image.pixels.empty()) return std::nullopt;
    std::array<std::int64_t, 256> hist{};
    for (auto p : image.pixels) ++hist[p];
    const std::int64_t total = static_cast<std::int64_t>(image.pixels.size());
    std::int64_t total_sum = 0;
    for (int i = 0; i < 256; ++i) total_sum += i * hist[i];

    std::int64_t n0 = 0;
    std::int64_t s0 = 0;
    Variance best;
    int best_t = -1;
    for (int t = 0; t < 255; ++t) {
        n0 += hist[t];
        s0 += t * hist[t];
        const std::int64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        // w0 w1 (mu0 - mu1)^2 = (n0 S - N s0)^2 / (N^2 n0 n1)
        const std::int64_t a = n0 * total_sum - total * s0;
        const u128 mag = static_cast<u128>(a < 0 ? -a : a);
        const Variance v{mag * mag, static_cast<u128>(n0) * static_cast<u128>(n1)};
        if (best_t < 0 || greater(v, best, total < kCrossMultiplyLimit)) {
            best = v;
            best_t = t;
        }
    }
    if (best_t < 0 || best.num == 0) return std::nullopt;

    OtsuResult r;
    r.threshold = best_t;
    r.foreground.width = image.width;
    r.foreground.height = image.height;
    r.foreground.pixels.resize(image.pixels.size());
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        r.foreground.pixels[i] = image.pixels[i] > best_t ? 1 : 0;
    }
    return r;
}

std::optional<PixelRect> best_fit_bbox(const BinaryImage& mask, int min_component_area) {
    const int w = mask.width;
    const int h = mask.height;
    std::vector<std::uint8_t> seen(mask.pixels.size(), 0);
    std::vector<std::pair<int, int>> stack;
    std::optional<PixelRect> best;
    long best_area = 0;

    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            const auto start = static_cast<std::size_t>(y0) * w + x0;
            if (!mask.pixels[start] || seen[start]) continue;
            int min_x = x0, max_x = x0, min_y = y0, max_y = y0;
            long area = 0;
            seen[start] = 1;
            stack.assign(1, {x0, y0});
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                ++area;
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
                for (int ny = std::max(y - 1, 0); ny <= std::min(y + 1, h - 1); ++ny) {
                    for (int nx = std::max(x - 1, 0); nx <= std::min(x + 1, w - 1); ++nx) {
                        const auto n = static_cast<std::size_t>(ny) * w + nx;
                        if (mask.pixels[n] && !seen[n]) {
                            seen[n] = 1;
                            stack.emplace_back(nx, ny);
                        }
                    }
                }
            }
            if (area > best_area) {
                best_area = area;
                best = PixelRect{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
            }
        }
    }
    if (!best || best_area < min_component_area) return std::nullopt;
    return best;
}

double weighted_event_sum(const WindowFrame& window, const PixelRect& region) {
    double sum = 0.0;
    for (const auto& e : window.events) {
        if (region.contains(e.x, e.y)) sum += window.weight(e.t);
    }
    return sum;
}

Detection refine_bbox(const Detection& detection, const WindowFrame& window, SensorSize sensor,
                      const RefineConfig& config) {
    PixelRect region;
    try {
        region = enlarge_bbox(detection.bbox, config.bbox_enlargement, sensor);
    } catch (const ValueError&) {
        return detection;
    }
    if (weighted_event_sum(window, region) < config.min_weight_sum) return detection;

    auto gray = events_to_gray(window, region);
    if (!gray) return detection;
    auto otsu = otsu_threshold(box_blur3(*gray));
    if (!otsu) return detection;
    auto box = best_fit_bbox(otsu->foreground, config.min_component_area);
    if (!box) return detection;

    Detection out = detection;
    out.bbox = {double(region.left + box->left), double(region.top + box->top), double(box->width),
                double(box->height)};
    return out;
}

}  // namespace evtrack
