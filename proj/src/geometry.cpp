#include <evtrack/geometry.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace evtrack {

void DistortionModel::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw ValueError("distortion model: fx and fy must be positive");
}

double PerspectiveMatrix::determinant() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

PerspectiveMatrix PerspectiveMatrix::inverse() const {
    const double det = determinant();
    if (std::abs(det) <= 1e-12) throw NumericError("perspective matrix is singular");
    PerspectiveMatrix r;
    r.m = {(m[4] * m[8] - m[5] * m[7]) / det, (m[2] * m[7] - m[1] * m[8]) / det, (m[1] * m[5] - m[2] * m[4]) / det,
           (m[5] * m[6] - m[3] * m[8]) / det, (m[0] * m[8] - m[2] * m[6]) / det, (m[2] * m[3] - m[0] * m[5]) / det,
           (m[3] * m[7] - m[4] * m[6]) / det, (m[1] * m[6] - m[0] * m[7]) / det, (m[0] * m[4] - m[1] * m[3]) / det};
    return r;
}

void DistanceCalib::validate() const {
    if (!(frame_width_px > 0.0) || !(meters_per_pixel > 0.0) || !(lidar_offset_m > 0.0)) {
        throw ValueError("distance calibration values must be positive");
    }
}

Calibration parse_calibration(std::string_view json_text) {
    Calibration c;
    try {
        const auto j = nlohmann::json::parse(json_text);
        if (j.contains("distortion")) {
            const auto& d = j.at("distortion");
            auto& m = c.distortion;
            m.fx = d.value("fx", 1.0);
            m.fy = d.value("fy", 1.0);
            m.cx = d.value("cx", 0.0);
            m.cy = d.value("cy", 0.0);
            m.k1 = d.value("k1", 0.0);
            m.k2 = d.value("k2", 0.0);
            m.k3 = d.value("k3", 0.0);
            m.p1 = d.value("p1", 0.0);
            m.p2 = d.value("p2", 0.0);
        }
        if (j.contains("perspective")) {
            const auto arr = j.at("perspective").get<std::vector<double>>();
            if (arr.size() != 9) throw ValueError("calibration: perspective must have 9 entries (row-major)");
            std::copy(arr.begin(), arr.end(), c.perspective.m.begin());
        }
        if (j.contains("distance")) {
            const auto& d = j.at("distance");
            c.distance.frame_width_px = d.value("frame_width_px", c.distance.frame_width_px);
            c.distance.meters_per_pixel = d.value("meters_per_pixel", c.distance.meters_per_pixel);
            c.distance.lidar_offset_m = d.value("lidar_offset_m", c.distance.lidar_offset_m);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("calibration: ") + e.what());
    }
    c.distortion.validate();
    c.distance.validate();
    if (std::abs(c.perspective.determinant()) <= 1e-12) throw ValueError("calibration: perspective matrix singular");
    return c;
}

std::string write_calibration(const Calibration& c) {
    nlohmann::ordered_json j;
    const auto& d = c.distortion;
    j["distortion"] = {{"fx", d.fx}, {"fy", d.fy}, {"cx", d.cx}, {"cy", d.cy}, {"k1", d.k1},
                       {"k2", d.k2}, {"k3", d.k3}, {"p1", d.p1}, {"p2", d.p2}};
    j["perspective"] = c.perspective.m;
    j["distance"] = {{"frame_width_px", c.distance.frame_width_px},
                     {"meters_per_pixel", c.distance.meters_per_pixel},
                     {"lidar_offset_m", c.distance.lidar_offset_m}};
    return j.dump(2) + "\n";
}

namespace {

Point2 distort_normalized(double x, double y, const DistortionModel& m) {
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (m.k1 + r2 * (m.k2 + r2 * m.k3));
    return {x * radial + 2.0 * m.p1 * x * y + m.p2 * (r2 + 2.0 * x * x),
            y * radial + m.p1 * (r2 + 2.0 * y * y) + 2.0 * m.p2 * x * y};
}

}  // namespace

Point2 distort_point(Point2 ideal, const DistortionModel& m) {
    const auto d = distort_normalized((ideal.x - m.cx) / m.fx, (ideal.y - m.cy) / m.fy, m);
    return {d.x * m.fx + m.cx, d.y * m.fy + m.cy};
}

Point2 undistort_point(Point2 observed, const DistortionModel& m) {
    m.validate();
    const double xd = (observed.x - m.cx) / m.fx;
    const double yd = (observed.y - m.cy) / m.fy;
    double x = xd;
    double y = yd;
    constexpr int kMaxIterations = 50;
    for (int it = 0; it <= kMaxIterations; ++it) {
        const auto fwd = distort_normalized(x, y, m);
        const double rx = (fwd.x - xd) * m.fx;
        const double ry = (fwd.y - yd) * m.fy;
        if (std::hypot(rx, ry) < 1e-6) return {x * m.fx + m.cx, y * m.fy + m.cy};
        if (it == kMaxIterations) break;
        const double r2 = x * x + y * y;
        const double radial = 1.0 + r2 * (m.k1 + r2 * (m.k2 + r2 * m.k3));
        const double dx = 2.0 * m.p1 * x * y + m.p2 * (r2 + 2.0 * x * x);
        const double dy = m.p1 * (r2 + 2.0 * y * y) + 2.0 * m.p2 * x * y;
        x = (xd - dx) / radial;
        y = (yd - dy) / radial;
        if (!std::isfinite(x) || !std::isfinite(y)) break;
    }
    throw NumericError("undistort_point: no convergence within 50 iterations");
}

Point2 perspective_transform(Point2 v, const PerspectiveMatrix& M) {
    const double d = M(2, 0) * v.x + M(2, 1) * v.y + M(2, 2);
    if (std::abs(d) <= 1e-12) throw NumericError("perspective_transform: point maps to the horizon");
    return {(M(0, 0) * v.x + M(0, 1) * v.y + M(0, 2)) / d, (M(1, 0) * v.x + M(1, 1) * v.y + M(1, 2)) / d};
}

double pixel_to_distance(double zx, const DistanceCalib& c) {
    return (c.frame_width_px - zx) * c.meters_per_pixel + c.lidar_offset_m;
}

bool outside_frame(double zx, const DistanceCalib& c) { return zx < 0.0 || zx > c.frame_width_px; }

double track_to_distance(const BBox& bbox, const DistortionModel& model, const PerspectiveMatrix& m,
                         const DistanceCalib& calib) {
    const Point2 v{bbox.right(), bbox.top + bbox.height / 2.0};
    const Point2 z = perspective_transform(undistort_point(v, model), m);
    return pixel_to_distance(z.x, calib);
}

std::vector<Biquad> parse_sos(std::string_view json_text) {
    std::vector<Biquad> out;
    try {
        const auto j = nlohmann::json::parse(json_text);
        const auto& list = j.is_object() ? j.at("sos") : j;
        for (const auto& s : list) {
            std::vector<double> b, a;
            if (s.is_array()) {
                auto flat = s.get<std::vector<double>>();
                if (flat.size() != 6) throw ValueError("sos: flat section needs 6 coefficients");
                b.assign(flat.begin(), flat.begin() + 3);
                a.assign(flat.begin() + 3, flat.end());
            } else {
                b = s.at("b").get<std::vector<double>>();
                a = s.at("a").get<std::vector<double>>();
            }
            if (b.empty() || a.empty() || b.size() > 3 || a.size() > 3) {
                throw ValueError("sos: each section needs 1..3 b and a coefficients");
            }
            if (a[0] == 0.0) throw ValueError("sos: a0 must be nonzero");
            Biquad q;
            q.b = {0, 0, 0};
            q.a = {0, 0, 0};
            for (std::size_t i = 0; i < b.size(); ++i) q.b[i] = b[i] / a[0];
            for (std::size_t i = 0; i < a.size(); ++i) q.a[i] = a[i] / a[0];
            out.push_back(q);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("sos: ") + e.what());
    }
    return out;
}

namespace {

using State = std::array<double, 2>;

void run_cascade(const std::vector<Biquad>& sos, std::vector<double>& x, std::vector<State>& z) {
    for (std::size_t s = 0; s < sos.size(); ++s) {
        const auto& q = sos[s];
        auto& st = z[s];
        for (double& v : x) {
            const double y = q.b[0] * v + st[0];
            st[0] = q.b[1] * v + st[1] - q.a[1] * y;
            st[1] = q.b[2] * v - q.a[2] * y;
            v = y;
        }
    }
}

// Steady-state section states for a unit step at the cascade input.
std::vector<State> steady_state(const std::vector<Biquad>& sos) {
    std::vector<State> zi(sos.size());
    double scale = 1.0;
    for (std::size_t s = 0; s < sos.size(); ++s) {
        const auto& q = sos[s];
        const double asum = q.a[0] + q.a[1] + q.a[2];
        if (std::abs(asum) < 1e-300) throw NumericError("sos: section has a pole at DC");
        const double gain = (q.b[0] + q.b[1] + q.b[2]) / asum;
        const double z1 = q.b[2] - q.a[2] * gain;
        const double z0 = q.b[1] + z1 - q.a[1] * gain;
        zi[s] = {scale * z0, scale * z1};
        scale *= gain;
    }
    return zi;
}

}  // namespace

std::vector<double> sos_filter(const std::vector<Biquad>& sos, const std::vector<double>& x) {
    std::vector<double> y = x;
    std::vector<State> z(sos.size(), State{0.0, 0.0});
    run_cascade(sos, y, z);
    return y;
}

std::vector<double> sos_filtfilt(const std::vector<Biquad>& sos, const std::vector<double>& x) {
    if (sos.empty() || x.empty()) return x;
    const long n = static_cast<long>(x.size());
    long ntaps = 2 * static_cast<long>(sos.size()) + 1;
    long zero_b2 = 0, zero_a2 = 0;
    for (const auto& q : sos) {
        zero_b2 += q.b[2] == 0.0;
        zero_a2 += q.a[2] == 0.0;
    }
    ntaps -= std::min(zero_b2, zero_a2);
    const long edge = std::min(3 * ntaps, n - 1);

    std::vector<double> ext;
    ext.reserve(static_cast<std::size_t>(n + 2 * edge));
    for (long i = edge; i >= 1; --i) ext.push_back(2.0 * x.front() - x[static_cast<std::size_t>(i)]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (long i = n - 2; i >= n - 1 - edge; --i) ext.push_back(2.0 * x.back() - x[static_cast<std::size_t>(i)]);

    const auto zi = steady_state(sos);
    auto scaled = [&](double s) {
        auto z = zi;
        for (auto& st : z) st = {st[0] * s, st[1] * s};
        return z;
    };
    auto z = scaled(ext.front());
    run_cascade(sos, ext, z);
    std::reverse(ext.begin(), ext.end());
    z = scaled(ext.front());
    run_cascade(sos, ext, z);
    std::reverse(ext.begin(), ext.end());
    return {ext.begin() + edge, ext.begin() + edge + n};
}

TimeSeries fill_gaps(const TimeSeries& series) {
    TimeSeries out = series;
    auto& s = out.samples;
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isnan(s[i].value)) valid.push_back(i);
    }
    if (valid.empty()) throw ValueError("fill_gaps: series has no valid samples");
    std::size_t k = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isnan(s[i].value)) continue;
        while (k + 1 < valid.size() && valid[k + 1] < i) ++k;
        if (i < valid.front()) {
            s[i].value = s[valid.front()].value;
        } else if (i > valid.back()) {
            s[i].value = s[valid.back()].value;
        } else {
            const auto& a = series.samples[valid[k]];
            const auto& b = series.samples[valid[k + 1]];
            s[i].value = a.value + (b.value - a.value) * (s[i].t - a.t) / (b.t - a.t);
        }
    }
    return out;
}

TimeSeries resample_uniform(const TimeSeries& series, double rate_hz) {
    if (series.size() < 2) throw ValueError("resample_uniform: need at least two samples");
    if (!(rate_hz > 0.0)) throw ValueError("resample_uniform: rate must be positive");
    const auto& s = series.samples;
    const double t0 = s.front().t;
    const double t_last = s.back().t;
    TimeSeries out;
    std::size_t k = 0;
    for (long i = 0;; ++i) {
        const double t = t0 + static_cast<double>(i) / rate_hz;
        if (t > t_last + 1e-9) break;
        while (k + 2 < s.size() && s[k + 1].t <= t) ++k;
        const auto& a = s[k];
        const auto& b = s[k + 1];
        const double f = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
        out.samples.push_back({t, a.value + (b.value - a.value) * f});
    }
    return out;
}

TimeSeries preprocess_groundtruth(const TimeSeries& series, const PreprocessOptions& options) {
    if (series.empty()) throw ValueError("preprocess_groundtruth: empty series");
    TimeSeries ts = resample_uniform(fill_gaps(series), options.target_rate_hz);
    if (!options.sos.empty()) {
        std::vector<double> v;
        v.reserve(ts.size());
        for (const auto& s : ts.samples) v.push_back(s.value);
        v = options.zero_phase ? sos_filtfilt(options.sos, v) : sos_filter(options.sos, v);
        for (std::size_t i = 0; i < v.size(); ++i) ts.samples[i].value = v[i];
    }
    for (auto& s : ts.samples) s.t += options.sync_offset_s;
    return ts;
}

namespace {

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + static_cast<long>(n / 2), v.end());
    const double hi = v[n / 2];
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(n / 2));
    return (lo + hi) / 2.0;
}

}  // namespace

DistanceErrors distance_error_metrics(const TimeSeries& pred, const TimeSeries& gt, double match_tolerance_s) {
    std::vector<Sample> p;
    for (const auto& s : pred.samples) {
        if (!std::isnan(s.value)) p.push_back(s);
    }
    std::stable_sort(p.begin(), p.end(), [](const Sample& a, const Sample& b) { return a.t < b.t; });

    DistanceErrors out;
    std::vector<double> abs_err, rel_err;
    double sq = 0.0;
    for (const auto& g : gt.samples) {
        if (std::isnan(g.value)) continue;
        ++out.total;
        auto it = std::lower_bound(p.begin(), p.end(), g.t, [](const Sample& s, double t) { return s.t < t; });
        const Sample* best = nullptr;
        if (it != p.end()) best = &*it;
        if (it != p.begin()) {
            const Sample* prev = &*(it - 1);
            if (!best || std::abs(prev->t - g.t) <= std::abs(best->t - g.t)) best = prev;
        }
        if (!best || std::abs(best->t - g.t) > match_tolerance_s) continue;
        ++out.detected;
        const double e = best->value - g.value;
        abs_err.push_back(std::abs(e));
        rel_err.push_back(std::abs(e) / std::abs(g.value));
        sq += e * e;
    }
    out.success_rate = out.total ? static_cast<double>(out.detected) / static_cast<double>(out.total) : 0.0;
    if (out.detected > 0) {
        out.median_abs_error_m = median(abs_err);
        out.median_rel_error = median(rel_err);
        out.rmse_m = std::sqrt(sq / static_cast<double>(out.detected));
    }
    return out;
}

}  // namespace evtrack
