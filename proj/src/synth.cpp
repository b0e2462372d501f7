#include <evtrack/synth.hpp>
#include <evtrack/windowing.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace evtrack::synth {

namespace {

using Json = nlohmann::ordered_json;

std::optional<Point2> position(const ObjectSpec& obj, double t_s) {
    const auto& tr = obj.trajectory;
    if (tr.empty() || t_s < tr.front().t_s || t_s > tr.back().t_s) return std::nullopt;
    if (tr.size() == 1) return Point2{tr.front().x, tr.front().y};
    std::size_t k = 0;
    while (k + 2 < tr.size() && tr[k + 1].t_s <= t_s) ++k;
    const auto& a = tr[k];
    const auto& b = tr[k + 1];
    const double f = b.t_s > a.t_s ? (t_s - a.t_s) / (b.t_s - a.t_s) : 0.0;
    return Point2{a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
}

std::optional<BBox> clip(const BBox& b, SensorSize s) {
    const double l = std::max(0.0, b.left);
    const double t = std::max(0.0, b.top);
    const double r = std::min(double(s.width), b.right());
    const double btm = std::min(double(s.height), b.bottom());
    if (r <= l || btm <= t) return std::nullopt;
    return BBox{l, t, r - l, btm - t};
}

struct Feature {
    int dx;
    int dy;
    std::int8_t p;
};

double to_s(Micros t) { return static_cast<double>(t) * 1e-6; }

Micros frame_time(double frame_rate, long f) { return std::llround(static_cast<double>(f) * 1e6 / frame_rate); }

}  // namespace

void Scenario::validate() const {
    if (sensor.width <= 0 || sensor.height <= 0) throw ValueError("scenario: sensor size must be positive");
    if (!(frame_rate > 0.0)) throw ValueError("scenario: frame_rate must be positive");
    if (!(duration_s > 0.0)) throw ValueError("scenario: duration must be positive");
    if (sim_step_us <= 0) throw ValueError("scenario: sim_step_us must be positive");
    if (noise_rate_per_ms < 0.0) throw ValueError("scenario: negative noise rate");
    for (const auto& o : objects) {
        if (!(o.width > 0.0) || !(o.height > 0.0)) throw ValueError("scenario: object size must be positive");
        if (o.trajectory.empty()) throw ValueError("scenario: object needs a trajectory");
        for (std::size_t i = 1; i < o.trajectory.size(); ++i) {
            if (o.trajectory[i].t_s < o.trajectory[i - 1].t_s) throw ValueError("scenario: waypoint times decrease");
        }
        if (o.event_density < 0.0 || o.texture_fraction < 0.0 || o.texture_fraction > 1.0) {
            throw ValueError("scenario: invalid event density or texture fraction");
        }
    }
    const auto& d = detector;
    if (d.miss_probability < 0.0 || d.miss_probability > 1.0) throw ValueError("scenario: miss_probability out of range");
    if (d.false_positive_rate < 0.0 || d.false_positive_rate > 1.0) {
        throw ValueError("scenario: false_positive_rate out of range");
    }
}

Scenario parse_scenario(std::string_view json_text) {
    Scenario s;
    try {
        const auto j = nlohmann::json::parse(json_text);
        s.sensor.width = j.value("sensor_width", s.sensor.width);
        s.sensor.height = j.value("sensor_height", s.sensor.height);
        s.frame_rate = j.value("frame_rate", s.frame_rate);
        s.duration_s = j.value("duration_s", s.duration_s);
        s.noise_rate_per_ms = j.value("noise_rate_per_ms", s.noise_rate_per_ms);
        s.sim_step_us = j.value("sim_step_us", s.sim_step_us);
        s.background = j.value("background", s.background);
        s.foreground = j.value("foreground", s.foreground);
        s.seed = j.value("seed", s.seed);
        if (j.contains("gt_rate_hz") && !j["gt_rate_hz"].is_null()) s.gt_rate_hz = j["gt_rate_hz"].get<double>();
        if (j.contains("gt_distance_rate_hz") && !j["gt_distance_rate_hz"].is_null()) {
            s.gt_distance_rate_hz = j["gt_distance_rate_hz"].get<double>();
        }
        for (const auto& o : j.value("objects", nlohmann::json::array())) {
            ObjectSpec obj;
            obj.width = o.value("width", obj.width);
            obj.height = o.value("height", obj.height);
            obj.event_density = o.value("event_density", obj.event_density);
            obj.texture_fraction = o.value("texture_fraction", obj.texture_fraction);
            for (const auto& w : o.at("trajectory")) {
                obj.trajectory.push_back({w.at("t_s").get<double>(), w.at("x").get<double>(), w.at("y").get<double>()});
            }
            s.objects.push_back(std::move(obj));
        }
        if (j.contains("detector")) {
            const auto& d = j["detector"];
            auto& m = s.detector;
            m.miss_probability = d.value("miss_probability", m.miss_probability);
            m.scripted_misses = d.value("scripted_misses", m.scripted_misses);
            m.jitter_px = d.value("jitter_px", m.jitter_px);
            m.inflate = d.value("inflate", m.inflate);
            m.false_positive_rate = d.value("false_positive_rate", m.false_positive_rate);
            m.confidence = d.value("confidence", m.confidence);
            m.class_label = d.value("class", m.class_label);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("scenario: ") + e.what());
    }
    s.validate();
    return s;
}

std::string write_scenario(const Scenario& s) {
    Json j;
    j["sensor_width"] = s.sensor.width;
    j["sensor_height"] = s.sensor.height;
    j["frame_rate"] = s.frame_rate;
    j["duration_s"] = s.duration_s;
    j["noise_rate_per_ms"] = s.noise_rate_per_ms;
    j["sim_step_us"] = s.sim_step_us;
    j["background"] = s.background;
    j["foreground"] = s.foreground;
    j["seed"] = s.seed;
    if (s.gt_rate_hz) j["gt_rate_hz"] = *s.gt_rate_hz;
    if (s.gt_distance_rate_hz) j["gt_distance_rate_hz"] = *s.gt_distance_rate_hz;
    j["objects"] = Json::array();
    for (const auto& o : s.objects) {
        Json jo;
        jo["width"] = o.width;
        jo["height"] = o.height;
        jo["event_density"] = o.event_density;
        jo["texture_fraction"] = o.texture_fraction;
        jo["trajectory"] = Json::array();
        for (const auto& w : o.trajectory) jo["trajectory"].push_back({{"t_s", w.t_s}, {"x", w.x}, {"y", w.y}});
        j["objects"].push_back(jo);
    }
    const auto& d = s.detector;
    j["detector"] = {{"miss_probability", d.miss_probability}, {"scripted_misses", d.scripted_misses},
                     {"jitter_px", d.jitter_px},               {"inflate", d.inflate},
                     {"false_positive_rate", d.false_positive_rate}, {"confidence", d.confidence},
                     {"class", d.class_label}};
    return j.dump(2) + "\n";
}

Scenario single_vehicle(double speed_px_s, std::uint64_t seed) {
    Scenario s;
    s.seed = seed;
    s.duration_s = 2.0;
    ObjectSpec car;
    car.trajectory = {{0.0, -40.0, 60.0}, {s.duration_s, -40.0 + speed_px_s * s.duration_s, 60.0}};
    s.objects.push_back(car);
    return s;
}

std::optional<BBox> object_box(const Scenario& scenario, std::size_t index, Micros t) {
    const auto& obj = scenario.objects.at(index);
    auto p = position(obj, to_s(t));
    if (!p) return std::nullopt;
    return clip({p->x, p->y, obj.width, obj.height}, scenario.sensor);
}

std::vector<MotRecord> gt_tracks_at_rate(const Scenario& scenario, double rate_hz) {
    std::vector<MotRecord> out;
    const Micros end = std::llround(scenario.duration_s * 1e6);
    for (long i = 0;; ++i) {
        const Micros t = schedule_time(0, rate_hz, i);
        if (t > end) break;
        for (std::size_t k = 0; k < scenario.objects.size(); ++k) {
            if (auto b = object_box(scenario, k, t)) {
                out.push_back({static_cast<int>(i + 1), static_cast<int>(k + 1), *b, 1.0});
            }
        }
    }
    return out;
}

Calibration identity_calibration(const Scenario& scenario) {
    Calibration c;
    c.distance.frame_width_px = scenario.sensor.width;
    c.distance.meters_per_pixel = 0.044;
    c.distance.lidar_offset_m = 28.0;
    return c;
}

Output generate(const Scenario& scenario) {
    scenario.validate();
    Output out;
    const SensorSize sensor = scenario.sensor;
    const Micros end = std::llround(scenario.duration_s * 1e6);
    const Micros step = scenario.sim_step_us;
    const double step_ms = static_cast<double>(step) / 1000.0;

    // Independent streams so detector settings never perturb the event stream.
    std::mt19937_64 ev_rng(scenario.seed);
    std::mt19937_64 tex_rng(scenario.seed ^ 0x9E3779B97F4A7C15ULL);
    std::mt19937_64 det_rng(scenario.seed ^ 0xC2B2AE3D27D4EB4FULL);

    std::vector<std::vector<Feature>> textures;
    for (const auto& obj : scenario.objects) {
        std::vector<Feature> feats;
        std::bernoulli_distribution pick(obj.texture_fraction);
        std::bernoulli_distribution pol(0.5);
        const int w = static_cast<int>(std::ceil(obj.width));
        const int h = static_cast<int>(std::ceil(obj.height));
        for (int y = 1; y + 1 < h; ++y) {
            for (int x = 1; x + 1 < w; ++x) {
                if (pick(tex_rng)) feats.push_back({x, y, pol(tex_rng) ? std::int8_t{1} : std::int8_t{-1}});
            }
        }
        textures.push_back(std::move(feats));
    }

    std::vector<Event> batch;
    auto emit = [&](double rate, int x, int y, std::int8_t p, Micros t0) {
        if (rate <= 0.0 || x < 0 || y < 0 || x >= sensor.width || y >= sensor.height) return;
        std::poisson_distribution<int> count(rate);
        std::uniform_int_distribution<Micros> when(t0, t0 + step - 1);
        for (int n = count(ev_rng); n > 0; --n) batch.push_back({when(ev_rng), x, y, p});
    };

    for (Micros t0 = 0; t0 < end; t0 += step) {
        batch.clear();
        const Micros t1 = std::min(end, t0 + step);
        for (std::size_t k = 0; k < scenario.objects.size(); ++k) {
            const auto& obj = scenario.objects[k];
            const auto a = position(obj, to_s(t0));
            const auto b = position(obj, to_s(t1));
            if (!a || !b) continue;
            const double vx = b->x - a->x;
            const double vy = b->y - a->y;
            if (vx == 0.0 && vy == 0.0) continue;
            const double mx = (a->x + b->x) / 2.0;
            const double my = (a->y + b->y) / 2.0;
            const double base = obj.event_density * step_ms;
            const double share_x = std::abs(vx) / (std::abs(vx) + std::abs(vy));
            const int row0 = static_cast<int>(std::floor(my));
            const int row1 = static_cast<int>(std::ceil(my + obj.height));
            const int col0 = static_cast<int>(std::floor(mx));
            const int col1 = static_cast<int>(std::ceil(mx + obj.width));
            if (vx != 0.0) {
                const int lead = static_cast<int>(std::floor(vx > 0 ? mx + obj.width : mx));
                const int trail = static_cast<int>(std::floor(vx > 0 ? mx : mx + obj.width));
                for (int y = row0; y < row1; ++y) {
                    emit(base * share_x, lead, y, 1, t0);
                    emit(base * share_x, trail, y, -1, t0);
                }
            }
            if (vy != 0.0) {
                const int lead = static_cast<int>(std::floor(vy > 0 ? my + obj.height : my));
                const int trail = static_cast<int>(std::floor(vy > 0 ? my : my + obj.height));
                for (int x = col0; x < col1; ++x) {
                    emit(base * (1.0 - share_x), x, lead, 1, t0);
                    emit(base * (1.0 - share_x), x, trail, -1, t0);
                }
            }
            for (const auto& f : textures[k]) {
                emit(base, static_cast<int>(std::floor(mx)) + f.dx, static_cast<int>(std::floor(my)) + f.dy, f.p, t0);
            }
        }
        if (scenario.noise_rate_per_ms > 0.0) {
            std::poisson_distribution<int> count(scenario.noise_rate_per_ms * step_ms);
            std::uniform_int_distribution<int> ux(0, sensor.width - 1), uy(0, sensor.height - 1);
            std::uniform_int_distribution<Micros> when(t0, t0 + step - 1);
            std::bernoulli_distribution pol(0.5);
            for (int n = count(ev_rng); n > 0; --n) {
                const Micros t = when(ev_rng);
                const int x = ux(ev_rng);
                const int y = uy(ev_rng);
                batch.push_back({t, x, y, pol(ev_rng) ? std::int8_t{1} : std::int8_t{-1}});
            }
        }
        std::stable_sort(batch.begin(), batch.end(), [](const Event& l, const Event& r) { return l.t < r.t; });
        out.events.insert(out.events.end(), batch.begin(), batch.end());
    }

    // Frames and detector output.
    const auto& dm = scenario.detector;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-dm.jitter_px, dm.jitter_px);
    for (long f = 0;; ++f) {
        const Micros t = frame_time(scenario.frame_rate, f);
        if (t > end) break;
        out.frames.push_back({static_cast<int>(f), t, {}});

        GrayImage img(sensor.width, sensor.height, scenario.background);
        for (std::size_t k = 0; k < scenario.objects.size(); ++k) {
            const auto b = object_box(scenario, k, t);
            if (!b) continue;
            for (int y = 0; y < sensor.height; ++y) {
                const double cy = y + 0.5;
                if (cy < b->top || cy >= b->bottom()) continue;
                for (int x = 0; x < sensor.width; ++x) {
                    const double cx = x + 0.5;
                    if (cx >= b->left && cx < b->right()) img.at(x, y) = scenario.foreground;
                }
            }
        }
        out.images.push_back(std::move(img));

        const bool scripted = std::find(dm.scripted_misses.begin(), dm.scripted_misses.end(), f) !=
                              dm.scripted_misses.end();
        for (std::size_t k = 0; k < scenario.objects.size(); ++k) {
            const auto gt = object_box(scenario, k, t);
            // the draws happen for every object and frame so that changing one knob keeps the rest stable
            const double u = unit(det_rng);
            const double jl = jitter(det_rng), jt = jitter(det_rng), jw = jitter(det_rng), jh = jitter(det_rng);
            if (!gt || scripted || u < dm.miss_probability) continue;
            BBox b = *gt;
            b = {b.left - dm.inflate * b.width + jl, b.top - dm.inflate * b.height + jt,
                 b.width * (1.0 + 2.0 * dm.inflate) + jw, b.height * (1.0 + 2.0 * dm.inflate) + jh};
            if (b.width <= 1.0 || b.height <= 1.0) continue;
            if (auto c = clip(b, sensor)) {
                out.detections.push_back({static_cast<int>(f), t, dm.class_label, dm.confidence, *c});
            }
        }
        const double u_fp = unit(det_rng);
        const double fx = unit(det_rng), fy = unit(det_rng);
        if (u_fp < dm.false_positive_rate) {
            const BBox b{fx * (sensor.width - 40), fy * (sensor.height - 25), 40, 25};
            out.detections.push_back({static_cast<int>(f), t, dm.class_label, dm.confidence, b});
        }
    }

    out.gt_tracks = gt_tracks_at_rate(scenario, scenario.gt_rate_hz.value_or(scenario.frame_rate));

    out.calibration = identity_calibration(scenario);
    if (!scenario.objects.empty()) {
        const double rate = scenario.gt_distance_rate_hz.value_or(scenario.frame_rate);
        for (long i = 0;; ++i) {
            const Micros t = schedule_time(0, rate, i);
            if (t > end) break;
            if (auto b = object_box(scenario, 0, t)) {
                const auto& c = out.calibration;
                out.gt_distance.samples.push_back(
                    {to_s(t), track_to_distance(*b, c.distortion, c.perspective, c.distance)});
            }
        }
    }
    return out;
}

SequenceManifest manifest_for(const Output& out, const Scenario& scenario) {
    SequenceManifest m;
    m.sensor = scenario.sensor;
    m.frame_rate = scenario.frame_rate;
    m.events_path = "events.csv";
    m.detections_path = "detections.csv";
    m.frames = out.frames;
    for (auto& f : m.frames) {
        char name[64];
        std::snprintf(name, sizeof name, "frames/frame_%04d.pgm", f.frame_index);
        f.image_path = name;
    }
    return m;
}

std::filesystem::path write(const Output& out, const Scenario& scenario, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "frames");
    const auto manifest = manifest_for(out, scenario);
    write_file(dir / "events.csv", write_events(out.events));
    write_file(dir / "detections.csv", write_detections(out.detections));
    for (std::size_t i = 0; i < out.images.size(); ++i) {
        write_file(dir / manifest.frames[i].image_path, write_pgm(out.images[i]));
    }
    write_file(dir / "gt.txt", write_mot(out.gt_tracks));
    write_file(dir / "gt_distance.csv", write_series(out.gt_distance));
    write_file(dir / "calibration.json", write_calibration(out.calibration));
    write_file(dir / "scenario.json", write_scenario(scenario));
    const auto path = dir / "manifest.json";
    write_file(path, write_manifest(manifest));
    return path;
}

}  // namespace evtrack::synth
