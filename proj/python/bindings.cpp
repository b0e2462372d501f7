#include <evtrack/event_detector.hpp>
#include <evtrack/geometry.hpp>
#include <evtrack/metrics.hpp>
#include <evtrack/pipeline.hpp>
#include <evtrack/refine.hpp>
#include <evtrack/synth.hpp>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace evtrack;

namespace {

RunConfig make_config(const std::optional<std::string>& config_json, const std::optional<std::string>& mode,
                      std::optional<double> rate_hz) {
    RunConfig cfg = config_json ? parse_run_config(*config_json) : RunConfig{};
    if (!config_json) cfg.apply_mode(cfg.mode);
    if (mode) cfg.apply_mode(*mode);
    if (rate_hz) cfg.window.tracking_rate_hz = *rate_hz;
    return cfg;
}

TrackingResult track_manifest(const std::string& manifest, const RunConfig& cfg) {
    const bool need_images = cfg.tracker.mask_kind == MaskKind::edge_based &&
                             (cfg.tracker.recovery_enabled || cfg.tracker.inter_frame_enabled);
    py::gil_scoped_release release;
    return run_tracking(load_sequence(manifest, cfg.detection_filter, need_images), cfg);
}

std::vector<Biquad> to_sos(const std::vector<std::array<double, 6>>& rows) {
    std::vector<Biquad> sos;
    for (const auto& r : rows) {
        if (r[3] == 0.0) throw ValueError("sos: a0 must be nonzero");
        Biquad q;
        for (int i = 0; i < 3; ++i) {
            q.b[i] = r[i] / r[3];
            q.a[i] = r[3 + i] / r[3];
        }
        sos.push_back(q);
    }
    return sos;
}

PerspectiveMatrix to_matrix(const std::array<double, 9>& m) {
    PerspectiveMatrix p;
    p.m = m;
    return p;
}

py::dict hota_dict(const HotaReport& r) {
    py::list per_alpha;
    for (const auto& s : r.per_alpha) {
        py::dict d;
        d["alpha"] = s.alpha;
        d["hota"] = s.hota;
        d["det_a"] = s.det_a;
        d["ass_a"] = s.ass_a;
        d["loc_a"] = s.loc_a;
        d["tp"] = s.tp;
        d["fn"] = s.fn;
        d["fp"] = s.fp;
        per_alpha.append(d);
    }
    py::dict out;
    out["hota"] = r.hota;
    out["det_a"] = r.det_a;
    out["ass_a"] = r.ass_a;
    out["loc_a"] = r.loc_a;
    out["hota_0"] = r.hota_0;
    out["loc_a_0"] = r.loc_a_0;
    out["hota_loc_a_0"] = r.hota_loc_a_0;
    out["per_alpha"] = per_alpha;
    return out;
}

}  // namespace

PYBIND11_MODULE(_evtrack, m) {
    m.doc() = "Event-camera multi-object tracking core";

    // Translators run newest-first, so the base class is registered before its subclasses.
    static py::exception<Error> base(m, "EvtrackError", PyExc_RuntimeError);
    static py::exception<ParseError> parse(m, "ParseError", base.ptr());
    static py::exception<IoError> io(m, "IoError", base.ptr());
    static py::exception<ValueError> value(m, "InvalidValueError", base.ptr());
    static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
    static py::exception<NumericError> numeric(m, "NumericError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ParseError& e) {
            py::set_error(parse, e.what());
        } catch (const IoError& e) {
            py::set_error(io, e.what());
        } catch (const ValueError& e) {
            py::set_error(value, e.what());
        } catch (const ConfigError& e) {
            py::set_error(config, e.what());
        } catch (const NumericError& e) {
            py::set_error(numeric, e.what());
        } catch (const Error& e) {
            py::set_error(base, e.what());
        } catch (const ContractError& e) {
            py::set_error(PyExc_AssertionError, e.what());
        }
    });

    m.def("mode_names", [] {
        std::vector<std::string> out;
        for (auto n : mode_names()) out.emplace_back(n);
        return out;
    });

    m.def(
        "track",
        [](const std::string& manifest, std::optional<std::string> mode, std::optional<double> rate_hz,
           std::optional<std::string> config_json) {
            const auto cfg = make_config(config_json, mode, rate_hz);
            const auto res = track_manifest(manifest, cfg);
            py::list rows;
            for (const auto& s : res.snapshots) {
                rows.append(py::make_tuple(s.window, s.t, s.track_id, s.bbox.left, s.bbox.top, s.bbox.width,
                                           s.bbox.height, s.conf, std::string(to_string(s.source))));
            }
            return py::make_tuple(rows, write_mot(to_mot(res.snapshots)), res.schedule.size());
        },
        py::arg("manifest"), py::arg("mode") = py::none(), py::arg("rate_hz") = py::none(),
        py::arg("config_json") = py::none(),
        "Track one sequence. Returns (snapshots, mot_text, window_count); a snapshot is\n"
        "(window, t_us, id, left, top, width, height, conf, source).");

    m.def(
        "evaluate",
        [](const std::string& gt_mot, const std::string& pred_mot) {
            return hota_dict(compute_hota(parse_mot(gt_mot), parse_mot(pred_mot)));
        },
        py::arg("gt_mot"), py::arg("pred_mot"), "HOTA family from two MOT texts on the same window schedule.");

    m.def(
        "synth",
        [](const std::string& out_dir, std::optional<std::string> scenario_json, std::optional<std::uint64_t> seed,
           std::optional<double> gt_rate_hz, std::optional<double> miss_probability) {
            synth::Scenario sc = scenario_json ? synth::parse_scenario(*scenario_json) : synth::single_vehicle();
            if (seed) sc.seed = *seed;
            if (gt_rate_hz) sc.gt_rate_hz = *gt_rate_hz;
            if (miss_probability) sc.detector.miss_probability = *miss_probability;
            sc.validate();
            return synth::write(synth::generate(sc), sc, out_dir).string();
        },
        py::arg("out_dir"), py::arg("scenario_json") = py::none(), py::arg("seed") = py::none(),
        py::arg("gt_rate_hz") = py::none(), py::arg("miss_probability") = py::none(),
        "Write a synthetic sequence; returns the manifest path.");

    m.def(
        "undistort_point",
        [](double x, double y, double fx, double fy, double cx, double cy, std::array<double, 5> coeffs) {
            DistortionModel dm{fx, fy, cx, cy, coeffs[0], coeffs[1], coeffs[4], coeffs[2], coeffs[3]};
            const auto p = undistort_point({x, y}, dm);
            return std::pair{p.x, p.y};
        },
        py::arg("x"), py::arg("y"), py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"),
        py::arg("coeffs") = std::array<double, 5>{}, "coeffs in OpenCV order (k1, k2, p1, p2, k3).");

    m.def(
        "distort_point",
        [](double x, double y, double fx, double fy, double cx, double cy, std::array<double, 5> coeffs) {
            DistortionModel dm{fx, fy, cx, cy, coeffs[0], coeffs[1], coeffs[4], coeffs[2], coeffs[3]};
            const auto p = distort_point({x, y}, dm);
            return std::pair{p.x, p.y};
        },
        py::arg("x"), py::arg("y"), py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"),
        py::arg("coeffs") = std::array<double, 5>{});

    m.def(
        "perspective_transform",
        [](double x, double y, const std::array<double, 9>& matrix) {
            const auto p = perspective_transform({x, y}, to_matrix(matrix));
            return std::pair{p.x, p.y};
        },
        py::arg("x"), py::arg("y"), py::arg("matrix"), "matrix is row-major 3x3, flattened.");

    m.def(
        "invert_perspective", [](const std::array<double, 9>& matrix) { return to_matrix(matrix).inverse().m; },
        py::arg("matrix"));

    m.def(
        "pixel_to_distance",
        [](double zx, double frame_width_px, double meters_per_pixel, double lidar_offset_m) {
            DistanceCalib c{frame_width_px, meters_per_pixel, lidar_offset_m};
            c.validate();
            return pixel_to_distance(zx, c);
        },
        py::arg("zx"), py::arg("frame_width_px") = DistanceCalib{}.frame_width_px,
        py::arg("meters_per_pixel") = DistanceCalib{}.meters_per_pixel,
        py::arg("lidar_offset_m") = DistanceCalib{}.lidar_offset_m);

    m.def(
        "track_to_distance",
        [](const std::array<double, 4>& bbox, const std::string& calibration_json) {
            const auto c = parse_calibration(calibration_json);
            return track_to_distance({bbox[0], bbox[1], bbox[2], bbox[3]}, c.distortion, c.perspective, c.distance);
        },
        py::arg("bbox"), py::arg("calibration_json"), "bbox is (left, top, width, height).");

    m.def(
        "sos_filter", [](const std::vector<std::array<double, 6>>& sos, const std::vector<double>& x) {
            return sos_filter(to_sos(sos), x);
        },
        py::arg("sos"), py::arg("x"), "Single forward pass, zero initial state. sos rows: b0 b1 b2 a0 a1 a2.");

    m.def(
        "sos_filtfilt", [](const std::vector<std::array<double, 6>>& sos, const std::vector<double>& x) {
            return sos_filtfilt(to_sos(sos), x);
        },
        py::arg("sos"), py::arg("x"), "Zero-phase forward-backward filtering with odd-extension padding.");

    m.def(
        "distance_errors",
        [](const std::vector<std::pair<double, double>>& pred, const std::vector<std::pair<double, double>>& gt,
           double tolerance_s) {
            TimeSeries p, g;
            for (auto [t, v] : pred) p.samples.push_back({t, v});
            for (auto [t, v] : gt) g.samples.push_back({t, v});
            const auto e = distance_error_metrics(p, g, tolerance_s);
            py::dict d;
            d["median_abs_error_m"] = e.median_abs_error_m;
            d["median_rel_error"] = e.median_rel_error;
            d["rmse_m"] = e.rmse_m;
            d["success_rate"] = e.success_rate;
            d["detected"] = e.detected;
            d["total"] = e.total;
            return d;
        },
        py::arg("pred"), py::arg("gt"), py::arg("tolerance_s"), "pred and gt are lists of (t_s, distance_m).");

    m.def(
        "otsu_threshold",
        [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> image) -> std::optional<int> {
            if (image.ndim() != 2) throw ValueError("otsu_threshold: expected a 2-D array");
            GrayImage img(static_cast<int>(image.shape(1)), static_cast<int>(image.shape(0)));
            std::copy(image.data(), image.data() + image.size(), img.pixels.begin());
            const auto r = otsu_threshold(img);
            if (!r) return std::nullopt;
            return r->threshold;
        },
        py::arg("image"), "Otsu threshold of a 2-D uint8 image, or None when all pixels are equal.");

    m.def(
        "correlate",
        [](py::array_t<std::int8_t, py::array::c_style | py::array::forcecast> mask,
           py::array_t<double, py::array::c_style | py::array::forcecast> field) {
            if (mask.ndim() != 2 || field.ndim() != 2) throw ValueError("correlate: expected 2-D arrays");
            const int mh = static_cast<int>(mask.shape(0)), mw = static_cast<int>(mask.shape(1));
            const int fh = static_cast<int>(field.shape(0)), fw = static_cast<int>(field.shape(1));
            const EventMask em(MaskKind::event_based, {0, 0, mw, mh}, {0, 0, double(mw), double(mh)},
                               std::vector<std::int8_t>(mask.data(), mask.data() + mask.size()), 0);
            const WeightedField wf{{0, 0, fw, fh}, std::vector<double>(field.data(), field.data() + field.size())};
            const auto cm = correlate(em, wf);
            py::array_t<double> scores({cm.rows, cm.cols});
            std::copy(cm.scores.begin(), cm.scores.end(), scores.mutable_data());
            const auto peak = cm.argmax();
            return py::make_tuple(scores, py::make_tuple(peak.u, peak.v), peak.score);
        },
        py::arg("mask"), py::arg("field"),
        "Sparse template correlation. Returns (scores[v, u], (u, v) of the first maximum, best score).");

    m.def(
        "schedule",
        [](double tracking_rate_hz, const std::vector<Micros>& frame_times_us, Micros end_us) {
            SequenceManifest man;
            for (std::size_t i = 0; i < frame_times_us.size(); ++i) {
                man.frames.push_back({static_cast<int>(i), frame_times_us[i], {}});
            }
            WindowConfig wc;
            wc.tracking_rate_hz = tracking_rate_hz;
            std::vector<std::pair<Micros, std::optional<std::size_t>>> out;
            for (const auto& w : plan_windows(wc, man, 0, end_us)) {
                out.emplace_back(w.t_now, w.frames.empty() ? std::nullopt : std::optional{w.frames.front()});
            }
            return out;
        },
        py::arg("tracking_rate_hz"), py::arg("frame_times_us"), py::arg("end_us"),
        "Window instants with the frame slot each one carries (None for event-only windows).");
}
