#pragma once

#include <evtrack/common.hpp>

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace evtrack {

// Brown-Conrady lens model (radial k1..k3, tangential p1, p2).
struct DistortionModel {
    double fx{1.0}, fy{1.0};
    double cx{0.0}, cy{0.0};
    double k1{0.0}, k2{0.0}, k3{0.0};
    double p1{0.0}, p2{0.0};

    void validate() const;
    bool is_identity() const { return k1 == 0 && k2 == 0 && k3 == 0 && p1 == 0 && p2 == 0; }
};

// Row-major 3x3 projective transform.
struct PerspectiveMatrix {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r) * 3 + c]; }
    double determinant() const;
    PerspectiveMatrix inverse() const;  // NumericError when singular
};

struct DistanceCalib {
    double frame_width_px{272.7};
    double meters_per_pixel{0.044};
    double lidar_offset_m{28.0};

    void validate() const;
};

struct Calibration {
    DistortionModel distortion;
    PerspectiveMatrix perspective;
    DistanceCalib distance;
};

Calibration parse_calibration(std::string_view json_text);
std::string write_calibration(const Calibration& calib);

// Forward lens distortion of an ideal pixel.
Point2 distort_point(Point2 ideal, const DistortionModel& model);

// Inverse of distort_point by fixed-point iteration (residual < 1e-6 px, at most 50 rounds).
// Throws NumericError when it does not converge.
Point2 undistort_point(Point2 observed, const DistortionModel& model);

// Z = ((M00 x + M01 y + M02) / D, (M10 x + M11 y + M12) / D), D = M20 x + M21 y + M22.
// Throws NumericError when |D| <= 1e-12.
Point2 perspective_transform(Point2 v, const PerspectiveMatrix& m);

// (W - Zx) * d + offset.
double pixel_to_distance(double zx, const DistanceCalib& calib);
bool outside_frame(double zx, const DistanceCalib& calib);

// Centre-right point of the box, undistorted, projected and converted to meters.
double track_to_distance(const BBox& bbox, const DistortionModel& model, const PerspectiveMatrix& m,
                         const DistanceCalib& calib);

// One second-order section, b over a, a0 normalised to 1 on construction.
struct Biquad {
    std::array<double, 3> b{1, 0, 0};
    std::array<double, 3> a{1, 0, 0};
};

// Accepts a JSON list of sections, each either {"b":[..],"a":[..]} or a flat 6-array
// [b0,b1,b2,a0,a1,a2].
std::vector<Biquad> parse_sos(std::string_view json_text);

// Cascaded direct-form-II-transposed filtering, single pass, zero initial state.
std::vector<double> sos_filter(const std::vector<Biquad>& sos, const std::vector<double>& x);

// Forward-backward cascaded filtering with odd-extension padding and steady-state initial
// conditions (constant input passes unchanged through a unit-DC-gain filter).
std::vector<double> sos_filtfilt(const std::vector<Biquad>& sos, const std::vector<double>& x);

// Linear interpolation over NaN gaps; leading and trailing gaps take the nearest valid value.
TimeSeries fill_gaps(const TimeSeries& series);

// Uniform samples t0, t0 + 1/rate, ... <= t_last by linear interpolation.
TimeSeries resample_uniform(const TimeSeries& series, double rate_hz);

struct PreprocessOptions {
    double target_rate_hz{1000.0};
    std::vector<Biquad> sos;  // empty: no filtering
    bool zero_phase{true};
    double sync_offset_s{0.0};
};

// gap fill -> uniform resample -> IIR -> time shift by sync_offset_s.
TimeSeries preprocess_groundtruth(const TimeSeries& series, const PreprocessOptions& options);

struct DistanceErrors {
    std::optional<double> median_abs_error_m;
    std::optional<double> median_rel_error;
    std::optional<double> rmse_m;
    double success_rate{0.0};
    std::size_t detected{0};
    std::size_t total{0};
};

// Each gt sample with a prediction within match_tolerance_s (nearest in time) counts as
// detected; errors use detected samples only.
DistanceErrors distance_error_metrics(const TimeSeries& pred, const TimeSeries& gt, double match_tolerance_s);

}  // namespace evtrack
