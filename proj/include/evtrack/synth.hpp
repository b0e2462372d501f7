#pragma once

#include <evtrack/common.hpp>
#include <evtrack/geometry.hpp>
#include <evtrack/stream_io.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace evtrack::synth {

struct Waypoint {
    double t_s{0.0};
    double x{0.0};  // top-left, pixels
    double y{0.0};
};

struct ObjectSpec {
    double width{80.0};
    double height{45.0};
    std::vector<Waypoint> trajectory;  // piecewise linear; the object exists between first and last time
    double event_density{0.10};        // events per edge pixel per ms while moving
    double texture_fraction{0.3};      // share of interior pixels that carry texture features
};

struct DetectorModel {
    double miss_probability{0.0};
    std::vector<int> scripted_misses;  // frame indices where every object is missed
    double jitter_px{0.0};             // uniform +- jitter on left, top, width, height
    double inflate{0.0};               // fraction of width/height added per side
    double false_positive_rate{0.0};   // probability of one spurious box per frame
    double confidence{0.9};
    std::string class_label{"car"};
};

struct Scenario {
    SensorSize sensor;
    double frame_rate{24.0};
    double duration_s{2.0};
    std::vector<ObjectSpec> objects;
    DetectorModel detector;
    double noise_rate_per_ms{0.2};  // uniform background events per ms over the sensor
    Micros sim_step_us{500};
    std::uint8_t background{60};
    std::uint8_t foreground{200};
    std::uint64_t seed{1};
    std::optional<double> gt_rate_hz;           // defaults to frame_rate
    std::optional<double> gt_distance_rate_hz;  // defaults to frame_rate

    void validate() const;
};

Scenario parse_scenario(std::string_view json_text);
std::string write_scenario(const Scenario& scenario);

// One vehicle crossing the sensor left to right at constant speed.
Scenario single_vehicle(double speed_px_s = 120.0, std::uint64_t seed = 1);

struct Output {
    std::vector<Event> events;
    std::vector<FrameEntry> frames;  // image_path left empty; write() fills it
    std::vector<GrayImage> images;
    std::vector<DetectionRecord> detections;
    std::vector<MotRecord> gt_tracks;  // window numbering of a schedule at gt_rate_hz from t = 0
    TimeSeries gt_distance;            // object 0, identity calibration
    Calibration calibration;
};

// Ground-truth box of object `index` at time t (sensor-clipped), if visible.
std::optional<BBox> object_box(const Scenario& scenario, std::size_t index, Micros t);

// GT boxes on the window schedule t_i = round(i * 1e6 / rate), window number i + 1.
std::vector<MotRecord> gt_tracks_at_rate(const Scenario& scenario, double rate_hz);

// Identity lens/projection with W = sensor width.
Calibration identity_calibration(const Scenario& scenario);

Output generate(const Scenario& scenario);

// Writes events.csv, detections.csv, frames/frame_NNNN.pgm, gt.txt, gt_distance.csv,
// calibration.json and manifest.json into `dir`. Returns the manifest path.
std::filesystem::path write(const Output& out, const Scenario& scenario, const std::filesystem::path& dir);

SequenceManifest manifest_for(const Output& out, const Scenario& scenario);

}  // namespace evtrack::synth
