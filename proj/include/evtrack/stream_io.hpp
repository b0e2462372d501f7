#pragma once

#include <evtrack/common.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evtrack {

// A frame-based detector output, ingested from file.
struct DetectionRecord {
    int frame_index{0};
    Micros t{0};
    std::string class_label;
    double confidence{0.0};
    BBox bbox;
};

struct DetectionFilter {
    double min_confidence{0.5};
    std::set<std::string> accepted_classes{default_vehicle_classes()};
    // When set, records whose bbox misses the sensor rectangle are dropped.
    std::optional<SensorSize> sensor;

    static std::set<std::string> default_vehicle_classes();
};

using DetectionsByFrame = std::map<int, std::vector<DetectionRecord>>;

struct FrameEntry {
    int frame_index{0};
    Micros t{0};
    std::string image_path;
};

struct SequenceManifest {
    SensorSize sensor;
    double frame_rate{24.0};
    std::vector<FrameEntry> frames;
    std::string events_path;
    std::string detections_path;
};

// One row of MOTChallenge text: frame,id,left,top,width,height,conf,-1,-1,-1
struct MotRecord {
    int frame{0};
    int id{0};
    BBox bbox;
    double conf{1.0};

    friend bool operator==(const MotRecord&, const MotRecord&) = default;
};

// CSV `t_us,x,y,p` with p in {0,1}. An optional header line is skipped.
// Throws ParseError (malformed), OrderError (decreasing t), ValueError (outside sensor).
std::vector<Event> parse_events(std::string_view text, std::optional<SensorSize> sensor = std::nullopt);
std::string write_events(std::span<const Event> events);

// CSV `frame_index,t_us,class,conf,left,top,w,h`.
DetectionsByFrame parse_detections(std::string_view text, const DetectionFilter& filter = {});
std::string write_detections(std::span<const DetectionRecord> records);

// Binary (P5) or ASCII (P2) PGM with maxval 255.
GrayImage load_frame(std::string_view bytes);
std::string write_pgm(const GrayImage& image);

std::string write_mot(std::vector<MotRecord> records);
std::vector<MotRecord> parse_mot(std::string_view text);

// CSV `t_s,distance_m`. Empty or "nan" values are kept as NaN gaps.
TimeSeries parse_series(std::string_view text);
std::string write_series(const TimeSeries& series);

// Relative paths inside the manifest are resolved against base_dir.
SequenceManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir = {});
std::string write_manifest(const SequenceManifest& manifest);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Shortest round-trip decimal rendering ("10" for 10.0, "0.25" for 0.25).
std::string format_number(double value);

}  // namespace evtrack
