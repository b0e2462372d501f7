#include <evtrack/stream_io.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace evtrack {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Calls fn(line_number, line) for every non-blank line.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        fn(line_no, line);
    }
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_num(std::string_view field, std::size_t line, const char* name) {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError(line, std::string("invalid ") + name + " '" + std::string(field) + "'");
    }
    return value;
}

bool is_header(std::string_view line) {
    return !line.empty() && std::isalpha(static_cast<unsigned char>(line.front())) &&
           line.find(',') != std::string_view::npos;
}

bool matches_header(std::string_view line, std::initializer_list<std::string_view> names) {
    auto fields = split_csv(line);
    if (fields.size() != names.size()) return false;
    std::size_t i = 0;
    for (auto n : names) {
        if (fields[i++] != n) return false;
    }
    return true;
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (value == 0.0) return "0";
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    (void)ec;
    return std::string(buf.data(), ptr);
}

std::set<std::string> DetectionFilter::default_vehicle_classes() {
    return {"car", "truck", "bus", "van", "vehicle", "motorbike", "motorcycle"};
}

std::vector<Event> parse_events(std::string_view text, std::optional<SensorSize> sensor) {
    std::vector<Event> events;
    events.reserve(text.size() / 16);
    bool first = true;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (first) {
            first = false;
            if (matches_header(line, {"t_us", "x", "y", "p"}) || matches_header(line, {"t", "x", "y", "p"})) {
                return;
            }
        }
        auto f = split_csv(line);
        if (f.size() != 4) {
            throw ParseError(line_no, "expected 4 fields (t_us,x,y,p), got " + std::to_string(f.size()));
        }
        Event e;
        e.t = parse_num<std::int64_t>(f[0], line_no, "timestamp");
        e.x = parse_num<std::int32_t>(f[1], line_no, "x");
        e.y = parse_num<std::int32_t>(f[2], line_no, "y");
        int p = parse_num<int>(f[3], line_no, "polarity");
        if (e.t < 0 || e.x < 0 || e.y < 0) throw ParseError(line_no, "negative field");
        if (p != 0 && p != 1) throw ParseError(line_no, "polarity must be 0 or 1");
        e.p = p == 1 ? std::int8_t{1} : std::int8_t{-1};
        if (sensor && (e.x >= sensor->width || e.y >= sensor->height)) {
            throw ValueError("line " + std::to_string(line_no) + ": event outside sensor");
        }
        if (!events.empty() && e.t < events.back().t) {
            throw OrderError(line_no, "timestamp decreases");
        }
        events.push_back(e);
    });
    return events;
}

std::string write_events(std::span<const Event> events) {
    std::string out = "t_us,x,y,p\n";
    out.reserve(events.size() * 18 + out.size());
    for (const auto& e : events) {
        out += std::to_string(e.t);
        out += ',';
        out += std::to_string(e.x);
        out += ',';
        out += std::to_string(e.y);
        out += e.p > 0 ? ",1\n" : ",0\n";
    }
    return out;
}

DetectionsByFrame parse_detections(std::string_view text, const DetectionFilter& filter) {
    DetectionsByFrame out;
    bool first = true;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (first) {
            first = false;
            if (is_header(line)) return;
        }
        auto f = split_csv(line);
        if (f.size() != 8) {
            throw ParseError(line_no, "expected 8 fields (frame_index,t_us,class,conf,left,top,w,h)");
        }
        DetectionRecord r;
        r.frame_index = parse_num<int>(f[0], line_no, "frame_index");
        r.t = parse_num<std::int64_t>(f[1], line_no, "timestamp");
        r.class_label = std::string(f[2]);
        r.confidence = parse_num<double>(f[3], line_no, "confidence");
        r.bbox = {parse_num<double>(f[4], line_no, "left"), parse_num<double>(f[5], line_no, "top"),
                  parse_num<double>(f[6], line_no, "width"), parse_num<double>(f[7], line_no, "height")};
        if (r.frame_index < 0) throw ParseError(line_no, "negative frame index");
        if (r.bbox.width <= 0.0 || r.bbox.height <= 0.0) {
            throw ValueError("line " + std::to_string(line_no) + ": bbox width and height must be positive");
        }
        if (r.confidence < filter.min_confidence) return;
        if (!filter.accepted_classes.contains(r.class_label)) return;
        if (filter.sensor) {
            const auto& s = *filter.sensor;
            if (r.bbox.right() <= 0.0 || r.bbox.bottom() <= 0.0 || r.bbox.left >= s.width || r.bbox.top >= s.height) {
                return;
            }
        }
        out[r.frame_index].push_back(std::move(r));
    });
    return out;
}

std::string write_detections(std::span<const DetectionRecord> records) {
    std::string out = "frame_index,t_us,class,conf,left,top,w,h\n";
    for (const auto& r : records) {
        out += std::to_string(r.frame_index) + ',' + std::to_string(r.t) + ',' + r.class_label + ',' +
               format_number(r.confidence) + ',' + format_number(r.bbox.left) + ',' + format_number(r.bbox.top) +
               ',' + format_number(r.bbox.width) + ',' + format_number(r.bbox.height) + '\n';
    }
    return out;
}

namespace {

class PgmReader {
public:
    explicit PgmReader(std::string_view bytes) : data_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < data_.size()) {
            char c = data_[pos_];
            if (c == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_int() {
        skip_space_and_comments();
        std::size_t start = pos_;
        while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) ++pos_;
        if (start == pos_) throw FormatError("PGM: expected integer in header");
        long v = 0;
        std::from_chars(data_.data() + start, data_.data() + pos_, v);
        return v;
    }

    std::size_t pos_{0};
    std::string_view data_;
};

}  // namespace

GrayImage load_frame(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
        throw FormatError("unsupported image format (expected PGM P5 or P2)");
    }
    const bool binary = bytes[1] == '5';
    PgmReader rd(bytes);
    rd.pos_ = 2;
    long w = rd.read_int();
    long h = rd.read_int();
    long maxval = rd.read_int();
    if (w <= 0 || h <= 0) throw FormatError("PGM: non-positive dimensions");
    if (maxval != 255) throw FormatError("PGM: maxval must be 255");
    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    const std::size_t n = img.pixels.size();
    if (binary) {
        // exactly one whitespace byte separates the header from the payload
        if (rd.pos_ >= bytes.size()) throw FormatError("PGM: truncated payload");
        ++rd.pos_;
        if (bytes.size() - rd.pos_ < n) {
            throw FormatError("PGM: truncated payload (" + std::to_string(bytes.size() - rd.pos_) + " of " +
                              std::to_string(n) + " bytes)");
        }
        std::copy_n(reinterpret_cast<const std::uint8_t*>(bytes.data() + rd.pos_), n, img.pixels.begin());
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            rd.skip_space_and_comments();
            if (rd.pos_ >= bytes.size()) throw FormatError("PGM: truncated payload");
            long v = rd.read_int();
            if (v > 255) throw FormatError("PGM: sample exceeds maxval");
            img.pixels[i] = static_cast<std::uint8_t>(v);
        }
    }
    return img;
}

std::string write_pgm(const GrayImage& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

namespace {

std::string format_conf(double c) {
    std::string s = format_number(c);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

std::string write_mot(std::vector<MotRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const MotRecord& a, const MotRecord& b) { return std::tie(a.frame, a.id) < std::tie(b.frame, b.id); });
    std::string out;
    for (const auto& r : records) {
        out += std::to_string(r.frame) + ',' + std::to_string(r.id) + ',' + format_number(r.bbox.left) + ',' +
               format_number(r.bbox.top) + ',' + format_number(r.bbox.width) + ',' + format_number(r.bbox.height) +
               ',' + format_conf(r.conf) + ",-1,-1,-1\n";
    }
    return out;
}

std::vector<MotRecord> parse_mot(std::string_view text) {
    std::vector<MotRecord> out;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        auto f = split_csv(line);
        if (f.size() < 6) throw ParseError(line_no, "MOT line needs at least 6 fields");
        MotRecord r;
        r.frame = parse_num<int>(f[0], line_no, "frame");
        r.id = parse_num<int>(f[1], line_no, "id");
        r.bbox = {parse_num<double>(f[2], line_no, "left"), parse_num<double>(f[3], line_no, "top"),
                  parse_num<double>(f[4], line_no, "width"), parse_num<double>(f[5], line_no, "height")};
        r.conf = f.size() > 6 ? parse_num<double>(f[6], line_no, "conf") : 1.0;
        out.push_back(r);
    });
    return out;
}

TimeSeries parse_series(std::string_view text) {
    TimeSeries ts;
    bool first = true;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (first) {
            first = false;
            if (is_header(line)) return;
        }
        auto f = split_csv(line);
        if (f.size() != 2) throw ParseError(line_no, "expected 2 fields (t_s,distance_m)");
        Sample s;
        s.t = parse_num<double>(f[0], line_no, "time");
        if (f[1].empty() || f[1] == "nan" || f[1] == "NaN") {
            s.value = std::numeric_limits<double>::quiet_NaN();
        } else {
            s.value = parse_num<double>(f[1], line_no, "distance");
        }
        if (!ts.samples.empty() && s.t <= ts.samples.back().t) {
            throw OrderError(line_no, "time must be strictly increasing");
        }
        ts.samples.push_back(s);
    });
    return ts;
}

std::string write_series(const TimeSeries& series) {
    std::string out = "t_s,distance_m\n";
    for (const auto& s : series.samples) {
        out += format_number(s.t) + ',' + format_number(s.value) + '\n';
    }
    return out;
}

SequenceManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        return path.string();
    };
    SequenceManifest m;
    try {
        m.sensor.width = j.at("sensor_width").get<int>();
        m.sensor.height = j.at("sensor_height").get<int>();
        m.frame_rate = j.at("frame_rate").get<double>();
        m.events_path = resolve(j.at("events").get<std::string>());
        m.detections_path = resolve(j.at("detections").get<std::string>());
        for (const auto& fr : j.at("frames")) {
            FrameEntry e;
            e.frame_index = fr.at("frame_index").get<int>();
            e.t = fr.at("t_us").get<Micros>();
            e.image_path = fr.contains("image") ? resolve(fr.at("image").get<std::string>()) : std::string{};
            m.frames.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    if (m.sensor.width <= 0 || m.sensor.height <= 0) throw ValueError("manifest: sensor size must be positive");
    if (!(m.frame_rate > 0.0)) throw ValueError("manifest: frame_rate must be positive");
    for (std::size_t i = 1; i < m.frames.size(); ++i) {
        if (m.frames[i].t <= m.frames[i - 1].t) {
            throw ValueError("manifest: frame timestamps must be strictly increasing");
        }
    }
    return m;
}

std::string write_manifest(const SequenceManifest& m) {
    nlohmann::ordered_json j;
    j["sensor_width"] = m.sensor.width;
    j["sensor_height"] = m.sensor.height;
    j["frame_rate"] = m.frame_rate;
    j["events"] = m.events_path;
    j["detections"] = m.detections_path;
    j["frames"] = nlohmann::ordered_json::array();
    for (const auto& f : m.frames) {
        nlohmann::ordered_json e;
        e["frame_index"] = f.frame_index;
        e["t_us"] = f.t;
        if (!f.image_path.empty()) e["image"] = f.image_path;
        j["frames"].push_back(e);
    }
    return j.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace evtrack
