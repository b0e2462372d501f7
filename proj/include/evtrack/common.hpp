#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace evtrack {

using Micros = std::int64_t;

// One asynchronous brightness change from a dynamic vision sensor.
struct Event {
    Micros t{0};
    std::int32_t x{0};
    std::int32_t y{0};
    std::int8_t p{1};  // -1 or +1

    friend bool operator==(const Event&, const Event&) = default;
};

// Axis-aligned box in continuous pixel coordinates.
struct BBox {
    double left{0.0};
    double top{0.0};
    double width{0.0};
    double height{0.0};

    double right() const { return left + width; }
    double bottom() const { return top + height; }
    double center_x() const { return left + width / 2.0; }
    double center_y() const { return top + height / 2.0; }
    double area() const { return width * height; }

    friend bool operator==(const BBox&, const BBox&) = default;
};

// Integer pixel rectangle; covers columns [left, left+width) and rows [top, top+height).
struct PixelRect {
    int left{0};
    int top{0};
    int width{0};
    int height{0};

    int right() const { return left + width; }
    int bottom() const { return top + height; }
    long area() const { return static_cast<long>(width) * height; }
    bool empty() const { return width <= 0 || height <= 0; }
    bool contains(int x, int y) const {
        return x >= left && x < left + width && y >= top && y < top + height;
    }
    bool contains(const PixelRect& o) const {
        return o.left >= left && o.top >= top && o.right() <= right() && o.bottom() <= bottom();
    }
    BBox to_bbox() const { return {double(left), double(top), double(width), double(height)}; }

    friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

struct SensorSize {
    int width{240};
    int height{180};

    PixelRect rect() const { return {0, 0, width, height}; }
};

// Row-major 8-bit grayscale image.
struct GrayImage {
    int width{0};
    int height{0};
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

struct Point2 {
    double x{0.0};
    double y{0.0};
};

// Scalar series sampled at strictly increasing times (seconds). NaN values mark gaps.
struct Sample {
    double t{0.0};
    double value{0.0};
};

struct TimeSeries {
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

// Error hierarchy. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class OrderError : public ParseError {
public:
    using ParseError::ParseError;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ValueError : public Error {
public:
    using Error::Error;
};

class EmptyMaskError : public ValueError {
public:
    using ValueError::ValueError;
};

class SizeError : public ValueError {
public:
    using ValueError::ValueError;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace evtrack
