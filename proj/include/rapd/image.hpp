#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rapd {

struct Point2d {
    double x{0.0};
    double y{0.0};

    friend bool operator==(const Point2d&, const Point2d&) = default;
};

struct Point2i {
    int x{0};
    int y{0};

    friend bool operator==(const Point2i&, const Point2i&) = default;
};

/// 8-bit single-channel raster, row-major. Width and height are at least 1.
class GrayImage {
public:
    GrayImage(int width, int height, std::uint8_t fill = 0);
    GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }

    std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    std::uint8_t& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

    /// Edge-replicated read: coordinates are clamped into the image.
    std::uint8_t clamped(int x, int y) const;

    bool contains(double x, double y) const {
        return x >= 0.0 && y >= 0.0 && x <= width_ - 1 && y <= height_ - 1;
    }

    std::span<const std::uint8_t> pixels() const { return pixels_; }
    std::span<std::uint8_t> pixels() { return pixels_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

/// Floating-point plane used for intermediate arithmetic (smoothing,
/// gradients, accumulators). Same layout as GrayImage.
struct Plane {
    int width{0};
    int height{0};
    std::vector<double> values;

    Plane() = default;
    Plane(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    static Plane from(const GrayImage& img);

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double clamped(int x, int y) const;
    /// Bilinear sample; coordinates outside are clamped to the border.
    double sample(double x, double y) const;
};

}  // namespace rapd
