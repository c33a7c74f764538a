#include "rapd/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rapd/errors.hpp"

namespace rapd {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw ParameterError("GrayImage dimensions must be at least 1x1, got " + std::to_string(width) + "x" +
                             std::to_string(height));
    }
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1) {
        throw ParameterError("GrayImage dimensions must be at least 1x1");
    }
    if (pixels_.size() != static_cast<std::size_t>(width) * height) {
        throw ParameterError("GrayImage pixel count " + std::to_string(pixels_.size()) + " does not match " +
                             std::to_string(width) + "x" + std::to_string(height));
    }
}

std::uint8_t GrayImage::clamped(int x, int y) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return at(x, y);
}

Plane Plane::from(const GrayImage& img) {
    Plane p(img.width(), img.height());
    auto src = img.pixels();
    std::transform(src.begin(), src.end(), p.values.begin(), [](std::uint8_t v) { return static_cast<double>(v); });
    return p;
}

double Plane::clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
}

double Plane::sample(double x, double y) const {
    x = std::clamp(x, 0.0, static_cast<double>(width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, width - 1);
    const int y1 = std::min(y0 + 1, height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
    const double bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
    return top * (1.0 - fy) + bottom * fy;
}

}  // namespace rapd
