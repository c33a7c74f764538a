#pragma once

#include <string>
#include <vector>

#include "rapd/image.hpp"

namespace rapd::imgproc {

/// Per-pixel Sobel response. Kernels are the raw 3x3 Sobel pair (no
/// normalisation), so a 0->255 step yields |gx| = 1020 at the step.
struct GradientField {
    int width{0};
    int height{0};
    std::vector<double> gx;
    std::vector<double> gy;
    std::vector<double> magnitude;

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

struct EdgeMap {
    int width{0};
    int height{0};
    std::vector<std::uint8_t> bits;

    EdgeMap() = default;
    EdgeMap(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v = true) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    std::size_t count() const;
};

struct CannyOptions {
    double sigma{1.0};  // presmoothing; <= 0 disables it
};

enum class MorphKind { Open, Close };

/// Window of a crop in source coordinates.
struct CropWindow {
    int x0{0};
    int y0{0};
    int width{0};
    int height{0};
};

GrayImage gaussian_blur(const GrayImage& img, double sigma);
Plane gaussian_blur(const Plane& plane, double sigma);
std::vector<double> gaussian_kernel(double sigma);

GradientField sobel_gradients(const GrayImage& img);
GradientField sobel_gradients(const Plane& plane);

/// Gradient field Canny operates on: Sobel of the presmoothed image.
GradientField canny_gradients(const GrayImage& img, const CannyOptions& opts = {});

/// Non-maximum suppression (4 direction bins) followed by 8-connected
/// double-threshold hysteresis.
EdgeMap canny(const GrayImage& img, double low_thr, double high_thr, const CannyOptions& opts = {});
EdgeMap canny_from_gradients(const GradientField& grad, double low_thr, double high_thr);

/// Non-maximum-suppressed magnitude plane (zero where suppressed). Reusable
/// across several hysteresis thresholds.
std::vector<double> suppress_non_maxima(const GradientField& grad);
EdgeMap hysteresis(const GradientField& grad, const std::vector<double>& nms, double low_thr, double high_thr);

GrayImage normalize_intensity(const GrayImage& img);
GrayImage morph(const GrayImage& img, MorphKind kind, int radius);
GrayImage erode(const GrayImage& img, int radius);
GrayImage dilate(const GrayImage& img, int radius);

CropWindow crop_window(int img_width, int img_height, Point2d center, int width, int height);
GrayImage crop_patch(const GrayImage& img, Point2d center, int width, int height);
GrayImage crop(const GrayImage& img, const CropWindow& window);

GrayImage resize_bilinear(const GrayImage& img, int width, int height);
/// Box-filter downsampling by an integer factor (partial border blocks are dropped).
GrayImage downsample_box(const GrayImage& img, int factor);

double image_mean(const GrayImage& img);

// Binary PGM (P5, maxval 255).
GrayImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& img);
std::string encode_pgm(const GrayImage& img);
GrayImage decode_pgm(const std::string& bytes);

}  // namespace rapd::imgproc
