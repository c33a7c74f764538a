#include "rapd/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rapd/errors.hpp"

namespace rapd::imgproc {

namespace {

std::uint8_t to_u8(double v) {
    // round half up
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

GrayImage to_gray(const Plane& p) {
    std::vector<std::uint8_t> out(p.values.size());
    std::transform(p.values.begin(), p.values.end(), out.begin(), to_u8);
    return GrayImage(p.width, p.height, std::move(out));
}

template <typename Select>
GrayImage rank_filter(const GrayImage& img, int radius, Select pick) {
    const int w = img.width();
    const int h = img.height();
    GrayImage horiz(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = img.clamped(x - radius, y);
            for (int k = -radius + 1; k <= radius; ++k) v = pick(v, img.clamped(x + k, y));
            horiz.at(x, y) = v;
        }
    }
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = horiz.clamped(x, y - radius);
            for (int k = -radius + 1; k <= radius; ++k) v = pick(v, horiz.clamped(x, y + k));
            out.at(x, y) = v;
        }
    }
    return out;
}

}  // namespace

std::size_t EdgeMap::count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw ParameterError("gaussian sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    const double sum = std::accumulate(k.begin(), k.end(), 0.0);
    for (auto& v : k) v /= sum;
    return k;
}

Plane gaussian_blur(const Plane& plane, double sigma) {
    const auto k = gaussian_kernel(sigma);
    const int r = static_cast<int>(k.size() / 2);
    Plane tmp(plane.width, plane.height);
    for (int y = 0; y < plane.height; ++y) {
        for (int x = 0; x < plane.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * plane.clamped(x + i, y);
            tmp.at(x, y) = acc;
        }
    }
    Plane out(plane.width, plane.height);
    for (int y = 0; y < plane.height; ++y) {
        for (int x = 0; x < plane.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.clamped(x, y + i);
            out.at(x, y) = acc;
        }
    }
    return out;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    return to_gray(gaussian_blur(Plane::from(img), sigma));
}

GradientField sobel_gradients(const Plane& p) {
    if (p.width < 3 || p.height < 3) throw ParameterError("sobel_gradients requires an image of at least 3x3");
    GradientField g;
    g.width = p.width;
    g.height = p.height;
    const std::size_t n = p.values.size();
    g.gx.resize(n);
    g.gy.resize(n);
    g.magnitude.resize(n);
    for (int y = 0; y < p.height; ++y) {
        for (int x = 0; x < p.width; ++x) {
            const double tl = p.clamped(x - 1, y - 1), tc = p.clamped(x, y - 1), tr = p.clamped(x + 1, y - 1);
            const double ml = p.clamped(x - 1, y), mr = p.clamped(x + 1, y);
            const double bl = p.clamped(x - 1, y + 1), bc = p.clamped(x, y + 1), br = p.clamped(x + 1, y + 1);
            const double gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
            const double gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
            const auto i = g.index(x, y);
            g.gx[i] = gx;
            g.gy[i] = gy;
            g.magnitude[i] = std::sqrt(gx * gx + gy * gy);
        }
    }
    return g;
}

GradientField sobel_gradients(const GrayImage& img) { return sobel_gradients(Plane::from(img)); }

GradientField canny_gradients(const GrayImage& img, const CannyOptions& opts) {
    Plane p = Plane::from(img);
    if (opts.sigma > 0.0) p = gaussian_blur(p, opts.sigma);
    return sobel_gradients(p);
}

std::vector<double> suppress_non_maxima(const GradientField& g) {
    constexpr double kTan22 = 0.41421356237309503;  // tan(22.5 deg)
    constexpr double kTan67 = 2.414213562373095;    // tan(67.5 deg)
    const int w = g.width;
    const int h = g.height;
    std::vector<double> out(g.magnitude.size(), 0.0);
    // Neighbours outside the image count as zero magnitude.
    auto mag = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
        return g.magnitude[g.index(x, y)];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto i = g.index(x, y);
            const double m = g.magnitude[i];
            if (m <= 0.0) continue;
            const double ax = std::abs(g.gx[i]);
            const double ay = std::abs(g.gy[i]);
            int dx = 0, dy = 0;
            if (ay <= kTan22 * ax) {
                dx = 1;
            } else if (ay > kTan67 * ax) {
                dy = 1;
            } else {
                dx = 1;
                dy = (g.gx[i] * g.gy[i] > 0.0) ? 1 : -1;
            }
            if (m > mag(x - dx, y - dy) && m >= mag(x + dx, y + dy)) out[i] = m;
        }
    }
    return out;
}

EdgeMap hysteresis(const GradientField& g, const std::vector<double>& nms, double low_thr, double high_thr) {
    const int w = g.width;
    const int h = g.height;
    EdgeMap edges(w, h);
    std::vector<int> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto i = g.index(x, y);
            if (nms[i] <= 0.0 || nms[i] < high_thr || edges.bits[i]) continue;
            edges.bits[i] = 1;
            stack.push_back(static_cast<int>(i));
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                const int cx = cur % w;
                const int cy = cur / w;
                for (int ny = cy - 1; ny <= cy + 1; ++ny) {
                    for (int nx = cx - 1; nx <= cx + 1; ++nx) {
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const auto j = g.index(nx, ny);
                        if (edges.bits[j] || nms[j] <= 0.0 || nms[j] < low_thr) continue;
                        edges.bits[j] = 1;
                        stack.push_back(static_cast<int>(j));
                    }
                }
            }
        }
    }
    return edges;
}

EdgeMap canny_from_gradients(const GradientField& grad, double low_thr, double high_thr) {
    if (!(low_thr >= 0.0 && low_thr <= high_thr && high_thr <= 255.0)) {
        throw ParameterError("canny thresholds must satisfy 0 <= low <= high <= 255");
    }
    return hysteresis(grad, suppress_non_maxima(grad), low_thr, high_thr);
}

EdgeMap canny(const GrayImage& img, double low_thr, double high_thr, const CannyOptions& opts) {
    if (!(low_thr >= 0.0 && low_thr <= high_thr && high_thr <= 255.0)) {
        throw ParameterError("canny thresholds must satisfy 0 <= low <= high <= 255");
    }
    return canny_from_gradients(canny_gradients(img, opts), low_thr, high_thr);
}

GrayImage normalize_intensity(const GrayImage& img) {
    const auto px = img.pixels();
    const auto [lo_it, hi_it] = std::minmax_element(px.begin(), px.end());
    const int lo = *lo_it;
    const int hi = *hi_it;
    if (lo == hi) return img;
    GrayImage out(img.width(), img.height());
    auto dst = out.pixels();
    const double range = hi - lo;
    for (std::size_t i = 0; i < px.size(); ++i) dst[i] = to_u8((px[i] - lo) * 255.0 / range);
    return out;
}

GrayImage erode(const GrayImage& img, int radius) {
    if (radius < 1) throw ParameterError("morphology radius must be >= 1");
    return rank_filter(img, radius, [](std::uint8_t a, std::uint8_t b) { return std::min(a, b); });
}

GrayImage dilate(const GrayImage& img, int radius) {
    if (radius < 1) throw ParameterError("morphology radius must be >= 1");
    return rank_filter(img, radius, [](std::uint8_t a, std::uint8_t b) { return std::max(a, b); });
}

GrayImage morph(const GrayImage& img, MorphKind kind, int radius) {
    if (kind == MorphKind::Open) return dilate(erode(img, radius), radius);
    return erode(dilate(img, radius), radius);
}

CropWindow crop_window(int img_width, int img_height, Point2d center, int width, int height) {
    if (width < 1 || height < 1) throw ParameterError("crop size must be at least 1x1");
    auto axis = [](int extent, double c, int size, int& origin, int& len) {
        if (size >= extent) {
            origin = 0;
            len = extent;
            return;
        }
        const long o = std::lround(c - size / 2.0);
        origin = static_cast<int>(std::clamp<long>(o, 0, extent - size));
        len = size;
    };
    CropWindow win;
    axis(img_width, center.x, width, win.x0, win.width);
    axis(img_height, center.y, height, win.y0, win.height);
    return win;
}

GrayImage crop(const GrayImage& img, const CropWindow& win) {
    GrayImage out(win.width, win.height);
    for (int y = 0; y < win.height; ++y) {
        for (int x = 0; x < win.width; ++x) out.at(x, y) = img.at(win.x0 + x, win.y0 + y);
    }
    return out;
}

GrayImage crop_patch(const GrayImage& img, Point2d center, int width, int height) {
    return crop(img, crop_window(img.width(), img.height(), center, width, height));
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
    if (width < 1 || height < 1) throw ParameterError("resize target must be at least 1x1");
    if (width == img.width() && height == img.height()) return img;
    const Plane src = Plane::from(img);
    auto coord = [](int i, int dst, int srcext) {
        if (dst == 1) return (srcext - 1) / 2.0;
        return static_cast<double>(i) * (srcext - 1) / (dst - 1);
    };
    GrayImage out(width, height);
    for (int y = 0; y < height; ++y) {
        const double sy = coord(y, height, img.height());
        for (int x = 0; x < width; ++x) out.at(x, y) = to_u8(src.sample(coord(x, width, img.width()), sy));
    }
    return out;
}

GrayImage downsample_box(const GrayImage& img, int factor) {
    if (factor < 1) throw ParameterError("downsample factor must be >= 1");
    if (factor == 1) return img;
    const int w = img.width() / factor;
    const int h = img.height() / factor;
    if (w < 1 || h < 1) throw ParameterError("image too small for downsample factor");
    GrayImage out(w, h);
    const double area = static_cast<double>(factor) * factor;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = 0; j < factor; ++j)
                for (int i = 0; i < factor; ++i) acc += img.at(x * factor + i, y * factor + j);
            out.at(x, y) = to_u8(acc / area);
        }
    }
    return out;
}

double image_mean(const GrayImage& img) {
    const auto px = img.pixels();
    const double sum = std::accumulate(px.begin(), px.end(), 0.0);
    return sum / static_cast<double>(px.size());
}

}  // namespace rapd::imgproc
