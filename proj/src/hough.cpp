#include "rapd/hough.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rapd/errors.hpp"
#include "rapd/imgproc.hpp"

namespace rapd::hough {

namespace {

struct Prepared {
    imgproc::GradientField grad;
    std::vector<double> nms;
};

Prepared prepare(const GrayImage& img) {
    Prepared p{imgproc::canny_gradients(img), {}};
    p.nms = imgproc::suppress_non_maxima(p.grad);
    return p;
}

void check_image(const GrayImage& img, const HoughConfig& cfg) {
    cfg.validate();
    if (img.width() < 2.0 * cfg.r_min || img.height() < 2.0 * cfg.r_min) {
        throw ParameterError("image must be at least 2*r_min in each dimension");
    }
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// Best-voted circle at one Canny level, before any accumulator threshold.
std::optional<Circle> detect(const Prepared& p, const HoughConfig& cfg, double canny_thr) {
    const int w = p.grad.width;
    const int h = p.grad.height;
    const auto edges = imgproc::hysteresis(p.grad, p.nms, canny_thr / 2.0, canny_thr);
    const int r_lo = static_cast<int>(std::ceil(cfg.r_min));
    const int r_hi = static_cast<int>(std::floor(cfg.r_max));

    std::vector<int> acc(static_cast<std::size_t>(w) * h, 0);
    std::vector<Point2i> points;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!edges.at(x, y)) continue;
            points.push_back({x, y});
            const std::size_t i = p.grad.index(x, y);
            const double mag = p.grad.magnitude[i];
            if (mag <= 0.0) continue;
            const double ux = p.grad.gx[i] / mag;
            const double uy = p.grad.gy[i] / mag;
            for (int sign : {1, -1}) {
                long last = -1;
                for (int r = r_lo; r <= r_hi; ++r) {
                    const int cx = round_half_up(x + sign * r * ux);
                    const int cy = round_half_up(y + sign * r * uy);
                    if (cx < 0 || cy < 0 || cx >= w || cy >= h) continue;
                    const long idx = static_cast<long>(cy) * w + cx;
                    if (idx == last) continue;
                    ++acc[static_cast<std::size_t>(idx)];
                    last = idx;
                }
            }
        }
    }
    if (points.empty()) return std::nullopt;

    int best = 0, bx = -1, by = -1;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int s = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (xx >= 0 && yy >= 0 && xx < w && yy < h) s += acc[static_cast<std::size_t>(yy) * w + xx];
                }
            }
            if (s > best) {
                best = s;
                bx = x;
                by = y;
            }
        }
    }
    if (best == 0) return std::nullopt;

    double sx = 0.0, sy = 0.0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int xx = bx + dx, yy = by + dy;
            if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
            const double v = acc[static_cast<std::size_t>(yy) * w + xx];
            sx += v * xx;
            sy += v * yy;
        }
    }
    const Point2d center{sx / best, sy / best};

    std::map<int, int> hist;
    std::vector<double> dist;
    dist.reserve(points.size());
    for (const auto& pt : points) {
        const double d = std::hypot(pt.x - center.x, pt.y - center.y);
        dist.push_back(d);
        const int rd = round_half_up(d);
        if (rd >= cfg.r_min && rd <= cfg.r_max) ++hist[rd];
    }
    if (hist.empty()) return std::nullopt;
    int mode = hist.begin()->first, mode_count = 0;
    for (const auto& [r, n] : hist) {
        if (n > mode_count) {
            mode = r;
            mode_count = n;
        }
    }
    double sum = 0.0;
    int n = 0;
    for (double d : dist) {
        if (std::abs(d - mode) <= 1.0) {
            sum += d;
            ++n;
        }
    }
    const double radius = std::clamp(sum / n, cfg.r_min, cfg.r_max);
    return Circle{center, radius, best};
}

}  // namespace

void HoughConfig::validate() const {
    if (!(r_min > 0.0) || !(r_max > r_min)) throw ParameterError("hough radius range must satisfy 0 < r_min < r_max");
    if (!(canny_step > 0.0) || acc_step <= 0) throw ParameterError("hough sweep steps must be positive");
    if (!(canny_max > 0.0) || canny_max > 255.0) throw ParameterError("canny_max must lie in (0, 255]");
    if (acc_min < 1 || acc_max < acc_min) throw ParameterError("accumulator sweep must satisfy 1 <= acc_min <= acc_max");
}

std::optional<Circle> hough_circle(const GrayImage& img, const HoughConfig& cfg, double canny_thr, int acc_thr) {
    check_image(img, cfg);
    if (!(canny_thr >= 0.0) || canny_thr > 255.0) throw ParameterError("canny threshold must lie in [0, 255]");
    const auto c = detect(prepare(img), cfg, canny_thr);
    if (!c || c->votes < acc_thr) return std::nullopt;
    return c;
}

SweepResult auto_hough_sweep(const GrayImage& img, const HoughConfig& cfg) {
    check_image(img, cfg);
    const Prepared p = prepare(img);
    const double floor_thr = imgproc::image_mean(img);
    std::vector<double> levels;
    for (double c = cfg.canny_max; c >= floor_thr; c -= cfg.canny_step) levels.push_back(c);

    // Best candidate per Canny level, computed at most once.
    std::vector<std::optional<std::optional<Circle>>> cache(levels.size());
    for (int acc = cfg.acc_max; acc >= cfg.acc_min; acc -= cfg.acc_step) {
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (!cache[i]) cache[i] = detect(p, cfg, levels[i]);
            const auto& c = *cache[i];
            if (c && c->votes >= acc) return SweepResult{*c, levels[i], acc};
        }
    }
    throw MeasurementFailed("hough sweep exhausted without a circle");
}

Circle auto_hough(const GrayImage& img, const HoughConfig& cfg) { return auto_hough_sweep(img, cfg).circle; }

}  // namespace rapd::hough
