#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rapd/errors.hpp"
#include "rapd/localize.hpp"

namespace rapd {

std::string to_string(LocalizerKind kind) {
    switch (kind) {
        case LocalizerKind::Starburst: return "starburst";
        case LocalizerKind::ExCuSe: return "excuse";
        case LocalizerKind::ElSe: return "else";
        case LocalizerKind::Patch: return "patch";
    }
    return "unknown";
}

LocalizerKind parse_localizer(const std::string& name) {
    if (name == "starburst") return LocalizerKind::Starburst;
    if (name == "excuse") return LocalizerKind::ExCuSe;
    if (name == "else") return LocalizerKind::ElSe;
    if (name == "patch") return LocalizerKind::Patch;
    throw ParameterError("unknown localizer '" + name + "' (expected starburst|excuse|else|patch)");
}

}  // namespace rapd

namespace rapd::localize {

namespace {

constexpr std::array<Point2i, 8> kNeighbours{{{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

void require_size(const GrayImage& img, const char* who) {
    if (img.width() < 32 || img.height() < 32) {
        throw ParameterError(std::string(who) + " requires a frame of at least 32x32");
    }
}

Point2d mean_of(const std::vector<Point2d>& pts) {
    Point2d m;
    for (const auto& p : pts) {
        m.x += p.x;
        m.y += p.y;
    }
    m.x /= static_cast<double>(pts.size());
    m.y /= static_cast<double>(pts.size());
    return m;
}

std::vector<Point2d> to_points(const CurveSegment& seg) {
    std::vector<Point2d> out;
    out.reserve(seg.points.size());
    for (const auto& p : seg.points) out.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    return out;
}

bool adjacent(Point2i a, Point2i b) { return std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1 && !(a == b); }

// Mean intensity of the pixels inside the fitted ellipse; nullopt if none.
std::optional<double> ellipse_inner_mean(const GrayImage& img, const geometry::Ellipse& e) {
    const int x0 = std::max(0, static_cast<int>(std::floor(e.center.x - e.a)));
    const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(e.center.x + e.a)));
    const int y0 = std::max(0, static_cast<int>(std::floor(e.center.y - e.a)));
    const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(e.center.y + e.a)));
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (e.contains({static_cast<double>(x), static_cast<double>(y)})) {
                sum += img.at(x, y);
                ++n;
            }
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

std::optional<double> hull_mean(const GrayImage& img, const std::vector<Point2d>& hull) {
    if (hull.size() < 3) return std::nullopt;
    double minx = hull[0].x, maxx = hull[0].x, miny = hull[0].y, maxy = hull[0].y;
    for (const auto& p : hull) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = static_cast<int>(miny); y <= static_cast<int>(maxy); ++y) {
        for (int x = static_cast<int>(minx); x <= static_cast<int>(maxx); ++x) {
            if (geometry::polygon_contains(hull, {static_cast<double>(x), static_cast<double>(y)})) {
                sum += img.at(x, y);
                ++n;
            }
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

}  // namespace

std::vector<std::optional<Point2d>> cast_rays(const Plane& smooth, Point2d origin, int rays, double threshold) {
    std::vector<std::optional<Point2d>> out(static_cast<std::size_t>(rays));
    const double max_x = smooth.width - 1;
    const double max_y = smooth.height - 1;
    for (int k = 0; k < rays; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / rays;
        const double dx = std::cos(theta);
        const double dy = std::sin(theta);
        double prev = smooth.sample(origin.x, origin.y);
        for (int t = 1;; ++t) {
            const double x = origin.x + t * dx;
            const double y = origin.y + t * dy;
            if (x < 0.0 || y < 0.0 || x > max_x || y > max_y) break;
            const double cur = smooth.sample(x, y);
            if (cur - prev > threshold) {
                out[static_cast<std::size_t>(k)] = Point2d{origin.x + (t - 0.5) * dx, origin.y + (t - 0.5) * dy};
                break;
            }
            prev = cur;
        }
    }
    return out;
}

StarburstRun starburst_run(const GrayImage& img, const StarburstConfig& cfg) {
    require_size(img, "starburst");
    if (cfg.rays < 1 || cfg.max_iters < 1) throw ParameterError("starburst needs rays >= 1 and max_iters >= 1");
    const Plane smooth = cfg.blur_sigma > 0.0 ? imgproc::gaussian_blur(Plane::from(img), cfg.blur_sigma)
                                              : Plane::from(img);
    StarburstRun run;
    Point2d center{(img.width() - 1) / 2.0, (img.height() - 1) / 2.0};
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        std::vector<Point2d> feats;
        for (const auto& f : cast_rays(smooth, center, cfg.rays, cfg.gradient_threshold)) {
            if (f) feats.push_back(*f);
        }
        if (feats.empty()) break;
        run.centers.push_back(center);
        run.features = std::move(feats);
        run.iterations = iter;
        const Point2d next = mean_of(run.features);
        const double moved = std::hypot(next.x - center.x, next.y - center.y);
        center = next;
        if (moved < cfg.epsilon) break;
    }
    if (run.features.empty()) throw LocalizationFailed("starburst: no ray produced a feature point");
    run.fit.center = mean_of(run.features);
    run.fit.confidence = static_cast<double>(run.features.size()) / cfg.rays;
    run.fit.method = LocalizerKind::Starburst;
    return run;
}

PupilFit starburst_localize(const GrayImage& img, const StarburstConfig& cfg) { return starburst_run(img, cfg).fit; }

imgproc::EdgeMap adaptive_canny(const GrayImage& img) {
    const auto grad = imgproc::canny_gradients(img);
    const auto& m = grad.magnitude;
    const double mean = std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
    double var = 0.0;
    for (double v : m) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(m.size()));
    const double high = std::min(mean + sd, 255.0);
    return imgproc::canny_from_gradients(grad, high / 2.0, high);
}

std::vector<CurveSegment> extract_curved_segments(const imgproc::EdgeMap& edges, int min_length) {
    const int w = edges.width;
    const int h = edges.height;
    std::vector<std::uint8_t> on(edges.bits);
    auto is_on = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && on[static_cast<std::size_t>(y) * w + x]; };
    auto neighbours = [&](int x, int y) {
        std::vector<Point2i> nb;
        for (const auto& d : kNeighbours) {
            if (is_on(x + d.x, y + d.y)) nb.push_back({x + d.x, y + d.y});
        }
        return nb;
    };

    // Ring of the 8 neighbours in clockwise order starting north.
    constexpr std::array<Point2i, 8> ring{{{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};
    auto crossings = [&](int x, int y) {
        int n = 0;
        for (std::size_t k = 0; k < ring.size(); ++k) {
            const auto& a = ring[k];
            const auto& b = ring[(k + 1) % ring.size()];
            if (!is_on(x + a.x, y + a.y) && is_on(x + b.x, y + b.y)) ++n;
        }
        return n;
    };

    // Zhang-Suen thinning.
    for (bool changed = true; changed;) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            std::vector<std::size_t> drop;
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (!is_on(x, y)) continue;
                    const auto count = neighbours(x, y).size();
                    if (count < 2 || count > 6 || crossings(x, y) != 1) continue;
                    const bool n = is_on(x, y - 1), e = is_on(x + 1, y), s = is_on(x, y + 1), wv = is_on(x - 1, y);
                    const bool keep = pass == 0 ? (n && e && s) || (e && s && wv) : (n && e && wv) || (n && s && wv);
                    if (!keep) drop.push_back(static_cast<std::size_t>(y) * w + x);
                }
            }
            for (auto i : drop) on[i] = 0;
            changed = changed || !drop.empty();
        }
    }

    // Drop staircase corners whose only two neighbours already touch each other.
    for (bool changed = true; changed;) {
        changed = false;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!is_on(x, y)) continue;
                const auto nb = neighbours(x, y);
                if (nb.size() == 2 && adjacent(nb[0], nb[1])) {
                    on[static_cast<std::size_t>(y) * w + x] = 0;
                    changed = true;
                }
            }
        }
    }

    // Split at junctions (three or more branches), clearing their neighbourhood.
    std::vector<Point2i> junctions;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (is_on(x, y) && crossings(x, y) >= 3) junctions.push_back({x, y});
        }
    }
    for (const auto& j : junctions) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (is_on(j.x + dx, j.y + dy)) on[static_cast<std::size_t>(j.y + dy) * w + j.x + dx] = 0;
            }
        }
    }

    std::vector<std::uint8_t> visited(on.size(), 0);
    std::vector<CurveSegment> out;
    auto trace = [&](Point2i start) {
        CurveSegment seg;
        Point2i cur = start;
        for (;;) {
            visited[static_cast<std::size_t>(cur.y) * w + cur.x] = 1;
            seg.points.push_back(cur);
            std::optional<Point2i> next;
            for (const auto& n : neighbours(cur.x, cur.y)) {
                if (visited[static_cast<std::size_t>(n.y) * w + n.x]) continue;
                const bool straight = n.x == cur.x || n.y == cur.y;
                if (!next || (straight && next->x != cur.x && next->y != cur.y)) next = n;
            }
            if (!next) break;
            cur = *next;
        }
        if (static_cast<int>(seg.length()) >= min_length) out.push_back(std::move(seg));
    };
    // Open chains from their endpoints first, then closed loops.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (is_on(x, y) && !visited[static_cast<std::size_t>(y) * w + x] && neighbours(x, y).size() <= 1) {
                trace({x, y});
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (is_on(x, y) && !visited[static_cast<std::size_t>(y) * w + x]) trace({x, y});
        }
    }
    return out;
}

PupilFit excuse_localize(const GrayImage& img, const ExcuseConfig& cfg) {
    require_size(img, "excuse");
    const auto segments = extract_curved_segments(adaptive_canny(img));

    struct Candidate {
        std::size_t index;
        double darkness;
        std::size_t length;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto pts = to_points(segments[i]);
        if (geometry::max_chord_deviation(pts) < cfg.straight_deviation) continue;
        int minx = segments[i].points[0].x, maxx = minx, miny = segments[i].points[0].y, maxy = miny;
        for (const auto& p : segments[i].points) {
            minx = std::min(minx, p.x);
            maxx = std::max(maxx, p.x);
            miny = std::min(miny, p.y);
            maxy = std::max(maxy, p.y);
        }
        if (static_cast<double>(maxx - minx + 1) * (maxy - miny + 1) < cfg.min_bbox_area) continue;
        const auto mean = hull_mean(img, geometry::convex_hull(pts));
        if (!mean) continue;
        candidates.push_back({i, *mean, segments[i].length()});
    }
    if (candidates.empty()) throw LocalizationFailed("excuse: no curved segment survived filtering");

    double darkest = candidates[0].darkness;
    for (const auto& c : candidates) darkest = std::min(darkest, c.darkness);
    const Candidate* chosen = nullptr;
    for (const auto& c : candidates) {
        if (c.darkness > darkest + cfg.darkness_tolerance) continue;
        if (!chosen || c.length > chosen->length) chosen = &c;
    }

    const auto curve = to_points(segments[chosen->index]);
    const Plane smooth = imgproc::gaussian_blur(Plane::from(img), cfg.rays.blur_sigma);
    std::vector<Point2d> ray_hits;
    for (const auto& f : cast_rays(smooth, mean_of(curve), cfg.rays.rays, cfg.rays.gradient_threshold)) {
        if (f) ray_hits.push_back(*f);
    }

    std::optional<geometry::Ellipse> ellipse;
    try {
        const auto initial = geometry::fit_ellipse_lsq(curve);
        std::vector<Point2d> support = curve;
        for (const auto& p : ray_hits) {
            if (initial.radial_residual(p) < cfg.inlier_residual) support.push_back(p);
        }
        ellipse = support.size() > curve.size() ? geometry::fit_ellipse_lsq(support) : initial;
    } catch (const FitFailed&) {
        if (ray_hits.size() >= 5) {
            try {
                ellipse = geometry::fit_ellipse_lsq(ray_hits);
            } catch (const FitFailed&) {
            }
        }
    }
    if (!ellipse) throw LocalizationFailed("excuse: ellipse fit failed on the selected curve");
    if (!img.contains(ellipse->center.x, ellipse->center.y)) {
        throw LocalizationFailed("excuse: fitted center lies outside the frame");
    }

    std::size_t inliers = 0;
    for (const auto& p : curve) inliers += ellipse->radial_residual(p) < cfg.inlier_residual ? 1 : 0;
    for (const auto& p : ray_hits) inliers += ellipse->radial_residual(p) < cfg.inlier_residual ? 1 : 0;

    PupilFit fit;
    fit.center = ellipse->center;
    fit.radius = ellipse->mean_radius();
    fit.confidence = static_cast<double>(inliers) / static_cast<double>(curve.size() + ray_hits.size());
    fit.method = LocalizerKind::ExCuSe;
    return fit;
}

PupilFit else_localize(const GrayImage& img, const ElseConfig& cfg) {
    require_size(img, "else");
    const auto segments = extract_curved_segments(adaptive_canny(img), cfg.min_chain);

    std::optional<geometry::Ellipse> best;
    double best_score = -1.0;
    for (const auto& seg : segments) {
        geometry::Ellipse e;
        try {
            e = geometry::fit_ellipse_lsq(to_points(seg));
        } catch (const FitFailed&) {
            continue;
        }
        const double r = e.mean_radius();
        if (e.axis_ratio() < cfg.min_axis_ratio || r < cfg.min_radius || r > cfg.max_radius) continue;
        if (!img.contains(e.center.x, e.center.y)) continue;
        const auto inner = ellipse_inner_mean(img, e);
        if (!inner) continue;
        const double score = (1.0 - *inner / 255.0) * e.axis_ratio();
        if (score > best_score) {
            best_score = score;
            best = e;
        }
    }
    if (!best) throw LocalizationFailed("else: no ellipse candidate survived evaluation");

    PupilFit fit;
    fit.center = best->center;
    fit.radius = best->mean_radius();
    fit.confidence = std::clamp(best_score, 0.0, 1.0);
    fit.method = LocalizerKind::ElSe;
    return fit;
}

}  // namespace rapd::localize
