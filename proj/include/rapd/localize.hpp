#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rapd/geometry.hpp"
#include "rapd/image.hpp"
#include "rapd/imgproc.hpp"

namespace rapd {

enum class LocalizerKind { Starburst, ExCuSe, ElSe, Patch };

std::string to_string(LocalizerKind kind);
LocalizerKind parse_localizer(const std::string& name);

/// Per-frame pupil estimate. The center lies inside the frame it came from
/// and confidence is in [0, 1].
struct PupilFit {
    Point2d center;
    std::optional<double> radius;
    double confidence{0.0};
    LocalizerKind method{LocalizerKind::Starburst};
};

using Localizer = std::function<PupilFit(const GrayImage&)>;

}  // namespace rapd

namespace rapd::localize {

struct StarburstConfig {
    int rays{36};
    double gradient_threshold{20.0};  // intensity step per pixel along the ray
    double epsilon{0.5};              // convergence displacement, px
    int max_iters{20};
    double blur_sigma{1.0};
};

/// Fixed constants of the staged ExCuSe reimplementation.
struct ExcuseConfig {
    double straight_deviation{2.0};  // px; chains flatter than this are lines
    double min_bbox_area{25.0};      // px^2
    double darkness_tolerance{10.0};  // intensity units; ties broken by length
    double inlier_residual{2.0};     // px
    StarburstConfig rays{};
};

struct ElseConfig {
    double min_axis_ratio{0.2};
    double min_radius{5.0};
    double max_radius{30.0};
    int min_chain{5};
};

/// Ordered chain of 8-connected edge pixels.
struct CurveSegment {
    std::vector<Point2i> points;
    std::size_t length() const { return points.size(); }
};

/// Diagnostic trace of a Starburst run.
struct StarburstRun {
    PupilFit fit;
    int iterations{0};
    std::vector<Point2d> centers;   // center used for each iteration's ray cast
    std::vector<Point2d> features;  // final feature-point set
};

StarburstRun starburst_run(const GrayImage& img, const StarburstConfig& cfg = {});
PupilFit starburst_localize(const GrayImage& img, const StarburstConfig& cfg = {});
PupilFit excuse_localize(const GrayImage& img, const ExcuseConfig& cfg = {});
PupilFit else_localize(const GrayImage& img, const ElseConfig& cfg = {});

/// Traces edge pixels into ordered chains. Redundant staircase corners are
/// thinned first; pixels with more than two edge neighbours are junctions
/// and split the chains; chains shorter than min_length are dropped.
std::vector<CurveSegment> extract_curved_segments(const imgproc::EdgeMap& edges, int min_length = 5);

/// Canny front end shared by ExCuSe and ElSe: high threshold = mean + 1 std
/// of the gradient magnitude, low = high / 2.
imgproc::EdgeMap adaptive_canny(const GrayImage& img);

/// First feature point along each of `rays` equally spaced rays from
/// `origin`: the first step whose intensity increase exceeds `threshold`.
std::vector<std::optional<Point2d>> cast_rays(const Plane& smooth, Point2d origin, int rays, double threshold);

}  // namespace rapd::localize
