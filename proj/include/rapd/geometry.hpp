#pragma once

#include <span>
#include <vector>

#include "rapd/image.hpp"

namespace rapd::geometry {

/// Canonical ellipse: a >= b > 0, rotation of the major axis in [0, pi).
struct Ellipse {
    Point2d center;
    double a{0.0};
    double b{0.0};
    double rotation{0.0};

    double axis_ratio() const { return b / a; }
    double mean_radius() const;  // geometric mean of the semi-axes
    bool contains(Point2d p) const;
    /// Approximate geometric distance of p to the curve, measured along the
    /// ray from the center. Exact for circles.
    double radial_residual(Point2d p) const;
};

/// Direct least-squares conic fit constrained to ellipses (numerically
/// stable Halir-Flusser formulation on centred, scaled coordinates).
/// Throws FitFailed for fewer than 5 points or degenerate configurations.
Ellipse fit_ellipse_lsq(std::span<const Point2d> points);

/// Convex hull in counter-clockwise order (Andrew's monotone chain).
std::vector<Point2d> convex_hull(std::vector<Point2d> points);
bool polygon_contains(std::span<const Point2d> hull, Point2d p);

/// Largest distance of any point to the chord through the first and last
/// point (to the first point when both ends coincide).
double max_chord_deviation(std::span<const Point2d> points);

}  // namespace rapd::geometry
