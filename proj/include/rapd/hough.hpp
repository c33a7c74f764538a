#pragma once

#include <optional>

#include "rapd/image.hpp"

namespace rapd::hough {

/// Single detected circle. Center is in the coordinates of the queried image.
struct Circle {
    Point2d center;
    double radius{0.0};
    int votes{0};
};

struct HoughConfig {
    double r_min{5.0};
    double r_max{30.0};
    double canny_max{255.0};
    double canny_step{10.0};
    int acc_max{100};
    int acc_min{10};
    int acc_step{5};

    /// Throws ParameterError on a non-positive step or an empty radius range.
    void validate() const;
};

/// Hough gradient method at fixed thresholds. Canny uses high = canny_thr and
/// low = canny_thr / 2. Every edge pixel votes along its gradient line, in
/// both directions, for centers at distances r_min..r_max. A candidate's vote
/// count is the accumulator sum over its 3x3 neighbourhood. The best-voted
/// cell is refined to the vote-weighted centroid of that neighbourhood, and
/// the radius is the mode of the rounded edge-to-center distances, refined
/// to the mean distance of the edge points within 1 px of the mode.
std::optional<Circle> hough_circle(const GrayImage& img, const HoughConfig& cfg, double canny_thr, int acc_thr);

/// Threshold sweep: accumulator threshold from acc_max down to acc_min (outer
/// loop), Canny threshold from canny_max down to the image mean (inner loop).
/// Returns the first detection; throws MeasurementFailed when the sweep is
/// exhausted.
Circle auto_hough(const GrayImage& img, const HoughConfig& cfg = {});

/// Same as auto_hough, also reporting the thresholds of the successful step.
struct SweepResult {
    Circle circle;
    double canny_thr{0.0};
    int acc_thr{0};
};
SweepResult auto_hough_sweep(const GrayImage& img, const HoughConfig& cfg = {});

}  // namespace rapd::hough
