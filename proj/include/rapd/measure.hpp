#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rapd/hough.hpp"
#include "rapd/localize.hpp"

namespace rapd::measure {

enum class CropMode { HalfImage, Fixed60 };

std::string to_string(CropMode mode);
CropMode parse_crop(const std::string& name);

struct FrameMeasurement {
    int frame_index{0};
    Point2d center;  // working-resolution frame coordinates
    std::optional<double> radius;
    int votes{0};
    std::string status;  // "ok" or the failure reason
};

struct MeasuredTrace {
    std::vector<FrameMeasurement> frames;
    std::vector<double> radii;  // gap-filled, one per frame
    int failures{0};
    int downsample{1};
};

/// HD inputs (width >= 1280) are box-downsampled by 4, smaller frames are
/// used as they are.
int auto_downsample_factor(const GrayImage& frame);

/// Per frame: downsample, localize, crop around the estimate, auto_hough.
/// Failed frames are filled from the nearest measured frame (the earlier one
/// on ties). More than half failed throws TraceUnusable.
MeasuredTrace measure_sequence(const std::vector<GrayImage>& frames, const Localizer& localizer, CropMode crop,
                               const hough::HoughConfig& cfg = {}, int downsample = 0);

/// Fills gaps in place from the nearest valid neighbour.
std::vector<double> fill_gaps(const std::vector<std::optional<double>>& values);

std::string measurements_csv(const MeasuredTrace& trace);

}  // namespace rapd::measure
