#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rapd/classifier.hpp"
#include "rapd/image.hpp"
#include "rapd/localize.hpp"

namespace rapd::patch {

/// One scan tile: a patch_size x patch_size window at (x0, y0).
struct Tile {
    int x0{0};
    int y0{0};
    int size{0};

    Point2d center() const { return {x0 + size / 2.0, y0 + size / 2.0}; }
    /// Membership is half-open: x0 <= x < x0 + size (same for y).
    bool contains(Point2d p) const { return p.x >= x0 && p.x < x0 + size && p.y >= y0 && p.y < y0 + size; }
};

/// Tiles in raster order: origins at multiples of stride = size / 2, plus a
/// final tile flush with the right/bottom border when the extent is not
/// stride-divisible. Empty if the image is smaller than one tile.
std::vector<Tile> tile_grid(int width, int height, int patch_size);

struct PatchSample {
    GrayImage pixels;  // rescaled to the classifier input side
    Point2d center;    // tile center in source-frame pixels
    std::optional<bool> label;
    std::optional<double> confidence;
};

/// Tiles the frame, labels tiles that contain the pupil center as positive,
/// and subsamples (seeded) the larger class so both classes have equal count.
/// Output is in tile raster order.
std::vector<PatchSample> extract_labeled_patches(const GrayImage& img, Point2d pupil_center, int patch_size,
                                                 std::uint64_t balance_seed, int input_side = 50);

struct ScoredTile {
    Tile tile;
    double confidence{0.0};
};

/// Classifies every tile; stable sort by confidence (descending, raster
/// order on ties).
std::vector<ScoredTile> score_tiles(const ClassifierModel& model, const GrayImage& img, int patch_size);

/// Component-wise median (mean of the two middle values for even counts).
Point2d median_center(const std::vector<Point2d>& points);

/// Center = component-wise median of the top-5 tile centers; confidence =
/// mean of their confidences.
PupilFit patch_localize(const ClassifierModel& model, const GrayImage& img, int patch_size = 60);

}  // namespace rapd::patch
