#include "rapd/patch.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "rapd/errors.hpp"
#include "rapd/imgproc.hpp"

namespace rapd::patch {

namespace {

std::vector<int> origins(int extent, int size) {
    std::vector<int> out;
    if (size < 1 || extent < size) return out;
    const int stride = std::max(1, size / 2);
    for (int o = 0; o + size <= extent; o += stride) out.push_back(o);
    if (out.back() + size < extent) out.push_back(extent - size);
    return out;
}

GrayImage tile_pixels(const GrayImage& img, const Tile& t, int input_side) {
    const GrayImage raw = imgproc::crop(img, imgproc::CropWindow{t.x0, t.y0, t.size, t.size});
    return imgproc::resize_bilinear(raw, input_side, input_side);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<Tile> tile_grid(int width, int height, int patch_size) {
    if (patch_size < 1) throw ParameterError("patch size must be >= 1");
    std::vector<Tile> tiles;
    const auto xs = origins(width, patch_size);
    const auto ys = origins(height, patch_size);
    for (int y : ys) {
        for (int x : xs) tiles.push_back(Tile{x, y, patch_size});
    }
    return tiles;
}

std::vector<PatchSample> extract_labeled_patches(const GrayImage& img, Point2d pupil_center, int patch_size,
                                                 std::uint64_t balance_seed, int input_side) {
    if (patch_size < 16) throw ParameterError("patch size must be >= 16");
    if (!img.contains(pupil_center.x, pupil_center.y)) throw ParameterError("pupil center lies outside the frame");
    const auto tiles = tile_grid(img.width(), img.height(), patch_size);
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < tiles.size(); ++i) (tiles[i].contains(pupil_center) ? pos : neg).push_back(i);

    if (pos.empty()) throw ExtractionError("no tile contains the pupil center");

    std::mt19937_64 rng(balance_seed);
    auto& larger = pos.size() > neg.size() ? pos : neg;
    const std::size_t keep = std::min(pos.size(), neg.size());
    std::shuffle(larger.begin(), larger.end(), rng);
    larger.resize(keep);

    std::vector<std::size_t> chosen(pos);
    chosen.insert(chosen.end(), neg.begin(), neg.end());
    std::sort(chosen.begin(), chosen.end());

    std::vector<PatchSample> out;
    out.reserve(chosen.size());
    for (std::size_t i : chosen) {
        const Tile& t = tiles[i];
        out.push_back(PatchSample{tile_pixels(img, t, input_side), t.center(), t.contains(pupil_center), std::nullopt});
    }
    return out;
}

Point2d median_center(const std::vector<Point2d>& points) {
    if (points.empty()) throw ParameterError("median of an empty point set");
    std::vector<double> xs, ys;
    for (const auto& p : points) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    return {median(std::move(xs)), median(std::move(ys))};
}

std::vector<ScoredTile> score_tiles(const ClassifierModel& model, const GrayImage& img, int patch_size) {
    std::vector<ScoredTile> out;
    for (const Tile& t : tile_grid(img.width(), img.height(), patch_size)) {
        out.push_back(ScoredTile{t, classify_patch(model, tile_pixels(img, t, model.input_side))});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ScoredTile& a, const ScoredTile& b) { return a.confidence > b.confidence; });
    return out;
}

PupilFit patch_localize(const ClassifierModel& model, const GrayImage& img, int patch_size) {
    const auto scored = score_tiles(model, img, patch_size);
    if (scored.empty()) throw LocalizationFailed("frame is smaller than one patch");
    const std::size_t k = std::min<std::size_t>(5, scored.size());
    std::vector<Point2d> centers;
    double conf = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        centers.push_back(scored[i].tile.center());
        conf += scored[i].confidence;
    }
    PupilFit fit;
    fit.center = median_center(centers);
    fit.confidence = conf / static_cast<double>(k);
    fit.method = LocalizerKind::Patch;
    return fit;
}

}  // namespace rapd::patch
