#include <gtest/gtest.h>

#include <random>

#include "rapd/errors.hpp"
#include "rapd/patch.hpp"
#include "test_support.hpp"

namespace rapd {
namespace {

using namespace patch;

// Independent enumeration of tile origins along one axis.
std::vector<int> axis_origins(int extent, int size) {
    std::vector<int> o;
    for (int v = 0; v + size <= extent; v += size / 2) o.push_back(v);
    if (!o.empty() && o.back() != extent - size) o.push_back(extent - size);
    return o;
}

int positives_oracle(int w, int h, int size, Point2d c) {
    int n = 0;
    for (int y0 : axis_origins(h, size))
        for (int x0 : axis_origins(w, size))
            n += (c.x >= x0 && c.x < x0 + size && c.y >= y0 && c.y < y0 + size) ? 1 : 0;
    return n;
}

TEST(TileGrid, RasterOrderWithFlushFinalTile) {
    const auto tiles = tile_grid(160, 120, 60);
    ASSERT_EQ(tiles.size(), 15u);
    const int xs[] = {0, 30, 60, 90, 100};
    const int ys[] = {0, 30, 60};
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 5; ++i) {
            EXPECT_EQ(tiles[j * 5 + i].x0, xs[i]);
            EXPECT_EQ(tiles[j * 5 + i].y0, ys[j]);
        }
    EXPECT_EQ(tile_grid(100, 100, 50).size(), 9u);
    EXPECT_TRUE(tile_grid(40, 40, 50).empty());
}

TEST(Extraction, CenteredPupilGivesFourPositives) {
    const auto img = testing::random_image(100, 100, 1);
    const auto samples = extract_labeled_patches(img, {50, 50}, 50, 0);
    ASSERT_EQ(samples.size(), 8u);
    int pos = 0;
    for (const auto& s : samples) pos += *s.label ? 1 : 0;
    EXPECT_EQ(pos, 4);
    EXPECT_EQ(positives_oracle(100, 100, 50, {50, 50}), 4);
}

TEST(Extraction, CornerPupilGivesOnePositive) {
    const auto samples = extract_labeled_patches(testing::random_image(100, 100, 2), {0, 0}, 50, 0);
    ASSERT_EQ(samples.size(), 2u);
    EXPECT_NE(*samples[0].label, *samples[1].label);
}

TEST(Extraction, BalancedAndMatchesOracleForRandomCenters) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0, 159), uy(0, 119);
    const auto img = testing::random_image(160, 120, 4);
    for (int t = 0; t < 50; ++t) {
        const Point2d c{ux(rng), uy(rng)};
        const auto samples = extract_labeled_patches(img, c, 60, rng(), 50);
        int pos = 0;
        for (const auto& s : samples) {
            pos += *s.label ? 1 : 0;
            EXPECT_EQ(s.pixels.width(), 50);
            EXPECT_EQ(s.pixels.height(), 50);
            const bool inside = c.x >= s.center.x - 30 && c.x < s.center.x + 30 && c.y >= s.center.y - 30 &&
                                c.y < s.center.y + 30;
            EXPECT_EQ(inside, *s.label);
        }
        EXPECT_EQ(pos * 2, static_cast<int>(samples.size()));
        EXPECT_EQ(pos, std::min(positives_oracle(160, 120, 60, c), 15 - positives_oracle(160, 120, 60, c)));
    }
}

TEST(Extraction, SeededSubsampling) {
    const auto img = testing::random_image(160, 120, 5);
    auto centers = [&](std::uint64_t seed) {
        std::vector<std::pair<double, double>> out;
        for (const auto& s : extract_labeled_patches(img, {80, 48}, 60, seed)) out.push_back({s.center.x, s.center.y});
        return out;
    };
    EXPECT_EQ(centers(7), centers(7));
    bool differs = false;
    for (std::uint64_t s = 8; s < 16; ++s) differs = differs || centers(s) != centers(7);
    EXPECT_TRUE(differs);
}

TEST(Extraction, InvalidArguments) {
    const auto img = testing::random_image(100, 100, 6);
    EXPECT_THROW(extract_labeled_patches(img, {50, 50}, 15, 0), ParameterError);
    EXPECT_THROW(extract_labeled_patches(img, {150, 50}, 50, 0), ParameterError);
    EXPECT_THROW(extract_labeled_patches(testing::random_image(40, 40, 1), {20, 20}, 50, 0), ExtractionError);
}

TEST(Localize, MedianOfTopTiles) {
    const auto m = median_center({{20, 1}, {25, 2}, {30, 3}, {80, 4}, {85, 5}});
    EXPECT_DOUBLE_EQ(m.x, 30.0);
    EXPECT_DOUBLE_EQ(m.y, 3.0);
    EXPECT_DOUBLE_EQ(median_center({{1, 1}, {3, 5}}).x, 2.0);
    EXPECT_THROW(median_center({}), ParameterError);
}

TEST(Localize, TiesResolveInRasterOrder) {
    const auto fit = patch_localize(ClassifierModel::zeros(50), testing::random_image(160, 120, 7), 60);
    EXPECT_DOUBLE_EQ(fit.center.x, 90.0);
    EXPECT_DOUBLE_EQ(fit.center.y, 30.0);
    EXPECT_DOUBLE_EQ(fit.confidence, 0.5);
    EXPECT_EQ(fit.method, LocalizerKind::Patch);
}

TEST(Localize, FewerTilesThanFive) {
    const auto fit = patch_localize(ClassifierModel::zeros(50), GrayImage(100, 60, 9), 60);
    EXPECT_DOUBLE_EQ(fit.center.x, 60.0);
    EXPECT_DOUBLE_EQ(fit.center.y, 30.0);
    EXPECT_THROW(patch_localize(ClassifierModel::zeros(50), GrayImage(50, 50), 60), LocalizationFailed);
}

TEST(Localize, DarknessModelFindsDarkRegion) {
    auto model = ClassifierModel::zeros(50);
    for (auto& w : model.weights) w = -1.0 / 2500.0;
    for (auto& m : model.mean) m = 128.0;
    for (auto& s : model.std) s = 1.0;
    const auto img = testing::disk_image(160, 120, {95, 75}, 18);
    const auto fit = patch_localize(model, img, 60);
    EXPECT_LE(std::hypot(fit.center.x - 95, fit.center.y - 75), 30.0);
    EXPECT_GE(fit.confidence, 0.0);
    EXPECT_LE(fit.confidence, 1.0);
}

TEST(Localize, CenterInsideTileHull) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0, 0.02);
    auto model = ClassifierModel::zeros(50);
    for (auto& w : model.weights) w = n(rng);
    for (int t = 0; t < 10; ++t) {
        const auto fit = patch_localize(model, testing::random_image(160, 120, 100 + t), 60);
        EXPECT_GE(fit.center.x, 30.0);
        EXPECT_LE(fit.center.x, 130.0);
        EXPECT_GE(fit.center.y, 30.0);
        EXPECT_LE(fit.center.y, 90.0);
    }
}

}  // namespace
}  // namespace rapd
