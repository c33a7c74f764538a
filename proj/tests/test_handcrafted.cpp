#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "rapd/errors.hpp"
#include "rapd/localize.hpp"
#include "rapd/synth.hpp"
#include "test_support.hpp"

namespace rapd {
namespace {

using namespace localize;
using testing::disk_image;

double dist(Point2d a, Point2d b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<std::pair<std::string, Localizer>> handcrafted() {
    return {{"starburst", [](const GrayImage& i) { return starburst_localize(i); }},
            {"excuse", [](const GrayImage& i) { return excuse_localize(i); }},
            {"else", [](const GrayImage& i) { return else_localize(i); }}};
}

imgproc::EdgeMap edges_from(int w, int h, const std::vector<Point2i>& pts) {
    imgproc::EdgeMap e(w, h);
    for (auto p : pts) e.set(p.x, p.y);
    return e;
}

void expect_chain_connected(const CurveSegment& s) {
    for (std::size_t i = 1; i < s.points.size(); ++i) {
        const auto a = s.points[i - 1];
        const auto b = s.points[i];
        EXPECT_LE(std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)), 1);
        EXPECT_FALSE(a == b);
    }
}

TEST(Segments, EmptyMapGivesNoSegments) { EXPECT_TRUE(extract_curved_segments(imgproc::EdgeMap(20, 20)).empty()); }

TEST(Segments, DiamondRingIsOneClosedChain) {
    std::vector<Point2i> pts;
    for (int x = -10; x <= 10; ++x) {
        const int d = 10 - std::abs(x);
        pts.push_back({20 + x, 20 + d});
        if (d != 0) pts.push_back({20 + x, 20 - d});
    }
    ASSERT_EQ(pts.size(), 40u);
    const auto segs = extract_curved_segments(edges_from(41, 41, pts));
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_EQ(segs[0].length(), 40u);
    expect_chain_connected(segs[0]);
}

TEST(Segments, PlusSignSplitsIntoFourArms) {
    std::vector<Point2i> pts{{20, 20}};
    for (int k = 1; k <= 10; ++k) {
        pts.push_back({20 + k, 20});
        pts.push_back({20 - k, 20});
        pts.push_back({20, 20 + k});
        pts.push_back({20, 20 - k});
    }
    const auto segs = extract_curved_segments(edges_from(41, 41, pts));
    ASSERT_EQ(segs.size(), 4u);
    for (const auto& s : segs) {
        EXPECT_GE(s.length(), 8u);
        EXPECT_LE(s.length(), 10u);
        expect_chain_connected(s);
    }
}

TEST(Segments, ShortChainsAreDropped) {
    const auto segs = extract_curved_segments(edges_from(20, 20, {{2, 2}, {3, 2}, {4, 2}}), 5);
    EXPECT_TRUE(segs.empty());
}

TEST(Segments, ChainsAreConnectedAndDisjointOnCannyOutput) {
    const auto img = testing::add_noise(disk_image(80, 80, {40, 38}, 15), 8.0, 3);
    const auto edges = adaptive_canny(img);
    const auto segs = extract_curved_segments(edges);
    std::set<std::pair<int, int>> seen;
    for (const auto& s : segs) {
        EXPECT_GE(s.length(), 5u);
        expect_chain_connected(s);
        for (auto p : s.points) {
            EXPECT_TRUE(edges.at(p.x, p.y));
            EXPECT_TRUE(seen.insert({p.x, p.y}).second);
        }
    }
}

TEST(Starburst, FindsDarkDisk) {
    const auto fit = starburst_localize(disk_image(96, 96, {48, 52}, 15));
    EXPECT_LE(dist(fit.center, {48, 52}), 3.0);
    EXPECT_EQ(fit.method, LocalizerKind::Starburst);
}

TEST(Starburst, CenteredDiskConvergesImmediately) {
    const auto run = starburst_run(disk_image(96, 96, {47.5, 47.5}, 15));
    EXPECT_EQ(run.iterations, 1);
    EXPECT_LE(dist(run.fit.center, {47.5, 47.5}), 0.5);
}

TEST(Starburst, UniformFrameFails) {
    EXPECT_THROW(starburst_localize(GrayImage(64, 64, 120)), LocalizationFailed);
}

TEST(Starburst, RunInvariants) {
    StarburstConfig cfg;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto img = testing::add_noise(disk_image(96, 96, {40.0 + s, 50.0 - s}, 12), 6.0, s);
        const auto run = starburst_run(img, cfg);
        EXPECT_GE(run.iterations, 1);
        EXPECT_LE(run.iterations, cfg.max_iters);
        ASSERT_FALSE(run.features.empty());
        Point2d sum{0, 0};
        for (auto p : run.features) {
            sum.x += p.x;
            sum.y += p.y;
        }
        const double n = static_cast<double>(run.features.size());
        EXPECT_DOUBLE_EQ(run.fit.center.x, sum.x / n);
        EXPECT_DOUBLE_EQ(run.fit.center.y, sum.y / n);
    }
}

TEST(Excuse, IgnoresStraightEyelidLine) {
    auto img = disk_image(120, 100, {64, 56}, 14);
    for (int x = 0; x < 120; ++x) img.at(x, 20) = 30;
    const auto fit = excuse_localize(img);
    EXPECT_LE(dist(fit.center, {64, 56}), 3.0);
}

TEST(Excuse, EllipticalBlobSize) {
    GrayImage img(120, 100, 200);
    testing::paint_ellipse(img, {60, 50}, 14, 10, 30);
    const auto fit = excuse_localize(img);
    EXPECT_LE(dist(fit.center, {60, 50}), 2.0);
    ASSERT_TRUE(fit.radius.has_value());
    EXPECT_NEAR(*fit.radius, std::sqrt(140.0), 0.15 * std::sqrt(140.0));
}

TEST(Excuse, BlankFrameFails) { EXPECT_THROW(excuse_localize(GrayImage(64, 64, 90)), LocalizationFailed); }

TEST(Else, ToleratesGlint) {
    auto img = disk_image(96, 96, {50, 46}, 14);
    testing::paint_ellipse(img, {54, 42}, 3, 3, 255);
    const auto fit = else_localize(img);
    EXPECT_LE(dist(fit.center, {50, 46}), 3.0);
}

TEST(Else, PrefersCircularBlob) {
    GrayImage img(160, 120, 200);
    testing::paint_ellipse(img, {40, 60}, 12, 11.4, 30);
    testing::paint_ellipse(img, {115, 60}, 20, 6, 30);
    const auto fit = else_localize(img);
    EXPECT_LE(dist(fit.center, {40, 60}), 3.0);
}

TEST(Else, BlankFrameFails) { EXPECT_THROW(else_localize(GrayImage(64, 64, 90)), LocalizationFailed); }

TEST(Localizers, TooSmallFrameRejected) {
    for (const auto& [name, loc] : handcrafted()) EXPECT_THROW(loc(GrayImage(20, 20, 100)), ParameterError) << name;
}

TEST(Localizers, TranslationEquivariance) {
    const auto a = disk_image(128, 100, {60, 50}, 13);
    const auto b = disk_image(128, 100, {67, 46}, 13);
    for (const auto& [name, loc] : handcrafted()) {
        const auto fa = loc(a);
        const auto fb = loc(b);
        EXPECT_NEAR(fb.center.x - fa.center.x, 7.0, 1.0) << name;
        EXPECT_NEAR(fb.center.y - fa.center.y, -4.0, 1.0) << name;
    }
}

TEST(Localizers, FitInvariantsOnSyntheticEyes) {
    synth::SimParams p;
    p.noise_sigma = 8.0;
    p.center_jitter = 5.0;
    for (const auto& [name, loc] : handcrafted()) {
        int within = 0;
        for (int f = 0; f < 30; ++f) {
            const auto c = synth::jittered_center(p, synth::Eye::Right, f);
            const double r = 15.0 + f % 10;
            const auto img = synth::render_eye_frame(c, r, p, synth::mix_seed(77, f));
            try {
                const auto fit = loc(img);
                EXPECT_TRUE(img.contains(fit.center.x, fit.center.y)) << name;
                EXPECT_GE(fit.confidence, 0.0) << name;
                EXPECT_LE(fit.confidence, 1.0) << name;
                within += dist(fit.center, c) <= 5.0 ? 1 : 0;
            } catch (const LocalizationFailed&) {
            }
        }
        EXPECT_GE(within, 27) << name;
    }
}

TEST(Localizers, ParseNames) {
    EXPECT_EQ(parse_localizer("starburst"), LocalizerKind::Starburst);
    EXPECT_EQ(parse_localizer("excuse"), LocalizerKind::ExCuSe);
    EXPECT_EQ(parse_localizer("else"), LocalizerKind::ElSe);
    EXPECT_EQ(parse_localizer("patch"), LocalizerKind::Patch);
    EXPECT_THROW(parse_localizer("hough"), ParameterError);
    for (auto k : {LocalizerKind::Starburst, LocalizerKind::ExCuSe, LocalizerKind::ElSe, LocalizerKind::Patch})
        EXPECT_EQ(parse_localizer(to_string(k)), k);
}

}  // namespace
}  // namespace rapd
