#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "rapd/errors.hpp"
#include "rapd/measure.hpp"
#include "rapd/reflex.hpp"
#include "rapd/synth.hpp"
#include "test_support.hpp"

namespace rapd {
namespace {

using namespace measure;

Localizer starburst() {
    return [](const GrayImage& i) { return localize::starburst_localize(i); };
}

std::vector<GrayImage> sequence(const std::vector<double>& radii, double noise, std::uint64_t seed) {
    synth::SimParams p;
    p.noise_sigma = noise;
    p.seed = seed;
    std::vector<GrayImage> frames;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const auto c = synth::jittered_center(p, synth::Eye::Right, static_cast<int>(i));
        frames.push_back(synth::render_eye_frame(c, radii[i], p, synth::mix_seed(seed, i)));
    }
    return frames;
}

TEST(FillGaps, NearestNeighbourEarlierOnTies) {
    using V = std::vector<std::optional<double>>;
    EXPECT_EQ(fill_gaps(V{std::nullopt, 1.0, std::nullopt, std::nullopt, 2.0, std::nullopt}),
              (std::vector<double>{1, 1, 1, 2, 2, 2}));
    EXPECT_EQ(fill_gaps(V{1.0, std::nullopt, 2.0}), (std::vector<double>{1, 1, 2}));
    EXPECT_EQ(fill_gaps(V{3.0, 4.0}), (std::vector<double>{3, 4}));
}

TEST(Measure, ConstantRadius) {
    for (auto crop : {CropMode::HalfImage, CropMode::Fixed60}) {
        const auto trace = measure_sequence(sequence(std::vector<double>(30, 20.0), 0.0, 1), starburst(), crop);
        ASSERT_EQ(trace.radii.size(), 30u);
        EXPECT_EQ(trace.failures, 0);
        for (double r : trace.radii) EXPECT_NEAR(r, 20.0, 1.0);
    }
}

TEST(Measure, RampIsTrackedMonotonically) {
    std::vector<double> truth;
    for (int i = 0; i < 30; ++i) truth.push_back(25.0 - 10.0 * i / 29.0);
    const auto trace = measure_sequence(sequence(truth, 0.0, 2), starburst(), CropMode::HalfImage);
    reflex::ReflexTrace rt;
    rt.radii = trace.radii;
    const auto smoothed = *reflex::smooth(rt, reflex::Smoothing::MovAvg).smoothed;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        EXPECT_NEAR(trace.radii[i], truth[i], 1.0) << i;
        if (i > 0) {
            EXPECT_LE(smoothed[i], smoothed[i - 1] + 1e-9) << i;
        }
    }
}

TEST(Measure, GapsAreFilledFromMeasuredFrames) {
    auto frames = sequence(std::vector<double>(20, 18.0), 3.0, 3);
    const std::set<int> blank{0, 5, 6, 13, 19};
    for (int i : blank) frames[i] = GrayImage(160, 120, 200);
    const auto trace = measure_sequence(frames, starburst(), CropMode::HalfImage);
    EXPECT_EQ(trace.failures, static_cast<int>(blank.size()));
    ASSERT_EQ(trace.radii.size(), 20u);
    std::vector<std::optional<double>> raw;
    for (const auto& f : trace.frames) {
        EXPECT_EQ(f.radius.has_value(), blank.count(f.frame_index) == 0);
        EXPECT_EQ(f.status == "ok", f.radius.has_value());
        raw.push_back(f.radius);
    }
    EXPECT_EQ(trace.radii, fill_gaps(raw));
    EXPECT_EQ(trace.radii[5], *raw[4]);
    EXPECT_EQ(trace.radii[6], *raw[7]);
}

TEST(Measure, MostlyBlankSequenceIsUnusable) {
    std::vector<GrayImage> blank(10, GrayImage(160, 120, 200));
    EXPECT_THROW(measure_sequence(blank, starburst(), CropMode::HalfImage), TraceUnusable);
    auto half = sequence(std::vector<double>(10, 20.0), 0.0, 4);
    for (int i = 0; i < 5; ++i) half[2 * i] = GrayImage(160, 120, 200);
    EXPECT_EQ(measure_sequence(half, starburst(), CropMode::HalfImage).failures, 5);
    half[1] = GrayImage(160, 120, 200);
    EXPECT_THROW(measure_sequence(half, starburst(), CropMode::HalfImage), TraceUnusable);
}

TEST(Measure, HighResolutionInputIsDownsampled) {
    synth::SimParams p;
    p.width = 1920;
    p.height = 1080;
    p.r0 = 80;
    p.amplitude = 20;
    p.noise_sigma = 0.0;
    const auto frame = synth::render_eye_frame({960, 432}, 80.0, p, 1);
    EXPECT_EQ(auto_downsample_factor(frame), 4);
    EXPECT_EQ(auto_downsample_factor(GrayImage(1279, 720)), 1);
    const auto trace = measure_sequence({frame}, starburst(), CropMode::HalfImage);
    EXPECT_EQ(trace.downsample, 4);
    EXPECT_NEAR(trace.radii[0], 20.0, 1.0);
    EXPECT_NEAR(trace.frames[0].center.x, 240.0, 1.5);
    EXPECT_NEAR(trace.frames[0].center.y, 108.0, 1.5);
}

TEST(Measure, CsvHasOneRowPerFrame) {
    auto frames = sequence(std::vector<double>(6, 20.0), 0.0, 5);
    frames[2] = GrayImage(160, 120, 200);
    const auto csv = measurements_csv(measure_sequence(frames, starburst(), CropMode::Fixed60));
    EXPECT_EQ(csv.rfind("frame_index,x,y,radius,votes,status\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
    EXPECT_NE(csv.find("\n2,,,,0,localization_failed"), std::string::npos);
}

TEST(Measure, InvalidArguments) {
    EXPECT_THROW(measure_sequence({}, starburst(), CropMode::HalfImage), ParameterError);
    EXPECT_THROW(measure_sequence({GrayImage(64, 64)}, starburst(), CropMode::HalfImage, {}, -1), ParameterError);
    EXPECT_EQ(parse_crop("half_image"), CropMode::HalfImage);
    EXPECT_EQ(parse_crop("fixed_60"), CropMode::Fixed60);
    EXPECT_EQ(to_string(CropMode::Fixed60), "fixed_60");
    EXPECT_THROW(parse_crop("full"), ParameterError);
}

}  // namespace
}  // namespace rapd
