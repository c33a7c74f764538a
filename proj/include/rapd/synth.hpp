#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rapd/image.hpp"
#include "rapd/reflex.hpp"

namespace rapd::synth {

using reflex::Eye;
using reflex::StimulusInterval;

struct SimParams {
    double fps{10.0};
    int swings{3};
    double on_duration{2.0};  // s per direct stimulation
    double rest{2.0};         // s between stimulations
    int width{160};
    int height{120};
    double r0{25.0};
    double amplitude{10.0};
    double gain_right{1.0};
    double gain_left{1.0};
    double time_constant{0.3};
    double noise_sigma{5.0};
    double center_jitter{2.0};
    double center_x{0.5};  // eye center as a fraction of the frame size
    double center_y{0.4};
    std::uint64_t seed{0};

    void validate() const;
    int frame_count() const;
};

/// Initial rest, then per swing: right on, rest, left on, rest.
std::vector<StimulusInterval> stimulus_schedule(const SimParams& p);

/// Noise-free per-frame radius. Both eyes relax toward r0 - g_s * A while eye
/// s is stimulated and toward r0 otherwise, exactly sampled first-order
/// dynamics with the given time constant.
std::vector<double> radius_schedule(const SimParams& p, Eye eye);

/// Seeded center for one frame, uniformly jittered within center_jitter.
Point2d jittered_center(const SimParams& p, Eye eye, int frame);

/// Sclera 200, iris 120 (outer radius 2.2 r0), pupil 30 with a 1 px
/// anti-aliased rim, then seeded Gaussian noise clipped to [0, 255].
GrayImage render_eye_frame(Point2d center, double radius, const SimParams& p, std::uint64_t frame_seed);

struct GroundTruth {
    Point2d center;
    double radius{0.0};
};

struct TestCase {
    std::string case_id;
    SimParams params;
    std::vector<GrayImage> right_frames;
    std::vector<GrayImage> left_frames;
    std::vector<StimulusInterval> schedule;
    std::vector<GroundTruth> truth_right;
    std::vector<GroundTruth> truth_left;
    bool rapd_positive{false};
    std::optional<Eye> affected_eye;
    double alpha{1.0};
    double analytic_index{0.0};
};

/// Index of the noise-free schedules under the windowed delta definition.
double analytic_index(const SimParams& p);

/// Healthy cases force both gains to 1; positive cases set the affected
/// eye's gain to alpha in (0, 1).
TestCase generate_case(SimParams p, bool rapd_positive, std::optional<Eye> affected_eye, double alpha,
                       const std::string& case_id = "case", bool render = true);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace rapd::synth
