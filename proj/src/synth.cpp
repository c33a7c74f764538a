#include "rapd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rapd/errors.hpp"

namespace rapd::synth {

namespace {

int to_frames(double seconds, double fps) { return static_cast<int>(std::floor(seconds * fps + 0.5)); }

std::uint64_t frame_key(const SimParams& p, Eye eye, int frame, std::uint64_t salt) {
    std::uint64_t k = mix_seed(p.seed, eye == Eye::Right ? 1 : 2);
    k = mix_seed(k, static_cast<std::uint64_t>(frame));
    return mix_seed(k, salt);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finaliser over the combined words
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void SimParams::validate() const {
    if (!(fps > 0.0) || swings < 1 || !(on_duration > 0.0) || rest < 0.0) {
        throw ParameterError("invalid stimulation timing parameters");
    }
    if (width < 32 || height < 32) throw ParameterError("frame size must be at least 32x32");
    if (!(amplitude >= 0.0) || !(r0 > 0.0) || r0 - amplitude < 6.0) {
        throw ParameterError("radii must satisfy r0 - A >= 6");
    }
    for (double g : {gain_right, gain_left}) {
        if (!(g > 0.0 && g <= 1.0)) throw ParameterError("afferent gains must lie in (0, 1]");
    }
    if (!(time_constant > 0.0)) throw ParameterError("time constant must be positive");
    if (noise_sigma < 0.0 || center_jitter < 0.0) throw ParameterError("noise and jitter must be non-negative");
}

int SimParams::frame_count() const { return to_frames(rest + swings * 2.0 * (on_duration + rest), fps); }

std::vector<StimulusInterval> stimulus_schedule(const SimParams& p) {
    p.validate();
    std::vector<StimulusInterval> out;
    double t = p.rest;
    for (int s = 0; s < p.swings; ++s) {
        for (Eye eye : {Eye::Right, Eye::Left}) {
            out.push_back({eye, to_frames(t, p.fps), to_frames(t + p.on_duration, p.fps)});
            t += p.on_duration + p.rest;
        }
    }
    return out;
}

std::vector<double> radius_schedule(const SimParams& p, Eye) {
    const auto schedule = stimulus_schedule(p);
    const int n = p.frame_count();
    std::vector<double> target(static_cast<std::size_t>(n), p.r0);
    for (const auto& iv : schedule) {
        const double g = iv.eye == Eye::Right ? p.gain_right : p.gain_left;
        for (int i = iv.start_frame; i < std::min(iv.end_frame, n); ++i) target[i] = p.r0 - g * p.amplitude;
    }
    const double decay = std::exp(-1.0 / (p.fps * p.time_constant));
    std::vector<double> r(static_cast<std::size_t>(n));
    double cur = p.r0;
    for (int i = 0; i < n; ++i) {
        r[i] = cur;
        cur = target[i] + (cur - target[i]) * decay;
    }
    return r;
}

Point2d jittered_center(const SimParams& p, Eye eye, int frame) {
    const Point2d base{p.center_x * p.width, p.center_y * p.height};
    if (p.center_jitter <= 0.0) return base;
    std::mt19937_64 rng(frame_key(p, eye, frame, 0x6a17));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double angle = 2.0 * std::numbers::pi * u(rng);
    const double rad = p.center_jitter * std::sqrt(u(rng));
    return {base.x + rad * std::cos(angle), base.y + rad * std::sin(angle)};
}

GrayImage render_eye_frame(Point2d center, double radius, const SimParams& p, std::uint64_t frame_seed) {
    if (!(radius > 0.0)) throw ParameterError("pupil radius must be positive");
    if (center.x - radius < 0.0 || center.y - radius < 0.0 || center.x + radius > p.width - 1 ||
        center.y + radius > p.height - 1) {
        throw ParameterError("pupil circle does not fit inside the frame");
    }
    const double iris = 2.2 * p.r0;
    std::mt19937_64 rng(frame_seed);
    std::normal_distribution<double> noise(0.0, p.noise_sigma > 0.0 ? p.noise_sigma : 1.0);
    GrayImage img(p.width, p.height);
    for (int y = 0; y < p.height; ++y) {
        for (int x = 0; x < p.width; ++x) {
            const double d = std::hypot(x - center.x, y - center.y);
            const double cp = std::clamp(radius + 0.5 - d, 0.0, 1.0);
            const double ci = std::clamp(iris + 0.5 - d, 0.0, 1.0);
            double v = 200.0 * (1.0 - ci) + ci * (120.0 * (1.0 - cp) + 30.0 * cp);
            if (p.noise_sigma > 0.0) v += noise(rng);
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
        }
    }
    return img;
}

double analytic_index(const SimParams& p) {
    const auto schedule = stimulus_schedule(p);
    const auto radii = radius_schedule(p, Eye::Right);
    reflex::ReflexTrace right{Eye::Right, p.fps, radii, schedule, radii};
    reflex::ReflexTrace left{Eye::Left, p.fps, radii, schedule, radii};
    return reflex::rapd_index(reflex::pupil_delta(right), reflex::pupil_delta(left)).value;
}

TestCase generate_case(SimParams p, bool rapd_positive, std::optional<Eye> affected_eye, double alpha,
                       const std::string& case_id, bool render) {
    p.gain_right = 1.0;
    p.gain_left = 1.0;
    if (rapd_positive) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1) for RAPD cases");
        if (!affected_eye) throw ParameterError("RAPD cases need an affected eye");
        (*affected_eye == Eye::Right ? p.gain_right : p.gain_left) = alpha;
    } else {
        affected_eye.reset();
        alpha = 1.0;
    }
    p.validate();

    TestCase tc;
    tc.case_id = case_id;
    tc.params = p;
    tc.schedule = stimulus_schedule(p);
    tc.rapd_positive = rapd_positive;
    tc.affected_eye = affected_eye;
    tc.alpha = alpha;
    tc.analytic_index = analytic_index(p);
    const auto radii = radius_schedule(p, Eye::Right);
    for (Eye eye : {Eye::Right, Eye::Left}) {
        auto& truth = eye == Eye::Right ? tc.truth_right : tc.truth_left;
        auto& frames = eye == Eye::Right ? tc.right_frames : tc.left_frames;
        for (int i = 0; i < static_cast<int>(radii.size()); ++i) {
            const Point2d c = jittered_center(p, eye, i);
            truth.push_back({c, radii[i]});
            if (render) frames.push_back(render_eye_frame(c, radii[i], p, frame_key(p, eye, i, 0x401e)));
        }
    }
    return tc;
}

}  // namespace rapd::synth
