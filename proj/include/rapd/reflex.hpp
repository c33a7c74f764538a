#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rapd::reflex {

enum class Eye { Right, Left };

std::string to_string(Eye eye);
Eye parse_eye(const std::string& name);

/// Direct stimulation of one eye over frames [start_frame, end_frame).
struct StimulusInterval {
    Eye eye{Eye::Right};
    int start_frame{0};
    int end_frame{0};

    friend bool operator==(const StimulusInterval&, const StimulusInterval&) = default;
};

struct ReflexTrace {
    Eye eye{Eye::Right};
    double fps{10.0};
    std::vector<double> radii;
    std::vector<StimulusInterval> schedule;
    std::optional<std::vector<double>> smoothed;

    /// Radii positive and finite; intervals ordered, disjoint and inside the trace.
    void validate() const;
};

enum class Smoothing { None, MovAvg };
enum class ScoreMethod { RapdIndex, Pearson, Spearman, Kendall };

std::string to_string(Smoothing s);
std::string to_string(ScoreMethod m);
Smoothing parse_smoothing(const std::string& name);
ScoreMethod parse_method(const std::string& name);

struct RapdScore {
    double value{0.0};
    ScoreMethod method{ScoreMethod::RapdIndex};
    bool degenerate{false};
    std::optional<double> delta_r;
    std::optional<double> delta_l;
};

inline constexpr int kSmoothingWindow = 5;
inline constexpr double kLeadSeconds = 0.5;

/// Sliding median over truncated windows at the borders (lower median when a
/// truncated window holds an even count). Window must be odd.
std::vector<double> median_filter_1d(const std::vector<double>& x, int window);
/// Centered mean over truncated windows.
std::vector<double> moving_average(const std::vector<double>& x, int window);

/// Median filter (always) then moving average (mov_avg only); returns a copy
/// with `smoothed` set.
ReflexTrace smooth(const ReflexTrace& trace, Smoothing smoothing);

/// Mean constriction amplitude over the direct-stimulation intervals of the
/// trace's eye: max over the lead window [start - lead, start] minus min over
/// the interval, clamped at 0. Without such intervals: global range.
double pupil_delta(const ReflexTrace& trace, double lead_seconds = kLeadSeconds);

/// 1 - min(|dr|, |dl|) / max(|dr|, |dl|); 0/0 gives 0 with the degenerate flag.
RapdScore rapd_index(double delta_r, double delta_l);

double pearson(const std::vector<double>& a, const std::vector<double>& b);
double spearman(const std::vector<double>& a, const std::vector<double>& b);
double kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b);
/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& x);

/// 1 - r after truncating both inputs to the shorter length (>= 3). Zero
/// variance gives value 1 with the degenerate flag.
RapdScore correlation_dissimilarity(const std::vector<double>& a, const std::vector<double>& b, ScoreMethod kind);

RapdScore assess_case(const ReflexTrace& right, const ReflexTrace& left, ScoreMethod method, Smoothing smoothing);

}  // namespace rapd::reflex
