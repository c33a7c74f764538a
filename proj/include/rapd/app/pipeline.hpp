#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rapd/case_io.hpp"
#include "rapd/classifier.hpp"
#include "rapd/localize.hpp"
#include "rapd/measure.hpp"
#include "rapd/metrics.hpp"
#include "rapd/reflex.hpp"

namespace rapd::app {

inline constexpr double kDefaultThreshold = 0.3;
inline constexpr int kRuntimePatchSize = 60;

/// Builds the per-frame localizer. The patch localizer needs a model.
Localizer make_localizer(LocalizerKind kind, const patch::ClassifierModel* model);

case_io::CaseData case_data_of(synth::TestCase&& tc);

/// Radius traces of both eyes for one (localizer, crop) configuration.
/// Pipeline failures are captured in `error` rather than thrown.
struct CaseMeasurement {
    std::string case_id;
    bool rapd_positive{false};
    double fps{10.0};
    std::vector<reflex::StimulusInterval> schedule;
    std::optional<measure::MeasuredTrace> right;
    std::optional<measure::MeasuredTrace> left;
    std::string error;

    bool ok() const { return right && left; }
};

CaseMeasurement measure_case(const case_io::CaseData& data, LocalizerKind localizer, measure::CropMode crop,
                             const patch::ClassifierModel* model);

/// Score of a measured case. A failed case scores 1.0, flagged degenerate.
reflex::RapdScore score_case(const CaseMeasurement& m, reflex::Smoothing smoothing, reflex::ScoreMethod method);

struct GridConfig {
    std::vector<LocalizerKind> localizers{LocalizerKind::Starburst};
    std::vector<measure::CropMode> crops{measure::CropMode::HalfImage};
    std::vector<reflex::Smoothing> smoothings{reflex::Smoothing::MovAvg};
    std::vector<reflex::ScoreMethod> methods{reflex::ScoreMethod::RapdIndex};
};

struct ScatterPoint {
    std::string case_id;
    bool rapd_positive{false};
    double score{0.0};
    bool failed{false};
};

struct BenchmarkRow {
    LocalizerKind localizer{LocalizerKind::Starburst};
    measure::CropMode crop{measure::CropMode::HalfImage};
    reflex::Smoothing smoothing{reflex::Smoothing::MovAvg};
    reflex::ScoreMethod method{reflex::ScoreMethod::RapdIndex};
    double threshold{0.0};
    metrics::ConfusionCounts counts;
    metrics::MetricsReport report;
    metrics::RocCurve roc;
    std::vector<ScatterPoint> scatter;
    int failed_cases{0};

    std::string slug() const;
};

using CaseSource = std::function<case_io::CaseData(std::size_t index)>;

/// Runs every grid configuration over cases [0, case_count). Each case is
/// loaded once and measured once per (localizer, crop); rows come out in grid
/// order and scatter points in case order, independent of `workers`.
std::vector<BenchmarkRow> evaluate(std::size_t case_count, const CaseSource& source, const GridConfig& grid,
                                   const patch::ClassifierModel* model, int workers = 1);

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);
std::string scatter_csv(const BenchmarkRow& row);

struct SplitSpec {
    double train{0.6};
    double val{0.2};
    double test{0.2};
    std::uint64_t seed{0};
};

struct PatchSplit {
    std::vector<patch::LabeledPatch> train;
    std::vector<patch::LabeledPatch> val;
    std::vector<patch::LabeledPatch> test;
};

struct PatchDataOptions {
    int patch_size{kRuntimePatchSize};
    int frame_stride{5};
    std::uint64_t seed{0};
};

/// Balanced labeled patches from every frame_stride-th ground-truthed frame
/// of both eyes.
std::vector<patch::LabeledPatch> collect_patches(const case_io::CaseData& data, const PatchDataOptions& opts);

/// Seeded shuffle, then consecutive train/val/test slices.
PatchSplit split_patches(std::vector<patch::LabeledPatch> patches, const SplitSpec& spec);

struct TrainReport {
    patch::ClassifierModel model;
    double train_accuracy{0.0};
    double val_accuracy{0.0};
    double test_accuracy{0.0};
    std::size_t train_size{0};
    std::size_t val_size{0};
    std::size_t test_size{0};
};

TrainReport train_from_cases(std::size_t case_count, const CaseSource& source, const PatchDataOptions& data_opts,
                             const patch::TrainOptions& train_opts, const SplitSpec& split);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception thrown by any task is rethrown after all threads finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace rapd::app
