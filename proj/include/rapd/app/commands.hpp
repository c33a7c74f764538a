#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "rapd/app/pipeline.hpp"
#include "rapd/synth.hpp"

namespace rapd::app {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kParameterError = 2, kPipelineFailure = 3, kIngestionError = 4 };

/// Maps the current exception to an exit code, printing it to `err`.
int exit_code_for_current_exception(std::ostream& err);

/// Default output directory: $RAPD_OUTPUT_DIR, else "rapd_out".
std::filesystem::path default_output_dir();

synth::SimParams sim_params_from_json(const std::string& json_text);

struct GenerateOptions {
    std::filesystem::path out_dir;
    int count_per_class{32};
    std::uint64_t seed{0};
    double alpha_min{0.2};
    double alpha_max{0.6};
    synth::SimParams params;
    int workers{1};
};

struct CorpusSummary {
    int cases{0};
    int positives{0};
    int negatives{0};
    std::uintmax_t bytes{0};
    std::string hash;  // FNV-1a 64 over relative paths and file contents
};

/// Generated case i < count is healthy, the rest are RAPD-positive with
/// alpha uniform in [alpha_min, alpha_max] and a random affected eye.
synth::TestCase corpus_case(const GenerateOptions& opts, std::size_t index, bool render = true);

CorpusSummary cmd_generate(const GenerateOptions& opts, std::ostream& out);
CorpusSummary summarize_corpus(const std::filesystem::path& root);

struct RunConfig {
    LocalizerKind localizer{LocalizerKind::Starburst};
    measure::CropMode crop{measure::CropMode::HalfImage};
    reflex::Smoothing smoothing{reflex::Smoothing::MovAvg};
    reflex::ScoreMethod method{reflex::ScoreMethod::RapdIndex};
    std::optional<std::string> classifier_path;
    std::optional<double> threshold;
    std::uint64_t seed{0};
    std::filesystem::path output_dir;
    int workers{1};
};

struct AssessResult {
    std::string case_id;
    reflex::RapdScore score;
    double threshold{kDefaultThreshold};
    bool decision{false};
    std::string json;
};

/// Full pipeline on one case. Writes `<case_id>_traces.csv` and
/// `<case_id>_assessment.json` into the output directory.
AssessResult cmd_assess(const std::filesystem::path& case_dir, const RunConfig& cfg, std::ostream& out);

/// Per-frame measurement CSVs for both eyes of one case.
void cmd_measure(const std::filesystem::path& case_dir, const RunConfig& cfg, std::ostream& out);

/// Runs the grid over a corpus; writes benchmark.csv, roc_<slug>.csv and
/// scatter_<slug>.csv.
std::vector<BenchmarkRow> cmd_evaluate(const std::filesystem::path& corpus, const GridConfig& grid,
                                       const RunConfig& cfg, std::ostream& out);

struct TrainBaselineOptions {
    std::filesystem::path corpus;
    std::filesystem::path out_path;
    PatchDataOptions data;
    patch::TrainOptions train;
    SplitSpec split;
};

TrainReport cmd_train_baseline(const TrainBaselineOptions& opts, std::ostream& out);

}  // namespace rapd::app
