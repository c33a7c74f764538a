#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rapd/image.hpp"
#include "rapd/reflex.hpp"
#include "rapd/synth.hpp"

namespace rapd::case_io {

/// Contents of `<case_dir>/manifest.json`. Ground truth and the analytic index
/// are present only for generated cases.
struct Manifest {
    std::string case_id;
    double fps{10.0};
    int width{0};
    int height{0};
    int frame_count{0};
    std::vector<reflex::StimulusInterval> schedule;
    bool rapd_positive{false};
    std::optional<reflex::Eye> affected_eye;
    std::optional<double> alpha;
    std::optional<std::vector<synth::GroundTruth>> truth_right;
    std::optional<std::vector<synth::GroundTruth>> truth_left;
    std::optional<double> analytic_index;
};

struct CaseData {
    Manifest manifest;
    std::vector<GrayImage> right;
    std::vector<GrayImage> left;
};

std::string label_name(bool rapd_positive);

Manifest manifest_of(const synth::TestCase& tc);
std::string manifest_json(const Manifest& m);
Manifest parse_manifest(const std::string& text, const std::string& origin);

/// Writes `<root>/<case_id>/{right,left}/frame_%05d.pgm` and the manifest.
std::filesystem::path write_case(const synth::TestCase& tc, const std::filesystem::path& root);

Manifest read_manifest(const std::filesystem::path& case_dir);
/// Reads the manifest and both frame sequences. Throws IngestionError naming
/// the offending path.
CaseData read_case(const std::filesystem::path& case_dir);

/// Case directories (those holding a manifest) under `root`, sorted by name.
std::vector<std::filesystem::path> list_cases(const std::filesystem::path& root);

}  // namespace rapd::case_io
