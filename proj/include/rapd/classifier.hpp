#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rapd/image.hpp"

namespace rapd::patch {

enum class ModelKind { Linear, Mlp1 };

std::string to_string(ModelKind kind);

/// Pupil/no-pupil patch classifier over standardised pixels.
///
/// Input vector z_i = (pixel_i - mean_i) / std_i, pixels in row-major order
/// of an input_side x input_side patch.
///   linear: weights = w (D values), bias = {b}; logit = w.z + b
///   mlp1:   weights = W1 (hidden x D, row-major) followed by w2 (hidden),
///           bias = b1 (hidden) followed by {b2};
///           logit = w2.relu(W1 z + b1) + b2
/// Confidence = sigmoid(logit).
struct ClassifierModel {
    ModelKind kind{ModelKind::Linear};
    int input_side{50};
    std::optional<int> hidden_width;
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<double> weights;
    std::vector<double> bias;
    std::string trained_by{"rapd-baseline"};
    double val_accuracy{0.0};

    std::size_t input_size() const { return static_cast<std::size_t>(input_side) * input_side; }
    /// Throws LoadError naming the first inconsistent field.
    void validate() const;

    /// All-zero linear model with identity normalisation.
    static ClassifierModel zeros(int input_side = 50);
};

/// Probability of the pupil class. Patches of another size are rescaled
/// bilinearly to input_side first.
double classify_patch(const ClassifierModel& model, const GrayImage& patch);

struct LabeledPatch {
    GrayImage pixels;
    bool label{false};
};

struct TrainOptions {
    int epochs{20};
    std::uint64_t seed{0};
    int batch_size{32};
    double learning_rate{0.01};
};

/// Seeded mini-batch gradient descent on the logistic loss. Returns the
/// epoch snapshot with the best validation accuracy (earliest on ties).
ClassifierModel train_baseline_classifier(const std::vector<LabeledPatch>& train, const std::vector<LabeledPatch>& val,
                                          const TrainOptions& opts);

double accuracy(const ClassifierModel& model, const std::vector<LabeledPatch>& samples);

// Weight-file JSON (schema_version 1); see docs/weight_file_format.md.
std::string serialize_classifier(const ClassifierModel& model);
ClassifierModel parse_classifier(const std::string& json_text);
void save_classifier(const ClassifierModel& model, const std::string& path);
ClassifierModel load_classifier(const std::string& path);

}  // namespace rapd::patch
