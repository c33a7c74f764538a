#include "rapd/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rapd/errors.hpp"
#include "rapd/imgproc.hpp"

namespace rapd::patch {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::vector<double> standardize(const ClassifierModel& m, const GrayImage& patch) {
    const GrayImage& src = (patch.width() == m.input_side && patch.height() == m.input_side)
                               ? patch
                               : imgproc::resize_bilinear(patch, m.input_side, m.input_side);
    const auto px = src.pixels();
    std::vector<double> z(px.size());
    for (std::size_t i = 0; i < px.size(); ++i) z[i] = (px[i] - m.mean[i]) / m.std[i];
    return z;
}

double logit(const ClassifierModel& m, const std::vector<double>& z) {
    const std::size_t d = m.input_size();
    if (m.kind == ModelKind::Linear) {
        return std::inner_product(z.begin(), z.end(), m.weights.begin(), 0.0) + m.bias[0];
    }
    const auto hidden = static_cast<std::size_t>(*m.hidden_width);
    double out = m.bias[hidden];
    for (std::size_t j = 0; j < hidden; ++j) {
        const auto row = m.weights.begin() + static_cast<std::ptrdiff_t>(j * d);
        const double h = std::inner_product(z.begin(), z.end(), row, 0.0) + m.bias[j];
        out += m.weights[hidden * d + j] * std::max(0.0, h);
    }
    return out;
}

template <typename T>
T field(const nlohmann::json& j, const char* name) {
    if (!j.contains(name)) throw LoadError(std::string("weight file: missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw LoadError(std::string("weight file: field '") + name + "' has the wrong type");
    }
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::Linear ? "linear" : "mlp1"; }

ClassifierModel ClassifierModel::zeros(int input_side) {
    ClassifierModel m;
    m.input_side = input_side;
    const std::size_t d = m.input_size();
    m.mean.assign(d, 0.0);
    m.std.assign(d, 1.0);
    m.weights.assign(d, 0.0);
    m.bias.assign(1, 0.0);
    return m;
}

void ClassifierModel::validate() const {
    if (input_side < 1) throw LoadError("weight file: field 'input_side' must be >= 1");
    const std::size_t d = input_size();
    if (mean.size() != d) throw LoadError("weight file: field 'mean' length does not match input_side^2");
    if (std.size() != d) throw LoadError("weight file: field 'std' length does not match input_side^2");
    if (!all_finite(mean)) throw LoadError("weight file: field 'mean' has a non-finite value");
    if (!all_finite(std) || std::any_of(std.begin(), std.end(), [](double s) { return !(s > 0.0); })) {
        throw LoadError("weight file: field 'std' must be finite and positive");
    }
    if (!all_finite(weights)) throw LoadError("weight file: field 'weights' has a non-finite value");
    if (!all_finite(bias)) throw LoadError("weight file: field 'bias' has a non-finite value");
    if (kind == ModelKind::Linear) {
        if (weights.size() != d) throw LoadError("weight file: field 'weights' length does not match input_side^2");
        if (bias.size() != 1) throw LoadError("weight file: field 'bias' must have length 1 for linear models");
    } else {
        if (!hidden_width || *hidden_width < 1) throw LoadError("weight file: field 'hidden_width' required for mlp1");
        const auto h = static_cast<std::size_t>(*hidden_width);
        if (weights.size() != h * d + h) {
            throw LoadError("weight file: field 'weights' length does not match hidden_width*(input_side^2+1)");
        }
        if (bias.size() != h + 1) throw LoadError("weight file: field 'bias' length must be hidden_width+1");
    }
}

double classify_patch(const ClassifierModel& model, const GrayImage& patch) {
    return sigmoid(logit(model, standardize(model, patch)));
}

double accuracy(const ClassifierModel& model, const std::vector<LabeledPatch>& samples) {
    if (samples.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& s : samples) correct += ((classify_patch(model, s.pixels) >= 0.5) == s.label) ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

ClassifierModel train_baseline_classifier(const std::vector<LabeledPatch>& train, const std::vector<LabeledPatch>& val,
                                          const TrainOptions& opts) {
    if (train.empty()) throw TrainingError("training set is empty");
    if (val.empty()) throw TrainingError("validation set is empty");
    if (opts.epochs < 1) throw TrainingError("epochs must be >= 1");
    if (opts.batch_size < 1 || !(opts.learning_rate > 0.0)) throw TrainingError("invalid batch size or learning rate");
    const std::size_t positives = static_cast<std::size_t>(
        std::count_if(train.begin(), train.end(), [](const LabeledPatch& s) { return s.label; }));
    const std::size_t negatives = train.size() - positives;
    if (positives == 0 || negatives == 0) throw TrainingError("training set contains a single class");
    const double imbalance = std::abs(static_cast<double>(positives) - static_cast<double>(negatives));
    if (imbalance > 0.1 * static_cast<double>(train.size())) {
        throw TrainingError("training set is not label-balanced within 10%");
    }

    const int side = train.front().pixels.width();
    ClassifierModel model = ClassifierModel::zeros(side);
    const std::size_t d = model.input_size();
    for (const auto& s : train) {
        if (s.pixels.width() != side || s.pixels.height() != side) {
            throw TrainingError("training patches must all be square with the same side");
        }
    }

    // Per-input normalisation from the training set.
    std::vector<double> sum(d, 0.0), sq(d, 0.0);
    for (const auto& s : train) {
        const auto px = s.pixels.pixels();
        for (std::size_t i = 0; i < d; ++i) {
            sum[i] += px[i];
            sq[i] += static_cast<double>(px[i]) * px[i];
        }
    }
    const double n = static_cast<double>(train.size());
    for (std::size_t i = 0; i < d; ++i) {
        model.mean[i] = sum[i] / n;
        const double var = std::max(0.0, sq[i] / n - model.mean[i] * model.mean[i]);
        const double sd = std::sqrt(var);
        model.std[i] = sd > 1e-6 ? sd : 1.0;
    }

    std::vector<std::vector<float>> features;
    features.reserve(train.size());
    for (const auto& s : train) {
        const auto z = standardize(model, s.pixels);
        features.emplace_back(z.begin(), z.end());
    }

    std::mt19937_64 rng(opts.seed);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(d);
    ClassifierModel best = model;
    double best_acc = -1.0;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opts.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opts.batch_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_b = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const auto& z = features[order[k]];
                double a = model.bias[0];
                for (std::size_t i = 0; i < d; ++i) a += model.weights[i] * z[i];
                const double err = sigmoid(a) - (train[order[k]].label ? 1.0 : 0.0);
                for (std::size_t i = 0; i < d; ++i) grad[i] += err * z[i];
                grad_b += err;
            }
            const double step = opts.learning_rate / static_cast<double>(end - start);
            for (std::size_t i = 0; i < d; ++i) model.weights[i] -= step * grad[i];
            model.bias[0] -= step * grad_b;
        }
        const double acc = accuracy(model, val);
        if (acc > best_acc) {
            best_acc = acc;
            best = model;
        }
    }
    best.val_accuracy = best_acc;
    best.trained_by = "rapd-baseline";
    return best;
}

std::string serialize_classifier(const ClassifierModel& model) {
    model.validate();
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = to_string(model.kind);
    j["input_side"] = model.input_side;
    if (model.hidden_width) j["hidden_width"] = *model.hidden_width;
    j["mean"] = model.mean;
    j["std"] = model.std;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["trained_by"] = model.trained_by;
    j["val_accuracy"] = model.val_accuracy;
    return j.dump(1) + "\n";
}

ClassifierModel parse_classifier(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("weight file: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw LoadError("weight file: top level must be an object");
    if (field<int>(j, "schema_version") != 1) throw LoadError("weight file: field 'schema_version' must be 1");
    ClassifierModel m;
    const auto kind = field<std::string>(j, "kind");
    if (kind == "linear") {
        m.kind = ModelKind::Linear;
    } else if (kind == "mlp1") {
        m.kind = ModelKind::Mlp1;
    } else {
        throw LoadError("weight file: field 'kind' must be 'linear' or 'mlp1'");
    }
    m.input_side = field<int>(j, "input_side");
    if (j.contains("hidden_width") && !j.at("hidden_width").is_null()) m.hidden_width = field<int>(j, "hidden_width");
    m.mean = field<std::vector<double>>(j, "mean");
    m.std = field<std::vector<double>>(j, "std");
    m.weights = field<std::vector<double>>(j, "weights");
    m.bias = field<std::vector<double>>(j, "bias");
    m.trained_by = field<std::string>(j, "trained_by");
    m.val_accuracy = field<double>(j, "val_accuracy");
    m.validate();
    return m;
}

void save_classifier(const ClassifierModel& model, const std::string& path) {
    const std::string text = serialize_classifier(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write weight file: " + path);
    out << text;
}

ClassifierModel load_classifier(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open weight file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_classifier(ss.str());
}

}  // namespace rapd::patch
