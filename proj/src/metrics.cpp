#include "rapd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "rapd/errors.hpp"

namespace rapd::metrics {

namespace {

void check_inputs(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) throw ParameterError("scores and labels differ in length");
    if (scores.empty()) throw ParameterError("no scores");
    for (double s : scores) {
        if (!std::isfinite(s)) throw ParameterError("scores must be finite");
    }
    const auto pos = std::count(labels.begin(), labels.end(), true);
    if (pos == 0 || pos == static_cast<long>(labels.size())) throw ParameterError("both classes must be present");
}

// Unique scores in descending order.
std::vector<double> descending_unique(std::vector<double> s) {
    std::sort(s.begin(), s.end(), std::greater<>());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

ConfusionCounts counts_at(const std::vector<double>& scores, const std::vector<bool>& labels, double thr) {
    return confusion(labels, decide(scores, thr));
}

}  // namespace

std::vector<bool> decide(const std::vector<double>& scores, double threshold) {
    std::vector<bool> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold;
    return out;
}

ConfusionCounts confusion(const std::vector<bool>& labels, const std::vector<bool>& decisions) {
    if (labels.size() != decisions.size()) throw ParameterError("labels and decisions differ in length");
    if (labels.empty()) throw ParameterError("confusion needs at least one sample");
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) {
            (decisions[i] ? c.tp : c.fn)++;
        } else {
            (decisions[i] ? c.fp : c.tn)++;
        }
    }
    return c;
}

MetricsReport metric_suite(const ConfusionCounts& c) {
    if (c.tp < 0 || c.tn < 0 || c.fp < 0 || c.fn < 0) throw ParameterError("confusion counts must be non-negative");
    if (c.positives() == 0 || c.negatives() == 0) throw ParameterError("metric suite needs both classes present");
    MetricsReport m;
    const double p = static_cast<double>(c.positives()), n = static_cast<double>(c.negatives());
    m.sensitivity = c.tp / p;
    m.fnr = c.fn / p;
    m.specificity = c.tn / n;
    m.fpr = c.fp / n;
    m.accuracy = (c.tp + c.tn) / (p + n);
    m.balanced_accuracy = (m.sensitivity + m.specificity) / 2.0;
    if (c.tp + c.fp == 0) {
        m.precision = 0.0;
        m.precision_undefined = true;
    } else {
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    }
    const double denom = m.precision + m.sensitivity;
    m.f1 = denom > 0.0 ? 2.0 * m.precision * m.sensitivity / denom : 0.0;
    return m;
}

RocCurve roc_sweep(const std::vector<double>& scores, const std::vector<bool>& labels) {
    check_inputs(scores, labels);
    RocCurve curve;
    std::vector<double> thresholds{std::numeric_limits<double>::infinity()};
    for (double t : descending_unique(scores)) thresholds.push_back(t);
    for (double t : thresholds) {
        const auto c = counts_at(scores, labels, t);
        RocPoint pt;
        pt.threshold = t;
        pt.tpr = static_cast<double>(c.tp) / static_cast<double>(c.positives());
        pt.fpr = static_cast<double>(c.fp) / static_cast<double>(c.negatives());
        pt.recall = pt.tpr;
        pt.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
        curve.points.push_back(pt);
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        curve.auc_roc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    // PR trapezoid over recall, anchored at (0, precision of the first threshold).
    double prev_recall = 0.0;
    double prev_precision = curve.points[1].precision;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& b = curve.points[i];
        curve.auc_pr += (b.recall - prev_recall) * (prev_precision + b.precision) / 2.0;
        prev_recall = b.recall;
        prev_precision = b.precision;
    }
    return curve;
}

double select_threshold(const std::vector<double>& scores, const std::vector<bool>& labels) {
    check_inputs(scores, labels);
    const long p = std::count(labels.begin(), labels.end(), true);
    const long n = static_cast<long>(labels.size()) - p;
    auto thresholds = descending_unique(scores);
    std::reverse(thresholds.begin(), thresholds.end());
    double best_thr = thresholds.front();
    long best = -1;
    // sens + spec compared exactly as (tp * N + tn * P) / (P * N).
    for (double t : thresholds) {
        const auto c = counts_at(scores, labels, t);
        const long value = c.tp * n + c.tn * p;
        if (value > best) {
            best = value;
            best_thr = t;
        }
    }
    return best_thr;
}

std::string roc_csv(const RocCurve& curve) {
    std::ostringstream out;
    out << "threshold,fpr,tpr,precision,recall\n";
    char buf[160];
    for (const auto& p : curve.points) {
        if (std::isinf(p.threshold)) {
            std::snprintf(buf, sizeof buf, "inf,%.10g,%.10g,%.10g,%.10g\n", p.fpr, p.tpr, p.precision, p.recall);
        } else {
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g\n", p.threshold, p.fpr, p.tpr, p.precision,
                          p.recall);
        }
        out << buf;
    }
    return out.str();
}

}  // namespace rapd::metrics
