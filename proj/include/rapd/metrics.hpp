#pragma once

#include <string>
#include <vector>

namespace rapd::metrics {

struct ConfusionCounts {
    long tp{0};
    long tn{0};
    long fp{0};
    long fn{0};

    long positives() const { return tp + fn; }
    long negatives() const { return tn + fp; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricsReport {
    double precision{0.0};
    double sensitivity{0.0};
    double fpr{0.0};
    double specificity{0.0};
    double fnr{0.0};
    double accuracy{0.0};
    double balanced_accuracy{0.0};
    double f1{0.0};
    bool precision_undefined{false};  // tp + fp == 0
};

ConfusionCounts confusion(const std::vector<bool>& labels, const std::vector<bool>& decisions);

/// Requires both classes to be present.
MetricsReport metric_suite(const ConfusionCounts& c);

struct RocPoint {
    double threshold{0.0};
    double fpr{0.0};
    double tpr{0.0};
    double precision{0.0};
    double recall{0.0};
};

/// Points ordered from the +inf threshold (0,0) down to the smallest score (1,1).
struct RocCurve {
    std::vector<RocPoint> points;
    double auc_roc{0.0};
    double auc_pr{0.0};
};

/// Decision rule: positive iff score >= threshold.
RocCurve roc_sweep(const std::vector<double>& scores, const std::vector<bool>& labels);

/// Threshold maximising sensitivity + specificity; the smallest such
/// threshold among the unique scores wins ties.
double select_threshold(const std::vector<double>& scores, const std::vector<bool>& labels);

std::vector<bool> decide(const std::vector<double>& scores, double threshold);

std::string roc_csv(const RocCurve& curve);

}  // namespace rapd::metrics
