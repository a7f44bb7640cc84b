#pragma once

// Sample-level detection metrics over one score column. The positive class is
// always the unknown group. The thresholded decision rule everywhere is
// strict: score > threshold means unknown; ties at the threshold stay known.

#include <span>
#include <vector>

namespace oscd {

struct BinaryScoredSet {
    std::vector<double> scores;
    std::vector<bool> is_unknown; // parallel; true = positive class

    size_t size() const { return scores.size(); }
    size_t positives() const;
    size_t negatives() const;
};

BinaryScoredSet make_binary_scored(std::span<const double> scores,
                                   const std::vector<bool>& is_unknown);

struct ThresholdedConfusion {
    size_t tp = 0, fp = 0, tn = 0, fn = 0; // unknown = positive

    // Rates are 0 when their denominator is empty.
    double known_recall = 0.0;   // tn / (tn + fp)
    double unknown_recall = 0.0; // tp / (tp + fn)
    double detection_f1 = 0.0;   // 0 when no predicted positives
    double youden = 0.0;         // known_recall + unknown_recall - 1
};

// Mann-Whitney AUROC with midrank tie handling.
double auroc(const BinaryScoredSet& b);

// Area under precision-recall, unknown positive. Thresholds are the distinct
// scores in descending order with predicted positive = score >= t; the area
// is the step sum of (recall_i - recall_{i-1}) * precision_i accumulated in
// that order.
double aupr(const BinaryScoredSet& b);

struct FprAtRecall {
    double fpr = 0.0;       // fraction of known samples scored >= threshold
    double threshold = 0.0; // largest threshold achieving unknown recall >= target
};

// First threshold (scanning from high to low over distinct scores) with
// unknown recall >= target under the score >= t rule.
FprAtRecall fpr_at_unknown_recall(const BinaryScoredSet& b, double target = 0.95);

ThresholdedConfusion confusion_at(const BinaryScoredSet& b, double threshold);

} // namespace oscd
