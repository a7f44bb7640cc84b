#include "oscd/sample_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oscd/error.hpp"

namespace oscd {

size_t BinaryScoredSet::positives() const {
    size_t n = 0;
    for (bool u : is_unknown) n += u ? 1 : 0;
    return n;
}

size_t BinaryScoredSet::negatives() const { return is_unknown.size() - positives(); }

BinaryScoredSet make_binary_scored(std::span<const double> scores,
                                   const std::vector<bool>& is_unknown) {
    if (scores.size() != is_unknown.size()) {
        fail(ErrorCode::dimension_mismatch, "scores and labels have different lengths");
    }
    BinaryScoredSet b;
    b.scores.assign(scores.begin(), scores.end());
    b.is_unknown = is_unknown;
    for (double s : b.scores) {
        if (std::isnan(s)) fail(ErrorCode::invalid_value, "NaN score in binary scored set");
    }
    return b;
}

namespace {

void require_both_classes(const BinaryScoredSet& b, const char* what) {
    if (b.positives() == 0 || b.negatives() == 0) {
        fail(ErrorCode::degenerate_input,
             std::string(what) + " requires at least one unknown and one known sample");
    }
}

// Indices sorted by score; midranks assigned within tie groups.
std::vector<double> midranks(const std::vector<double>& scores) {
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t c) { return scores[a] < scores[c]; });

    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double auroc(const BinaryScoredSet& b) {
    require_both_classes(b, "auroc");
    const std::vector<double> ranks = midranks(b.scores);
    const double n_pos = static_cast<double>(b.positives());
    const double n_neg = static_cast<double>(b.negatives());
    double rank_sum = 0.0;
    for (size_t i = 0; i < b.size(); ++i) {
        if (b.is_unknown[i]) rank_sum += ranks[i];
    }
    const double u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    return u / (n_pos * n_neg);
}

double aupr(const BinaryScoredSet& b) {
    require_both_classes(b, "aupr");
    const size_t n = b.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t c) { return b.scores[a] > b.scores[c]; });

    const double total_pos = static_cast<double>(b.positives());
    double area = 0.0;
    double prev_recall = 0.0;
    size_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && b.scores[order[j + 1]] == b.scores[order[i]]) ++j;
        for (size_t k = i; k <= j; ++k) {
            if (b.is_unknown[order[k]]) ++tp;
            else ++fp;
        }
        const double recall = static_cast<double>(tp) / total_pos;
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    return area;
}

FprAtRecall fpr_at_unknown_recall(const BinaryScoredSet& b, double target) {
    if (b.positives() == 0) {
        fail(ErrorCode::degenerate_input, "fpr_at_unknown_recall requires unknown samples");
    }
    const size_t n = b.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t c) { return b.scores[a] > b.scores[c]; });

    const double total_pos = static_cast<double>(b.positives());
    const size_t total_neg = b.negatives();

    size_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && b.scores[order[j + 1]] == b.scores[order[i]]) ++j;
        for (size_t k = i; k <= j; ++k) {
            if (b.is_unknown[order[k]]) ++tp;
            else ++fp;
        }
        if (static_cast<double>(tp) / total_pos >= target) {
            FprAtRecall out;
            out.threshold = b.scores[order[i]];
            out.fpr = total_neg == 0 ? 0.0
                                     : static_cast<double>(fp) / static_cast<double>(total_neg);
            return out;
        }
        i = j + 1;
    }
    // Unreachable: at the minimum score every positive satisfies score >= t.
    fail(ErrorCode::infeasible_strategy, "unknown recall target unreachable");
}

ThresholdedConfusion confusion_at(const BinaryScoredSet& b, double threshold) {
    ThresholdedConfusion c;
    for (size_t i = 0; i < b.size(); ++i) {
        const bool predicted_unknown = b.scores[i] > threshold;
        if (b.is_unknown[i]) {
            predicted_unknown ? ++c.tp : ++c.fn;
        } else {
            predicted_unknown ? ++c.fp : ++c.tn;
        }
    }
    const size_t knowns = c.tn + c.fp;
    const size_t unknowns = c.tp + c.fn;
    c.known_recall = knowns ? static_cast<double>(c.tn) / static_cast<double>(knowns) : 0.0;
    c.unknown_recall = unknowns ? static_cast<double>(c.tp) / static_cast<double>(unknowns) : 0.0;
    const size_t predicted_pos = c.tp + c.fp;
    if (predicted_pos == 0 || unknowns == 0) {
        c.detection_f1 = 0.0;
    } else {
        const double precision = static_cast<double>(c.tp) / static_cast<double>(predicted_pos);
        const double recall = c.unknown_recall;
        c.detection_f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                                    : 0.0;
    }
    c.youden = c.known_recall + c.unknown_recall - 1.0;
    return c;
}

} // namespace oscd
