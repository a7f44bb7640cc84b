#include "oscd/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "oscd/error.hpp"
#include "oscd/io.hpp"

namespace oscd {

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) fail(ErrorCode::invalid_value, "incomplete_beta: a, b must be > 0");
    if (x < 0.0 || x > 1.0) fail(ErrorCode::invalid_value, "incomplete_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    if (dof <= 0.0) fail(ErrorCode::invalid_value, "student_t_cdf: dof must be > 0");
    if (t == 0.0) return 0.5;
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

PairedTResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(ErrorCode::dimension_mismatch, "paired_t_test: length mismatch");
    const size_t n = a.size();
    if (n < 2) fail(ErrorCode::insufficient_data, "paired_t_test: need n >= 2 pairs");

    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = (a[i] - b[i]) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    PairedTResult out;
    if (sd == 0.0) {
        out.degenerate = true;
        out.t = 0.0;
        out.p = 1.0;
        return out;
    }
    out.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    const double dof = static_cast<double>(n - 1);
    // Two-sided p = 2 (1 - F(|t|)) = I_x(dof/2, 1/2) with x = dof/(dof + t^2),
    // evaluated directly so extreme t statistics keep a nonzero tail.
    out.p = incomplete_beta(0.5 * dof, 0.5, dof / (dof + out.t * out.t));
    out.p = std::clamp(out.p, 0.0, 1.0);
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail(ErrorCode::dimension_mismatch, "pearson: length mismatch");
    const size_t n = x.size();
    if (n < 2) fail(ErrorCode::insufficient_data, "pearson: need n >= 2");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        fail(ErrorCode::degenerate_input, "pearson: zero variance input");
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> rank_midrank(std::span<const double> values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    const std::vector<double> rx = rank_midrank(x);
    const std::vector<double> ry = rank_midrank(y);
    return pearson(rx, ry);
}

MeanSd mean_sd(std::span<const double> values) {
    MeanSd out;
    const size_t n = values.size();
    if (n == 0) fail(ErrorCode::degenerate_input, "mean_sd of empty vector");
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(n);
    if (n >= 2) {
        double ss = 0.0;
        for (double v : values) {
            const double d = v - out.mean;
            ss += d * d;
        }
        out.sd = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return out;
}

AbsorptionMatrix absorption_matrix(const SampleSet& set, const ScoreTable& scores, Split split) {
    std::map<std::string, size_t> row_of_id;
    for (size_t r = 0; r < scores.rows.size(); ++r) row_of_id[scores.rows[r].sample_id] = r;

    // category -> (is_non_target, per-class counts)
    std::map<std::string, std::pair<bool, std::vector<size_t>>> per_category;
    const size_t k = set.k();
    for (size_t idx : set.split_index(split)) {
        const auto& rec = set.records[idx];
        if (!rec.is_unknown()) continue;
        auto it = row_of_id.find(rec.sample_id);
        if (it == row_of_id.end()) {
            fail(ErrorCode::missing_input,
                 "unknown sample '" + rec.sample_id + "' is absent from the score table");
        }
        auto& entry = per_category[rec.category];
        if (entry.second.empty()) {
            entry.first = rec.group == Group::non_target_unknown;
            entry.second.assign(k, 0);
        }
        const int predicted = scores.rows[it->second].predicted_class;
        if (predicted < 0 || static_cast<size_t>(predicted) >= k) {
            fail(ErrorCode::invalid_value, "predicted class out of range in score table");
        }
        ++entry.second[predicted];
    }
    if (per_category.empty()) {
        fail(ErrorCode::degenerate_input,
             std::string("split '") + to_string(split) + "' has no unknown samples");
    }

    AbsorptionMatrix out;
    out.col_classes = set.known_classes;
    for (bool want_non_target : {false, true}) {
        for (const auto& [category, entry] : per_category) {
            if (entry.first != want_non_target) continue;
            out.row_categories.push_back(category);
            out.row_is_non_target.push_back(entry.first);
            size_t total = 0;
            for (size_t c : entry.second) total += c;
            out.row_counts.push_back(total);
        }
    }
    out.cells = Matrix(out.row_categories.size(), k);
    for (size_t r = 0; r < out.row_categories.size(); ++r) {
        const auto& entry = per_category[out.row_categories[r]];
        const double total = static_cast<double>(out.row_counts[r]);
        for (size_t c = 0; c < k; ++c) {
            out.cells.at(r, c) = 100.0 * static_cast<double>(entry.second[c]) / total;
        }
    }
    return out;
}

std::string AbsorptionMatrix::to_tsv() const {
    std::ostringstream os;
    os << "category\tgroup\tn";
    for (const auto& c : col_classes) os << "\t" << c;
    os << "\n";
    for (size_t r = 0; r < row_categories.size(); ++r) {
        os << row_categories[r] << "\t" << (row_is_non_target[r] ? "non_target" : "target") << "\t"
           << row_counts[r];
        for (size_t c = 0; c < col_classes.size(); ++c) os << "\t" << format_double(cells.at(r, c));
        os << "\n";
    }
    return os.str();
}

std::vector<ConfidenceSummaryRow> confidence_summary(const SampleSet& set, const ScoreTable& scores,
                                                     Split split, double high_threshold) {
    std::map<std::string, size_t> row_of_id;
    for (size_t r = 0; r < scores.rows.size(); ++r) row_of_id[scores.rows[r].sample_id] = r;

    struct Acc {
        size_t n = 0;
        size_t correct = 0;
        size_t high = 0;
        double conf_sum = 0.0;
    };
    Acc accs[3];

    for (size_t idx : set.split_index(split)) {
        const auto& rec = set.records[idx];
        if (!rec.logits) {
            fail(ErrorCode::missing_field,
                 "confidence_summary: sample '" + rec.sample_id + "' has no logits");
        }
        const std::vector<double> probs = softmax(*rec.logits);
        const double conf = *std::max_element(probs.begin(), probs.end());
        Acc& acc = accs[static_cast<size_t>(rec.group)];
        ++acc.n;
        acc.conf_sum += conf;
        if (conf >= high_threshold) ++acc.high;
        if (rec.group == Group::known) {
            auto it = row_of_id.find(rec.sample_id);
            const int predicted = it != row_of_id.end()
                                      ? scores.rows[it->second].predicted_class
                                      : static_cast<int>(argmax_logit(*rec.logits));
            if (predicted == rec.class_index) ++acc.correct;
        }
    }

    std::vector<ConfidenceSummaryRow> out;
    for (Group g : {Group::known, Group::target_unknown, Group::non_target_unknown}) {
        const Acc& acc = accs[static_cast<size_t>(g)];
        ConfidenceSummaryRow row;
        row.group = to_string(g);
        row.n = acc.n;
        if (acc.n > 0) {
            row.mean_confidence = acc.conf_sum / static_cast<double>(acc.n);
            row.frac_high_confidence = static_cast<double>(acc.high) / static_cast<double>(acc.n);
            if (g == Group::known) {
                row.accuracy = static_cast<double>(acc.correct) / static_cast<double>(acc.n);
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

const char* to_string(Recommendation r) {
    switch (r) {
        case Recommendation::ca_recommended: return "ca_recommended";
        case Recommendation::sample_preferred: return "sample_preferred";
        case Recommendation::sample_sufficient: return "sample_sufficient";
        case Recommendation::boundary: return "boundary";
    }
    return "?";
}

RecommendationRow recommend(const std::string& setting, std::span<const double> best_sample,
                            std::span<const double> community_aware,
                            std::span<const double> setting_oracle, const RecommendationRule& rule) {
    if (best_sample.size() != community_aware.size() ||
        best_sample.size() != setting_oracle.size()) {
        fail(ErrorCode::dimension_mismatch, "recommend: per-seed vectors are misaligned");
    }
    RecommendationRow row;
    row.setting = setting;
    row.best_sample = mean_sd(best_sample);
    row.community_aware = mean_sd(community_aware);
    row.setting_oracle = mean_sd(setting_oracle);
    row.paired_p = paired_t_test(best_sample, community_aware).p;

    const double diff = row.community_aware.mean - row.best_sample.mean;
    if (diff < -rule.delta && row.paired_p < rule.alpha) {
        row.recommendation = Recommendation::ca_recommended;
    } else if (diff > rule.delta) {
        row.recommendation = Recommendation::sample_preferred;
    } else if (std::abs(diff) <= rule.delta && row.paired_p < rule.alpha) {
        row.recommendation = Recommendation::boundary;
    } else {
        row.recommendation = Recommendation::sample_sufficient;
    }
    return row;
}

} // namespace oscd
