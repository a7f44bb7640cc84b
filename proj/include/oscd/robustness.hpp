#pragma once

// Multi-seed aggregation and robustness diagnostics: paired t tests, rank
// correlations, closed-set absorption matrices, confidence summaries, and the
// rule that turns per-setting seed sweeps into a deployment recommendation.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oscd/linalg.hpp"
#include "oscd/manifest.hpp"
#include "oscd/scoring.hpp"

namespace oscd {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Student t CDF with dof degrees of freedom.
double student_t_cdf(double t, double dof);

struct PairedTResult {
    double t = 0.0;
    double p = 1.0;
    bool degenerate = false; // all differences zero
};

// Two-sided paired t test on a - b.
PairedTResult paired_t_test(std::span<const double> a, std::span<const double> b);

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

// Midranks (ties averaged), 1-based.
std::vector<double> rank_midrank(std::span<const double> values);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0; // n-1 divisor; 0 when n < 2
};

MeanSd mean_sd(std::span<const double> values);

struct AbsorptionMatrix {
    std::vector<std::string> row_categories; // target unknowns first, then non-target; sorted within group
    std::vector<bool> row_is_non_target;
    std::vector<std::string> col_classes;
    std::vector<size_t> row_counts;
    Matrix cells; // row percentages; each row sums to 100

    std::string to_tsv() const;
};

// Closed-set predictions of the split's unknown samples, row-normalized to
// percentages.
AbsorptionMatrix absorption_matrix(const SampleSet& set, const ScoreTable& scores, Split split);

struct ConfidenceSummaryRow {
    std::string group;
    size_t n = 0;
    std::optional<double> accuracy; // known group only
    double mean_confidence = 0.0;
    double frac_high_confidence = 0.0;
};

// Per-group closed-set confidence statistics (max softmax). Errors when a
// sample in the split lacks logits.
std::vector<ConfidenceSummaryRow> confidence_summary(const SampleSet& set, const ScoreTable& scores,
                                                     Split split, double high_threshold = 0.90);

struct SeedSweep {
    std::string setting;
    std::string strategy;
    std::vector<uint64_t> seeds;
    std::vector<double> values; // aligned with seeds

    MeanSd summary() const { return mean_sd(values); }
};

enum class Recommendation { ca_recommended, sample_preferred, sample_sufficient, boundary };

const char* to_string(Recommendation r);

struct RecommendationRule {
    double delta = 0.005; // absolute community-distortion indifference band
    double alpha = 0.01;  // paired-t significance level
};

struct RecommendationRow {
    std::string setting;
    MeanSd best_sample;
    MeanSd community_aware;
    MeanSd setting_oracle;
    double paired_p = 1.0;
    Recommendation recommendation = Recommendation::sample_sufficient;
    std::string best_sample_strategy;
};

// Applies the rule to aligned per-seed values:
//   ca_recommended   mean(ca) < mean(best) - delta and p < alpha
//   sample_preferred mean(ca) > mean(best) + delta
//   boundary         |mean difference| <= delta and p < alpha
//   sample_sufficient otherwise
RecommendationRow recommend(const std::string& setting, std::span<const double> best_sample,
                            std::span<const double> community_aware,
                            std::span<const double> setting_oracle,
                            const RecommendationRule& rule = {});

} // namespace oscd
