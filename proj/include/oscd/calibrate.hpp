#pragma once

// Threshold grid construction, the threshold scan that joins sample-level and
// community-level metrics, and the selection strategies applied on top of it.
//
// The scan applies the shared decision rule (score > threshold -> unknown) to
// cached per-member scores, so scanning costs O(grid x total members) with no
// rescoring. Selection tie-breaking is always the lowest grid index, i.e. the
// least aggressive rejection at equal objective value.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oscd/communities.hpp"
#include "oscd/community_metrics.hpp"
#include "oscd/sample_metrics.hpp"
#include "oscd/scoring.hpp"

namespace oscd {

struct ThresholdGrid {
    std::vector<double> thresholds; // strictly ascending after dedup
    std::string source_method;
    size_t size() const { return thresholds.size(); }
};

// Type-7 quantile (linear interpolation between order statistics) of a sorted
// sample at the given level in [0, 1].
double quantile_type7(std::span<const double> sorted_values, double level);

// Quantiles at levels i/(n_quantiles-1) plus the score extrema, deduplicated.
ThresholdGrid build_grid(std::span<const double> scores, size_t n_quantiles = 401,
                         const std::string& source_method = "");

struct ScanRow {
    double threshold = 0.0;
    size_t grid_index = 0;
    ThresholdedConfusion val_confusion;
    ThresholdedConfusion test_confusion;
    std::optional<CommunityMetricBundle> val_mean;
    std::optional<CommunityMetricBundle> test_mean;
    std::vector<CommunityMetricBundle> val_setting_mean;  // aligned with ScanTable::val_settings
    std::vector<CommunityMetricBundle> test_setting_mean; // aligned with ScanTable::test_settings
};

struct ScanTable {
    std::string method;
    ThresholdGrid grid;
    std::vector<std::string> val_settings;  // "type@ratio" labels
    std::vector<std::string> test_settings;
    std::vector<ScanRow> rows;
    size_t val_known_count = 0;
    size_t val_unknown_count = 0;

    std::string to_tsv() const;
};

std::string setting_label(const CommunitySpec& spec);

struct ScanInputs {
    const SampleSet* samples = nullptr;
    const ScoreTable* scores = nullptr;
    std::string method;
    const CommunitySuite* val_suite = nullptr;  // optional
    const CommunitySuite* test_suite = nullptr; // optional
    CommunityMetricParams metric_params;
    int jobs = 1;
};

ScanTable scan(const ThresholdGrid& grid, const ScanInputs& inputs);

// Decisions of every community member at one threshold, and the closed-set
// baseline bundle (no rejection) used by the reduction checks.
CommunityMetricBundle closed_set_baseline(const ScanInputs& inputs, bool test_side);

enum class Strategy {
    fixed_recall_95,
    detection_f1_max,
    youden_max,
    fpr_at_95_unknown_recall,
    community_aware_oscd,
    objective_aware,
    oracle_global,
    oracle_setting,
};

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct StrategyResult {
    Strategy strategy = Strategy::fixed_recall_95;
    std::string objective; // objective_aware only
    std::string setting;   // setting-scoped results only
    double threshold = 0.0;
    size_t grid_index = 0;
    std::string selected_on; // val_samples | val_communities | test_communities
    bool deployable = true;
    ThresholdedConfusion val_confusion;
    ThresholdedConfusion test_confusion;
    std::optional<CommunityMetricBundle> test_metrics; // global test-community mean
    std::optional<CommunityMetricBundle> setting_metrics;
};

struct SelectionTargets {
    double fixed_recall = 0.95;
    double fpr_unknown_recall = 0.95;
};

StrategyResult select(const ScanTable& scan, Strategy strategy, const SelectionTargets& targets = {});

// Objectives: oscd, mean_abs_abundance_error, shannon_error, simpson_error,
// pielou_error, richness_error (all minimized) and topk_overlap_max.
StrategyResult select_objective_aware(const ScanTable& scan, const std::string& objective);

// One oracle result per test setting.
std::vector<StrategyResult> select_setting_oracles(const ScanTable& scan);

// Community-aware selection restricted to one validation setting (used by the
// applicability-boundary analysis).
StrategyResult select_community_aware_for_setting(const ScanTable& scan, const std::string& setting);

} // namespace oscd
