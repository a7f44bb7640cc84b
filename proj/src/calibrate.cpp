#include "oscd/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "oscd/error.hpp"
#include "oscd/io.hpp"

namespace oscd {

double quantile_type7(std::span<const double> sorted_values, double level) {
    if (sorted_values.empty()) fail(ErrorCode::degenerate_input, "quantile of empty sample");
    if (level < 0.0 || level > 1.0) fail(ErrorCode::invalid_value, "quantile level outside [0,1]");
    const size_t n = sorted_values.size();
    if (n == 1) return sorted_values[0];
    const double h = level * static_cast<double>(n - 1);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - std::floor(h);
    return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

ThresholdGrid build_grid(std::span<const double> scores, size_t n_quantiles,
                         const std::string& source_method) {
    if (scores.empty()) fail(ErrorCode::degenerate_input, "build_grid: empty scores");
    if (n_quantiles < 2) fail(ErrorCode::invalid_value, "build_grid: need at least 2 quantiles");

    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());

    ThresholdGrid grid;
    grid.source_method = source_method;
    grid.thresholds.reserve(n_quantiles + 2);
    grid.thresholds.push_back(sorted.front());
    grid.thresholds.push_back(sorted.back());
    for (size_t i = 0; i < n_quantiles; ++i) {
        const double level = static_cast<double>(i) / static_cast<double>(n_quantiles - 1);
        grid.thresholds.push_back(quantile_type7(sorted, level));
    }
    std::sort(grid.thresholds.begin(), grid.thresholds.end());
    grid.thresholds.erase(std::unique(grid.thresholds.begin(), grid.thresholds.end()),
                          grid.thresholds.end());
    return grid;
}

std::string setting_label(const CommunitySpec& spec) {
    std::string label = to_string(spec.community_type);
    if (spec.community_type != CommunityType::empirical && spec.unknown_ratio) {
        label += "@";
        label += format_double(*spec.unknown_ratio);
    }
    return label;
}

namespace {

// Flattened member decisions for one community suite.
struct SuiteCache {
    struct Entry {
        std::vector<double> member_scores;
        std::vector<size_t> member_predicted;
        const std::vector<double>* true_abundance = nullptr;
        size_t setting_id = 0;
    };
    std::vector<Entry> entries;
    std::vector<std::string> settings;
};

SuiteCache build_suite_cache(const CommunitySuite& suite, const SampleSet& set,
                             const std::vector<int>& sample_to_row, const ScoreTable& scores,
                             int method_col) {
    SuiteCache cache;
    std::map<std::string, size_t> setting_ids;
    for (const auto& community : suite.communities) {
        const std::string label = setting_label(community.spec);
        auto [it, inserted] = setting_ids.emplace(label, cache.settings.size());
        if (inserted) cache.settings.push_back(label);

        SuiteCache::Entry entry;
        entry.setting_id = it->second;
        entry.true_abundance = &community.true_abundance;
        entry.member_scores.reserve(community.members.size());
        entry.member_predicted.reserve(community.members.size());
        for (size_t idx : community.members) {
            const int row = sample_to_row[idx];
            if (row < 0) {
                fail(ErrorCode::missing_input,
                     "community member '" + set.records[idx].sample_id +
                         "' is absent from the score table");
            }
            entry.member_scores.push_back(scores.rows[row].scores[method_col]);
            entry.member_predicted.push_back(static_cast<size_t>(scores.rows[row].predicted_class));
        }
        cache.entries.push_back(std::move(entry));
    }
    return cache;
}

// Per-split score and label columns for the sample-level confusion.
struct SplitScores {
    std::vector<double> scores;
    std::vector<bool> is_unknown;
};

void mean_and_settings(const SuiteCache& cache, size_t k, double threshold,
                       const CommunityMetricParams& params, CommunityMetricBundle& out_mean,
                       std::vector<CommunityMetricBundle>& out_settings) {
    BundleAccumulator global;
    std::vector<BundleAccumulator> per_setting(cache.settings.size());
    std::vector<double> predicted(k + 1, 0.0);
    for (const auto& entry : cache.entries) {
        std::fill(predicted.begin(), predicted.end(), 0.0);
        const size_t n = entry.member_scores.size();
        for (size_t i = 0; i < n; ++i) {
            const size_t bin =
                entry.member_scores[i] > threshold ? k : entry.member_predicted[i];
            predicted[bin] += 1.0;
        }
        for (double& v : predicted) v /= static_cast<double>(n);
        const CommunityMetricBundle b = evaluate_abundances(*entry.true_abundance, predicted, params);
        global.add(b);
        per_setting[entry.setting_id].add(b);
    }
    out_mean = global.mean();
    out_settings.clear();
    out_settings.reserve(per_setting.size());
    for (const auto& acc : per_setting) out_settings.push_back(acc.mean());
}

} // namespace

ScanTable scan(const ThresholdGrid& grid, const ScanInputs& inputs) {
    if (!inputs.samples || !inputs.scores) {
        fail(ErrorCode::missing_input, "scan requires samples and a score table");
    }
    const SampleSet& set = *inputs.samples;
    const ScoreTable& table = *inputs.scores;
    const int method_col = table.method_index(inputs.method);
    if (method_col < 0) {
        fail(ErrorCode::missing_input, "score table lacks method '" + inputs.method + "'");
    }
    if (inputs.val_suite && inputs.val_suite->split != Split::val) {
        fail(ErrorCode::invalid_value, "val_suite communities are not from the val split");
    }
    if (inputs.test_suite && inputs.test_suite->split != Split::test) {
        fail(ErrorCode::invalid_value, "test_suite communities are not from the test split");
    }

    // sample index -> score row
    std::vector<int> sample_to_row(set.records.size(), -1);
    std::map<std::string, size_t> id_to_index;
    for (size_t i = 0; i < set.records.size(); ++i) id_to_index[set.records[i].sample_id] = i;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        auto it = id_to_index.find(table.rows[r].sample_id);
        if (it == id_to_index.end()) {
            fail(ErrorCode::missing_input,
                 "score table row '" + table.rows[r].sample_id + "' is absent from the manifest");
        }
        sample_to_row[it->second] = static_cast<int>(r);
    }

    SplitScores val_scores, test_scores;
    for (const auto& row : table.rows) {
        SplitScores& dst = row.split == Split::val ? val_scores : test_scores;
        if (row.split != Split::val && row.split != Split::test) continue;
        dst.scores.push_back(row.scores[method_col]);
        dst.is_unknown.push_back(row.group != Group::known);
    }

    ScanTable out;
    out.method = inputs.method;
    out.grid = grid;
    for (bool u : val_scores.is_unknown) {
        ++(u ? out.val_unknown_count : out.val_known_count);
    }

    SuiteCache val_cache, test_cache;
    if (inputs.val_suite) {
        val_cache = build_suite_cache(*inputs.val_suite, set, sample_to_row, table, method_col);
        out.val_settings = val_cache.settings;
    }
    if (inputs.test_suite) {
        test_cache = build_suite_cache(*inputs.test_suite, set, sample_to_row, table, method_col);
        out.test_settings = test_cache.settings;
    }

    const BinaryScoredSet val_set = make_binary_scored(val_scores.scores, val_scores.is_unknown);
    const BinaryScoredSet test_set = make_binary_scored(test_scores.scores, test_scores.is_unknown);
    const size_t k = set.k();

    out.rows.resize(grid.size());
    const int jobs = std::max(1, inputs.jobs);
    auto compute_row = [&](size_t i) {
        ScanRow& row = out.rows[i];
        row.threshold = grid.thresholds[i];
        row.grid_index = i;
        row.val_confusion = confusion_at(val_set, row.threshold);
        row.test_confusion = confusion_at(test_set, row.threshold);
        if (inputs.val_suite) {
            CommunityMetricBundle mean;
            mean_and_settings(val_cache, k, row.threshold, inputs.metric_params, mean,
                              row.val_setting_mean);
            row.val_mean = mean;
        }
        if (inputs.test_suite) {
            CommunityMetricBundle mean;
            mean_and_settings(test_cache, k, row.threshold, inputs.metric_params, mean,
                              row.test_setting_mean);
            row.test_mean = mean;
        }
    };

    if (jobs == 1) {
        for (size_t i = 0; i < out.rows.size(); ++i) compute_row(i);
    } else {
        std::vector<std::thread> workers;
        std::atomic<size_t> next{0};
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&]() {
                for (size_t i = next.fetch_add(1); i < out.rows.size(); i = next.fetch_add(1)) {
                    compute_row(i);
                }
            });
        }
        for (auto& t : workers) t.join();
    }
    return out;
}

CommunityMetricBundle closed_set_baseline(const ScanInputs& inputs, bool test_side) {
    const CommunitySuite* suite = test_side ? inputs.test_suite : inputs.val_suite;
    if (!suite) fail(ErrorCode::missing_input, "closed_set_baseline: suite not provided");
    const SampleSet& set = *inputs.samples;
    const ScoreTable& table = *inputs.scores;
    const int method_col = table.method_index(inputs.method);
    if (method_col < 0) fail(ErrorCode::missing_input, "method absent from score table");

    std::vector<int> sample_to_row(set.records.size(), -1);
    std::map<std::string, size_t> id_to_index;
    for (size_t i = 0; i < set.records.size(); ++i) id_to_index[set.records[i].sample_id] = i;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        auto it = id_to_index.find(table.rows[r].sample_id);
        if (it != id_to_index.end()) sample_to_row[it->second] = static_cast<int>(r);
    }

    const size_t k = set.k();
    BundleAccumulator acc;
    for (const auto& community : suite->communities) {
        DecisionVector decisions;
        decisions.reserve(community.members.size());
        for (size_t idx : community.members) {
            const int row = sample_to_row[idx];
            if (row < 0) fail(ErrorCode::missing_input, "community member missing from score table");
            decisions.push_back(static_cast<size_t>(table.rows[row].predicted_class));
        }
        acc.add(evaluate_community(community, decisions, k, inputs.metric_params));
    }
    return acc.mean();
}

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::fixed_recall_95: return "fixed_recall_95";
        case Strategy::detection_f1_max: return "detection_f1_max";
        case Strategy::youden_max: return "youden_max";
        case Strategy::fpr_at_95_unknown_recall: return "fpr_at_95_unknown_recall";
        case Strategy::community_aware_oscd: return "community_aware_oscd";
        case Strategy::objective_aware: return "objective_aware";
        case Strategy::oracle_global: return "oracle_global";
        case Strategy::oracle_setting: return "oracle_setting";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "fixed_recall_95") return Strategy::fixed_recall_95;
    if (s == "detection_f1_max") return Strategy::detection_f1_max;
    if (s == "youden_max") return Strategy::youden_max;
    if (s == "fpr_at_95_unknown_recall") return Strategy::fpr_at_95_unknown_recall;
    if (s == "community_aware_oscd") return Strategy::community_aware_oscd;
    if (s == "objective_aware") return Strategy::objective_aware;
    if (s == "oracle_global") return Strategy::oracle_global;
    if (s == "oracle_setting") return Strategy::oracle_setting;
    fail(ErrorCode::invalid_value, "unknown strategy: " + s);
}

namespace {

StrategyResult result_at(const ScanTable& scan, size_t index, Strategy strategy) {
    const ScanRow& row = scan.rows[index];
    StrategyResult r;
    r.strategy = strategy;
    r.threshold = row.threshold;
    r.grid_index = index;
    r.val_confusion = row.val_confusion;
    r.test_confusion = row.test_confusion;
    r.test_metrics = row.test_mean;
    return r;
}

void require_val_unknowns(const ScanTable& scan, Strategy strategy) {
    if (scan.val_unknown_count == 0) {
        fail(ErrorCode::infeasible_strategy,
             std::string("strategy ") + to_string(strategy) +
                 " needs unknown validation samples but none exist");
    }
}

void require_val_communities(const ScanTable& scan) {
    if (scan.rows.empty() || !scan.rows.front().val_mean) {
        fail(ErrorCode::missing_input, "scan has no validation-community columns");
    }
}

void require_test_communities(const ScanTable& scan) {
    if (scan.rows.empty() || !scan.rows.front().test_mean) {
        fail(ErrorCode::missing_input, "scan has no test-community columns");
    }
}

// Lowest-index argmin of a row functional.
template <typename Fn>
size_t argmin_row(const ScanTable& scan, Fn&& value) {
    size_t best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < scan.rows.size(); ++i) {
        const double v = value(scan.rows[i]);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    return best;
}

} // namespace

StrategyResult select(const ScanTable& scan, Strategy strategy, const SelectionTargets& targets) {
    if (scan.rows.empty()) fail(ErrorCode::degenerate_input, "empty scan table");

    switch (strategy) {
        case Strategy::fixed_recall_95: {
            const size_t i = argmin_row(scan, [&](const ScanRow& r) {
                return std::abs(r.val_confusion.known_recall - targets.fixed_recall);
            });
            StrategyResult r = result_at(scan, i, strategy);
            r.selected_on = "val_samples";
            return r;
        }
        case Strategy::detection_f1_max: {
            require_val_unknowns(scan, strategy);
            const size_t i =
                argmin_row(scan, [](const ScanRow& r) { return -r.val_confusion.detection_f1; });
            StrategyResult r = result_at(scan, i, strategy);
            r.selected_on = "val_samples";
            return r;
        }
        case Strategy::youden_max: {
            require_val_unknowns(scan, strategy);
            const size_t i = argmin_row(scan, [](const ScanRow& r) { return -r.val_confusion.youden; });
            StrategyResult r = result_at(scan, i, strategy);
            r.selected_on = "val_samples";
            return r;
        }
        case Strategy::fpr_at_95_unknown_recall: {
            require_val_unknowns(scan, strategy);
            // First row meeting the target when scanning from high thresholds down.
            for (size_t step = 0; step < scan.rows.size(); ++step) {
                const size_t i = scan.rows.size() - 1 - step;
                if (scan.rows[i].val_confusion.unknown_recall >= targets.fpr_unknown_recall) {
                    StrategyResult r = result_at(scan, i, strategy);
                    r.selected_on = "val_samples";
                    return r;
                }
            }
            fail(ErrorCode::infeasible_strategy,
                 "no grid threshold reaches the target unknown recall");
        }
        case Strategy::community_aware_oscd: {
            require_val_communities(scan);
            const size_t i = argmin_row(scan, [](const ScanRow& r) { return r.val_mean->oscd; });
            StrategyResult r = result_at(scan, i, strategy);
            r.selected_on = "val_communities";
            return r;
        }
        case Strategy::oracle_global: {
            require_test_communities(scan);
            const size_t i = argmin_row(scan, [](const ScanRow& r) { return r.test_mean->oscd; });
            StrategyResult r = result_at(scan, i, strategy);
            r.selected_on = "test_communities";
            r.deployable = false;
            return r;
        }
        case Strategy::objective_aware:
            fail(ErrorCode::invalid_value, "use select_objective_aware for objective strategies");
        case Strategy::oracle_setting:
            fail(ErrorCode::invalid_value, "use select_setting_oracles for per-setting oracles");
    }
    fail(ErrorCode::invalid_value, "unhandled strategy");
}

StrategyResult select_objective_aware(const ScanTable& scan, const std::string& objective) {
    if (scan.rows.empty()) fail(ErrorCode::degenerate_input, "empty scan table");
    require_val_communities(scan);

    const bool maximize = objective == "topk_overlap_max";
    const std::string field = maximize ? "topk_overlap" : objective;
    const size_t i = argmin_row(scan, [&](const ScanRow& r) {
        const double v = bundle_field(*r.val_mean, field);
        return maximize ? -v : v;
    });
    StrategyResult r = result_at(scan, i, Strategy::objective_aware);
    r.objective = objective;
    r.selected_on = "val_communities";
    return r;
}

std::vector<StrategyResult> select_setting_oracles(const ScanTable& scan) {
    if (scan.rows.empty()) fail(ErrorCode::degenerate_input, "empty scan table");
    require_test_communities(scan);

    std::vector<StrategyResult> out;
    for (size_t s = 0; s < scan.test_settings.size(); ++s) {
        const size_t i =
            argmin_row(scan, [&](const ScanRow& r) { return r.test_setting_mean[s].oscd; });
        StrategyResult r = result_at(scan, i, Strategy::oracle_setting);
        r.setting = scan.test_settings[s];
        r.selected_on = "test_communities";
        r.deployable = false;
        r.setting_metrics = scan.rows[i].test_setting_mean[s];
        out.push_back(std::move(r));
    }
    return out;
}

StrategyResult select_community_aware_for_setting(const ScanTable& scan, const std::string& setting) {
    if (scan.rows.empty()) fail(ErrorCode::degenerate_input, "empty scan table");
    require_val_communities(scan);

    const auto it = std::find(scan.val_settings.begin(), scan.val_settings.end(), setting);
    if (it == scan.val_settings.end()) {
        fail(ErrorCode::missing_input, "scan has no validation setting '" + setting + "'");
    }
    const size_t s = static_cast<size_t>(it - scan.val_settings.begin());
    const size_t i = argmin_row(scan, [&](const ScanRow& r) { return r.val_setting_mean[s].oscd; });
    StrategyResult r = result_at(scan, i, Strategy::community_aware_oscd);
    r.setting = setting;
    r.selected_on = "val_communities";
    const auto test_it = std::find(scan.test_settings.begin(), scan.test_settings.end(), setting);
    if (test_it != scan.test_settings.end()) {
        r.setting_metrics =
            scan.rows[i].test_setting_mean[static_cast<size_t>(test_it - scan.test_settings.begin())];
    }
    return r;
}

namespace {

void append_bundle_header(std::ostringstream& os, const std::string& prefix) {
    for (const char* f : {"oscd", "oscd_plus", "oscd_minus", "mean_abs_abundance_error",
                          "shannon_error", "simpson_error", "pielou_error", "richness_error",
                          "topk_overlap"}) {
        os << "\t" << prefix << "." << f;
    }
}

void append_bundle_row(std::ostringstream& os, const CommunityMetricBundle& b) {
    for (double v : {b.oscd, b.oscd_plus, b.oscd_minus, b.mean_abs_abundance_error, b.shannon_error,
                     b.simpson_error, b.pielou_error, b.richness_error, b.topk_overlap}) {
        os << "\t" << format_double(v);
    }
}

void append_confusion_header(std::ostringstream& os, const std::string& prefix) {
    for (const char* f : {"tp", "fp", "tn", "fn", "known_recall", "unknown_recall", "detection_f1",
                          "youden"}) {
        os << "\t" << prefix << "." << f;
    }
}

void append_confusion_row(std::ostringstream& os, const ThresholdedConfusion& c) {
    os << "\t" << c.tp << "\t" << c.fp << "\t" << c.tn << "\t" << c.fn << "\t"
       << format_double(c.known_recall) << "\t" << format_double(c.unknown_recall) << "\t"
       << format_double(c.detection_f1) << "\t" << format_double(c.youden);
}

} // namespace

std::string ScanTable::to_tsv() const {
    std::ostringstream os;
    os << "# oscd scan table v1; method=" << method << "\n";
    os << "grid_index\tthreshold";
    append_confusion_header(os, "val");
    append_confusion_header(os, "test");
    const bool has_val = !rows.empty() && rows.front().val_mean.has_value();
    const bool has_test = !rows.empty() && rows.front().test_mean.has_value();
    if (has_val) {
        append_bundle_header(os, "val_comm");
        for (const auto& s : val_settings) append_bundle_header(os, "val_comm." + s);
    }
    if (has_test) {
        append_bundle_header(os, "test_comm");
        for (const auto& s : test_settings) append_bundle_header(os, "test_comm." + s);
    }
    os << "\n";
    for (const auto& row : rows) {
        os << row.grid_index << "\t" << format_double(row.threshold);
        append_confusion_row(os, row.val_confusion);
        append_confusion_row(os, row.test_confusion);
        if (has_val) {
            append_bundle_row(os, *row.val_mean);
            for (const auto& b : row.val_setting_mean) append_bundle_row(os, b);
        }
        if (has_test) {
            append_bundle_row(os, *row.test_mean);
            for (const auto& b : row.test_setting_mean) append_bundle_row(os, b);
        }
        os << "\n";
    }
    return os.str();
}

} // namespace oscd
